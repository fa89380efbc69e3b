"""Proximity-factor experiments, Schnorr-inequality audits and BER sweeps.

Every trial draws its randomness from ``trial_streams(master_seed, trial)``
only, so results do not depend on how trials are split across workers.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .bounds import check_schnorr, proximity_bound_sic
from .detectors import DETECTORS, ML_GUARD, prepare_detector
from .lattice import Basis, compute_gso, exact_det, write_basis
from .mimo import (
    SNR_CONVENTION,
    Constellation,
    embed_real,
    gray_bits,
    sample_channel,
    snr_to_sigma,
    trial_streams,
)
from .reduction import DEFAULT_DELTA, DEFAULT_MAX_TOURS, RankGuardError, ReductionParams, bkz_reduce, svp_enumerate

log = logging.getLogger(__name__)

PROXIMITY_MAX_RANK = 8
ENSEMBLES = ("gaussian", "integer", "orthogonal", "identity")
WILSON_Z = 1.959963984540054
QUANTIZER_RULE = "round half away from zero in lattice coordinates"
# A ratio above bound * (1 + this) counts as a violation.
VIOLATION_RTOL = 1e-9


def wilson_interval(k: int, n: int, z: float = WILSON_Z) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    p = k / n
    den = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    lo = 0.0 if k == 0 else max(0.0, centre - half)
    hi = 1.0 if k == n else min(1.0, centre + half)
    return lo, hi


def sample_basis(ensemble: str, m: int, rng: np.random.Generator) -> Basis:
    """One basis of rank m from a named ensemble.

    gaussian: real embedding of an (m/2 x m/2) CN(0,1) channel for even m,
    an m x m N(0, 1/2) matrix for odd m.  integer: entries uniform in
    [-50, 50], resampled until nonsingular.  orthogonal: random rotation
    with lengths uniform in [0.5, 2].
    """
    if ensemble == "gaussian":
        if m % 2 == 0:
            return Basis.from_columns(embed_real(sample_channel(m // 2, m // 2, rng)).matrix)
        return Basis.from_columns(rng.standard_normal((m, m)) * math.sqrt(0.5))
    if ensemble == "integer":
        while True:
            a = rng.integers(-50, 51, (m, m))
            if exact_det(a.tolist()) != 0:
                return Basis.from_rows(a)
    if ensemble == "orthogonal":
        q, _ = np.linalg.qr(rng.standard_normal((m, m)))
        return Basis.from_rows(rng.uniform(0.5, 2.0, m)[:, None] * q.T)
    if ensemble == "identity":
        return Basis.from_rows(np.eye(m))
    raise ValueError(f"unknown ensemble {ensemble!r}; choose from {ENSEMBLES}")


def trial_basis(ensemble: str, m: int, master_seed: int, trial: int) -> Basis:
    return sample_basis(ensemble, m, trial_streams(master_seed, trial, 1)[0])


def _map_chunks(fn, args, trials: int, workers: int):
    chunks = _chunks(trials, workers)
    if workers <= 1 or len(chunks) <= 1:
        return [fn(*args, c) for c in chunks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, *zip(*[(*args, c) for c in chunks])))


def _chunks(trials: int, workers: int) -> list[tuple[int, int]]:
    n = max(1, min(trials, workers * 4)) if workers > 1 else 1
    edges = np.linspace(0, trials, n + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


# --------------------------------------------------------------------------
# proximity factors


@dataclass
class ProximityReport:
    m: int
    beta: int
    trials: int
    ensemble: str
    master_seed: int
    per_index_empirical_sup: tuple[float, ...]
    per_index_bound: tuple[float, ...]
    theorem_bound: float
    # min over trials of |b_i*|^2 / lambda^2; >= 1 means the "trivial" step held
    trivial_step_min: tuple[float, ...]
    violations: list[tuple[int, int, float]] = field(default_factory=list)
    counterexamples: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _proximity_ratios(basis: Basis, params: ReductionParams) -> np.ndarray:
    red = bkz_reduce(basis, params)
    lam = svp_enumerate(red).norm_sq
    return lam / compute_gso(red).norms_sq


def _proximity_chunk(m, ensemble, master_seed, params, span):
    lo, hi = span
    return [(t, _proximity_ratios(trial_basis(ensemble, m, master_seed, t), params)) for t in range(lo, hi)]


def run_proximity(
    m: int,
    beta: int,
    trials: int,
    ensemble: str,
    master_seed: int,
    delta: float = DEFAULT_DELTA,
    max_tours: int = DEFAULT_MAX_TOURS,
    workers: int = 1,
    archive_dir=None,
) -> ProximityReport:
    if m > PROXIMITY_MAX_RANK:
        raise RankGuardError(m, PROXIMITY_MAX_RANK)
    if not 2 <= beta <= m:
        raise ValueError(f"block size must satisfy 2 <= beta <= m={m}, got {beta}")
    if ensemble not in ENSEMBLES:
        raise ValueError(f"unknown ensemble {ensemble!r}; choose from {ENSEMBLES}")
    params = ReductionParams(delta, beta, max_tours)
    bound = proximity_bound_sic(m, beta)
    per_bound = np.asarray(bound.per_index)
    sup = np.zeros(m)
    trivial = np.full(m, np.inf)
    violations = []
    for part in _map_chunks(_proximity_chunk, (m, ensemble, master_seed, params), trials, workers):
        for t, ratios in part:
            sup = np.maximum(sup, ratios)
            trivial = np.minimum(trivial, 1.0 / ratios)
            over = (ratios > per_bound * (1 + VIOLATION_RTOL)) | (ratios > bound.value * (1 + VIOLATION_RTOL))
            violations.extend((t, int(i) + 1, float(ratios[i])) for i in np.nonzero(over)[0])
    report = ProximityReport(
        m, beta, trials, ensemble, master_seed,
        tuple(float(s) for s in sup), bound.per_index, bound.value,
        tuple(float(s) for s in trivial), violations,
    )
    if violations and archive_dir is not None:
        report.counterexamples = _archive(
            archive_dir, "proximity", m, beta, ensemble, master_seed, params, sorted({v[0] for v in violations})
        )
    return report


def _archive(archive_dir, kind, m, beta, ensemble, master_seed, params, trials) -> list[str]:
    d = Path(archive_dir)
    d.mkdir(parents=True, exist_ok=True)
    paths = []
    for t in trials:
        red = bkz_reduce(trial_basis(ensemble, m, master_seed, t), params)
        p = d / f"{kind}_m{m}_b{beta}_{ensemble}_s{master_seed}_t{t}.basis"
        comment = (
            f"kind={kind} m={m} beta={beta} ensemble={ensemble} master_seed={master_seed} "
            f"trial={t} delta={params.delta} max_tours={params.max_tours}"
        )
        write_basis(red, p, comment)
        paths.append(str(p))
    return paths


PROXIMITY_COLUMNS = ("m", "beta", "ensemble", "trials", "i", "empirical_sup", "per_index_bound", "theorem_bound", "violated")


def proximity_csv(reports, header: dict | None = None) -> str:
    buf = io.StringIO()
    for k, v in (header or {}).items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PROXIMITY_COLUMNS)
    for r in reports:
        bad = {i for _, i, _ in r.violations}
        for i in range(r.m):
            w.writerow([
                r.m, r.beta, r.ensemble, r.trials, i + 1,
                repr(r.per_index_empirical_sup[i]), repr(r.per_index_bound[i]), repr(r.theorem_bound),
                int(i + 1 in bad),
            ])
    return buf.getvalue()


# --------------------------------------------------------------------------
# Schnorr inequality audit


@dataclass
class SchnorrAudit:
    m: int
    beta: int
    trials: int
    ensemble: str
    upper_violations: int
    lower_violations: int
    worst_upper_margin: tuple[float, ...]
    worst_lower_margin: tuple[float, ...]
    violating_trials: list[int] = field(default_factory=list)
    counterexamples: list[str] = field(default_factory=list)

    @property
    def violations(self) -> int:
        return self.upper_violations + self.lower_violations


def _schnorr_chunk(m, ensemble, master_seed, params, span):
    out = []
    for t in range(*span):
        red = bkz_reduce(trial_basis(ensemble, m, master_seed, t), params)
        rep = check_schnorr(red, params.beta)
        out.append((t, [(e.upper_margin, e.lower_margin, e.upper_ok, e.lower_ok) for e in rep.entries]))
    return out


def run_schnorr_audit(
    m: int,
    beta: int,
    trials: int,
    master_seed: int,
    ensemble: str = "integer",
    delta: float = DEFAULT_DELTA,
    max_tours: int = DEFAULT_MAX_TOURS,
    workers: int = 1,
    archive_dir=None,
) -> SchnorrAudit:
    if m > PROXIMITY_MAX_RANK:
        raise RankGuardError(m, PROXIMITY_MAX_RANK)
    params = ReductionParams(delta, beta, max_tours)
    up = np.full(m, np.inf)
    low = np.full(m, np.inf)
    nu = nl = 0
    bad = []
    for part in _map_chunks(_schnorr_chunk, (m, ensemble, master_seed, params), trials, workers):
        for t, entries in part:
            a = np.asarray([e[:2] for e in entries])
            up = np.minimum(up, a[:, 0])
            low = np.minimum(low, a[:, 1])
            u = sum(not e[2] for e in entries)
            l_ = sum(not e[3] for e in entries)
            nu += u
            nl += l_
            if u or l_:
                bad.append(t)
    audit = SchnorrAudit(m, beta, trials, ensemble, nu, nl, tuple(map(float, up)), tuple(map(float, low)), bad)
    if bad and archive_dir is not None:
        audit.counterexamples = _archive(archive_dir, "schnorr", m, beta, ensemble, master_seed, params, bad)
    return audit


# --------------------------------------------------------------------------
# BER sweeps


@dataclass(frozen=True)
class BerConfig:
    master_seed: int
    n_tx: int = 4
    n_rx: int = 4
    order: int = 4
    detectors: tuple[str, ...] = ("ml", "sic", "lra-lll-sic", "lra-bkz-sic")
    snr_db: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0)
    trials: int = 10_000
    delta: float = DEFAULT_DELTA
    beta: int = 4
    max_tours: int = DEFAULT_MAX_TOURS
    workers: int = 1

    def validate(self):
        errs = []
        if self.master_seed is None:
            errs.append("master_seed required")
        if self.n_tx < 1:
            errs.append(f"n_tx: must be >= 1, got {self.n_tx}")
        if self.n_rx < self.n_tx:
            errs.append(f"n_rx: must be >= n_tx={self.n_tx} for full column rank, got {self.n_rx}")
        if self.order not in (4, 16, 64):
            errs.append(f"order: must be 4, 16 or 64, got {self.order}")
        bad = [d for d in self.detectors if d not in DETECTORS]
        if bad or not self.detectors:
            errs.append(f"detectors: unknown {bad}; choose from {DETECTORS}")
        if not self.snr_db:
            errs.append("snr_db: empty grid")
        if self.trials < 1:
            errs.append(f"trials: must be >= 1, got {self.trials}")
        if not 0.25 < self.delta <= 1:
            errs.append(f"delta: must lie in (1/4, 1], got {self.delta}")
        if any(d.startswith("lra-bkz") for d in self.detectors) and not 2 <= self.beta <= 2 * self.n_tx:
            errs.append(f"beta: must satisfy 2 <= beta <= 2*n_tx={2 * self.n_tx}, got {self.beta}")
        if self.max_tours < 1:
            errs.append(f"max_tours: must be >= 1, got {self.max_tours}")
        if self.workers < 1:
            errs.append(f"workers: must be >= 1, got {self.workers}")
        if errs:
            raise ValueError("; ".join(errs))
        return self

    def header(self) -> dict:
        h = asdict(self)
        h["detectors"] = ",".join(self.detectors)
        h["snr_db"] = ",".join(repr(float(s)) for s in self.snr_db)
        h["snr_convention"] = SNR_CONVENTION
        h["quantizer"] = QUANTIZER_RULE
        h["mmse_regularizer"] = "sigma^2/E_s"
        h["ber"] = "Gray-coded bit error rate; ci_halfwidth is its 95% Wilson half-width"
        return h


@dataclass
class BerCurve:
    detector: str
    snr_db: tuple[float, ...]
    trials: int
    vec_errors: tuple[int, ...]
    sym_errors: tuple[int, ...]
    bit_errors: tuple[int, ...]
    bits_per_trial: int

    @property
    def ber(self) -> tuple[float, ...]:
        n = self.trials * self.bits_per_trial
        return tuple(b / n for b in self.bit_errors)

    @property
    def ci_halfwidth(self) -> tuple[float, ...]:
        n = self.trials * self.bits_per_trial
        out = []
        for b in self.bit_errors:
            lo, hi = wilson_interval(b, n)
            out.append((hi - lo) / 2)
        return tuple(out)

    def vec_rate(self, k: int) -> float:
        return self.vec_errors[k] / self.trials

    def vec_interval(self, k: int) -> tuple[float, float]:
        return wilson_interval(self.vec_errors[k], self.trials)


def active_detectors(config: BerConfig) -> tuple[str, ...]:
    dets = config.detectors
    if "ml" in dets and config.order**config.n_tx > ML_GUARD:
        log.warning("dropping exhaustive ML: %d^%d candidates exceed the guard", config.order, config.n_tx)
        dets = tuple(d for d in dets if d != "ml")
    return dets


def _ber_chunk(config: BerConfig, span):
    const = Constellation(config.order)
    dets = active_detectors(config)
    params = ReductionParams(config.delta, min(config.beta, 2 * config.n_tx), config.max_tours)
    sigmas = [0.0 if math.isinf(s) else snr_to_sigma(s, config.n_tx, const) for s in config.snr_db]
    counts = np.zeros((len(dets), len(sigmas), 3), dtype=np.int64)
    for t in range(*span):
        g_ch, g_sym, g_noise = trial_streams(config.master_seed, t, 3)
        h = sample_channel(config.n_rx, config.n_tx, g_ch)
        x = const.points[g_sym.integers(0, const.order, config.n_tx)]
        z = g_noise.standard_normal((config.n_rx, 2)) * math.sqrt(0.5)
        w = z[:, 0] + 1j * z[:, 1]
        hx = h.entries @ x
        bits = gray_bits(x, const)
        fns = [prepare_detector(d, h, const, params) for d in dets]
        for j, s in enumerate(sigmas):
            y = hx + s * w
            for i, f in enumerate(fns):
                xh = f(y, s).symbols
                wrong = xh != x
                if wrong.any():
                    counts[i, j, 0] += 1
                    counts[i, j, 1] += int(wrong.sum())
                    counts[i, j, 2] += int((gray_bits(xh, const) != bits).sum())
    return counts


def run_ber(config: BerConfig) -> list[BerCurve]:
    config.validate()
    dets = active_detectors(config)
    const = Constellation(config.order)
    total = sum(_map_chunks(_ber_chunk, (config,), config.trials, config.workers))
    curves = []
    for i, d in enumerate(dets):
        c = total[i]
        curves.append(
            BerCurve(
                d, tuple(float(s) for s in config.snr_db), config.trials,
                tuple(int(v) for v in c[:, 0]), tuple(int(v) for v in c[:, 1]), tuple(int(v) for v in c[:, 2]),
                config.n_tx * const.bits_per_symbol,
            )
        )
        ber = curves[-1].ber
        order = np.argsort(config.snr_db)
        if any(ber[order[k + 1]] > ber[order[k]] for k in range(len(order) - 1)):
            log.warning("BER of %s is not monotone in SNR (finite-sample noise?)", d)
    return curves


BER_COLUMNS = ("detector", "snr_db", "trials", "vec_errors", "sym_errors", "ber", "ci_halfwidth")


def ber_csv(curves, header: dict | None = None) -> str:
    buf = io.StringIO()
    for k, v in (header or {}).items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BER_COLUMNS)
    for c in curves:
        ber, ci = c.ber, c.ci_halfwidth
        for k, s in enumerate(c.snr_db):
            w.writerow([c.detector, repr(s), c.trials, c.vec_errors[k], c.sym_errors[k], repr(ber[k]), repr(ci[k])])
    return buf.getvalue()
