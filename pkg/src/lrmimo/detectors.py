"""ML, ZF, MMSE, SIC and lattice-reduction-aided SIC detection.

All detectors work on the shifted/scaled real model

    y' = (Re/Im(y) + (side-1) H 1) / 2 = H u + noise/2,   u in {0..side-1}^(2 n_tx)

where H is the real embedding of the channel.  Quantization rounds half
away from zero in these lattice coordinates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .lattice import Basis, RankDeficientError, round_half_away
from .mimo import Constellation, embed_real, lattice_to_constellation, to_real
from .reduction import ReductionParams, reduce_basis

ML_GUARD = 2**20
RANK_RTOL = 1e-12
# Relative slack when collecting near-optimal ML candidates before the final
# canonical comparison.
_ML_SLACK = 1e-9
_ML_TIE = 1e-12


class GuardError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DetectionResult:
    symbols: np.ndarray
    lattice_point: np.ndarray
    clipped: np.ndarray
    objective: float


def objective(y, channel, x) -> float:
    """||y - B x||^2."""
    b = np.asarray(channel, dtype=complex)
    r = np.asarray(y, dtype=complex) - b @ np.asarray(x, dtype=complex)
    return float(np.sum(r.real**2 + r.imag**2))


def lattice_system(y, channel, constellation: Constellation):
    h = embed_real(channel).matrix
    top = constellation.side - 1
    yp = (to_real(y) + top * h.sum(axis=1)) / 2
    return h, yp


def _result(y, channel, constellation, u) -> DetectionResult:
    u = np.asarray(u, dtype=np.int64)
    symbols, clipped = lattice_to_constellation(u, constellation)
    return DetectionResult(symbols, u, clipped, objective(y, channel, symbols))


def _qr(h):
    q, r = np.linalg.qr(h)
    d = np.abs(np.diag(r))
    scale = max(float(np.abs(h).max()), np.finfo(float).tiny)
    bad = np.nonzero(d <= RANK_RTOL * scale)[0]
    if bad.size:
        raise RankDeficientError(int(bad[0]))
    return q, r


# --------------------------------------------------------------------------
# maximum likelihood


def detect_ml_exhaustive(y, channel, constellation: Constellation, guard: int = ML_GUARD) -> DetectionResult:
    b = np.asarray(channel, dtype=complex)
    n_tx = b.shape[1]
    q = constellation.order
    if q**n_tx > guard:
        raise GuardError(
            f"exhaustive ML needs {q}^{n_tx} candidates, above the guard of {guard}; "
            "use detect_ml_sphere"
        )
    pts = constellation.points
    y = np.asarray(y, dtype=complex)
    best_obj = np.inf
    near: list[tuple[int, ...]] = []
    chunk = max(1, 2**16 // max(q, 1))
    # lexicographic order of index tuples == itertools.product order
    it = itertools.product(range(q), repeat=n_tx)
    while True:
        block = list(itertools.islice(it, chunk * q))
        if not block:
            break
        idx = np.asarray(block, dtype=np.int64)
        r = y[None, :] - pts[idx] @ b.T
        obj = np.sum(r.real**2 + r.imag**2, axis=1)
        k = int(np.argmin(obj))
        if obj[k] < best_obj * (1 - _ML_SLACK):
            best_obj = float(obj[k])
            near = []
        best_obj = min(best_obj, float(obj[k]))
        sel = np.nonzero(obj <= best_obj * (1 + _ML_SLACK) + 1e-300)[0]
        near.extend(tuple(int(t) for t in idx[s]) for s in sel)
    best_idx = _canonical_pick(y, b, pts, near)
    return _result(y, b, constellation, _indices_to_lattice(best_idx, constellation))


def _canonical_pick(y, b, pts, candidates):
    """Smallest objective; ties within 1e-12 go to the lexicographically smallest index tuple."""
    objs = [(objective(y, b, pts[list(c)]), c) for c in set(candidates)]
    lo = min(o for o, _ in objs)
    return min(c for o, c in objs if o <= lo * (1 + _ML_TIE) + 1e-300)


def _indices_to_lattice(idx, constellation):
    idx = np.asarray(idx, dtype=np.int64)
    s = constellation.side
    return np.concatenate([idx // s, idx % s])


def detect_ml_sphere(y, channel, constellation: Constellation) -> DetectionResult:
    """Schnorr-Euchner sphere decoder over the constellation box.

    Radius starts at the (clipped) SIC/Babai point, so the result is never
    worse than SIC.
    """
    b = np.asarray(channel, dtype=complex)
    y = np.asarray(y, dtype=complex)
    h, yp = lattice_system(y, b, constellation)
    q, r = _qr(h)
    z = q.T @ yp
    n = r.shape[1]
    top = constellation.side - 1
    babai = _sic_layers(z, r, top)[0]
    res = r @ babai - z
    eps = 1e-12 * (float(z @ z) + 1.0)
    radius = float(res @ res) * (1 + _ML_SLACK) + eps
    rl = r.tolist()
    zl = z.tolist()
    u = [0] * n
    found: list[tuple[float, tuple[int, ...]]] = []
    state = [radius]
    values = list(range(top + 1))

    def rec(k, partial):
        c = zl[k]
        row = rl[k]
        for j in range(k + 1, n):
            c -= row[j] * u[j]
        c /= row[k]
        rkk2 = row[k] * row[k]
        for v in sorted(values, key=lambda t: (abs(t - c), t)):
            d = v - c
            length = partial + d * d * rkk2
            if length > state[0]:
                break
            u[k] = v
            if k == 0:
                found.append((length, tuple(u)))
                state[0] = min(state[0], length * (1 + _ML_SLACK) + eps)
            else:
                rec(k - 1, length)
        u[k] = 0

    rec(n - 1, 0.0)
    lo = min(f[0] for f in found)
    pts = constellation.points
    side = constellation.side
    n_tx = n // 2
    cands = []
    for length, uu in found:
        if length <= lo * (1 + _ML_SLACK) + eps:
            ua = np.asarray(uu)
            cands.append(tuple(int(t) for t in ua[:n_tx] * side + ua[n_tx:]))
    best_idx = _canonical_pick(y, b, pts, cands)
    return _result(y, b, constellation, _indices_to_lattice(best_idx, constellation))


# --------------------------------------------------------------------------
# linear detectors


def _linear(y, channel, constellation, w) -> DetectionResult:
    xt = w @ np.asarray(y, dtype=complex)
    top = constellation.side - 1
    u = round_half_away((to_real(xt) + top) / 2)
    return _result(y, channel, constellation, u)


def zf_filter(channel) -> np.ndarray:
    b = np.asarray(channel, dtype=complex)
    _qr(embed_real(b).matrix)
    return np.linalg.pinv(b)


def mmse_filter(channel, sigma: float, constellation: Constellation) -> np.ndarray:
    b = np.asarray(channel, dtype=complex)
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    if sigma == 0:
        return zf_filter(b)
    bh = b.conj().T
    reg = sigma**2 / constellation.energy
    return np.linalg.solve(bh @ b + reg * np.eye(b.shape[1]), bh)


def detect_zf(y, channel, constellation: Constellation) -> DetectionResult:
    return _linear(y, channel, constellation, zf_filter(channel))


def detect_mmse(y, channel, constellation: Constellation, sigma: float) -> DetectionResult:
    """MMSE filter (B^H B + sigma^2/E_s I)^-1 B^H; sigma = 0 falls back to ZF."""
    return _linear(y, channel, constellation, mmse_filter(channel, sigma, constellation))


# --------------------------------------------------------------------------
# successive interference cancellation


def _sic_layers(z, r, top=None):
    """Back-substitution with per-layer rounding; clips per layer if ``top`` is given.

    Returns ``(decisions, raw)`` where ``raw`` are the unclipped rounded values.
    """
    n = r.shape[1]
    out = np.zeros(n, dtype=np.int64)
    raw = np.zeros(n, dtype=np.int64)
    for k in range(n - 1, -1, -1):
        c = (z[k] - r[k, k + 1 :] @ out[k + 1 :]) / r[k, k]
        v = round_half_away(c)
        raw[k] = v
        if top is not None:
            v = min(max(v, 0), top)
        out[k] = v
    return out, raw


def detect_sic(y, channel, constellation: Constellation, _qr_cache=None) -> DetectionResult:
    """Nearest-plane SIC on the unreduced real channel, slicing each layer to the constellation."""
    h, yp = lattice_system(y, channel, constellation)
    q, r = _qr_cache if _qr_cache is not None else _qr(h)
    u, raw = _sic_layers(q.T @ yp, r, constellation.side - 1)
    symbols, _ = lattice_to_constellation(u, constellation)
    return DetectionResult(symbols, raw, raw != u, objective(y, channel, symbols))


@dataclass(frozen=True, eq=False)
class LraContext:
    transform: np.ndarray
    q: np.ndarray
    r: np.ndarray
    reduced: Basis


def lra_prepare(channel, params: ReductionParams | None = None, method: str = "lll") -> LraContext:
    h = embed_real(channel).matrix
    red, _ = reduce_basis(Basis.from_columns(h), method, params)
    q, r = _qr(red.matrix)
    return LraContext(red.transform, q, r, red)


def detect_lra_sic(
    y,
    channel,
    constellation: Constellation,
    params: ReductionParams | None = None,
    method: str = "lll",
    context: LraContext | None = None,
) -> DetectionResult:
    """Reduce, run unconstrained nearest-plane in reduced coordinates, map back, clip."""
    ctx = context or lra_prepare(channel, params, method)
    _, yp = lattice_system(y, channel, constellation)
    zhat, _ = _sic_layers(ctx.q.T @ yp, ctx.r)
    u = ctx.transform @ zhat
    return _result(y, channel, constellation, u)


# --------------------------------------------------------------------------
# registry used by experiments and the CLI

DETECTORS = ("ml", "sphere", "zf", "mmse", "sic", "lra-lll-sic", "lra-bkz-sic", "lra-kz-sic")


def prepare_detector(
    name: str, channel, constellation: Constellation, params: ReductionParams | None = None
) -> Callable[[np.ndarray, float], DetectionResult]:
    """Per-channel preprocessing; returns ``detect(y, sigma)``."""
    b = np.asarray(channel, dtype=complex)
    if name == "ml":
        return lambda y, sigma: detect_ml_exhaustive(y, b, constellation)
    if name == "sphere":
        return lambda y, sigma: detect_ml_sphere(y, b, constellation)
    if name == "zf":
        w = zf_filter(b)
        return lambda y, sigma: _linear(y, b, constellation, w)
    if name == "mmse":
        return lambda y, sigma: detect_mmse(y, b, constellation, sigma)
    if name == "sic":
        qr = _qr(embed_real(b).matrix)
        return lambda y, sigma: detect_sic(y, b, constellation, qr)
    if name.startswith("lra-") and name.endswith("-sic"):
        method = name[4:-4]
        ctx = lra_prepare(b, params, method)
        return lambda y, sigma: detect_lra_sic(y, b, constellation, context=ctx)
    raise ValueError(f"unknown detector {name!r}; choose from {DETECTORS}")
