"""Hermite constants and the BKZ/SIC proximity-factor bounds."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .lattice import Basis, compute_gso
from .reduction import MAX_ENUM_RANK, successive_minima

_DPS = 50

# gamma_beta ** beta, known exactly
HERMITE_POWERS = {
    1: Fraction(1),
    2: Fraction(4, 3),
    3: Fraction(2),
    4: Fraction(4),
    5: Fraction(8),
    6: Fraction(64, 3),
    7: Fraction(64),
    8: Fraction(256),
    24: Fraction(4) ** 24,
}


@dataclass(frozen=True)
class HermiteValue:
    beta: int
    value: float
    exact: bool
    power_form: Fraction | None

    @property
    def exactness(self) -> str:
        return "exact" if self.exact else "upper-bound"


@dataclass(frozen=True)
class ProximityBound:
    m: int
    beta: int
    value: float
    per_index: tuple[float, ...]
    hermite: HermiteValue
    degenerate: bool = False


def _gamma_power(beta: int, exponent) -> mpmath.mpf:
    """gamma_beta ** exponent in high precision."""
    with mpmath.workdps(_DPS):
        power = HERMITE_POWERS.get(beta)
        if power is not None:
            base = mpmath.mpf(power.numerator) / power.denominator
            return base ** (mpmath.mpf(exponent) / beta)
        return _blichfeldt(beta) ** mpmath.mpf(exponent)


def _blichfeldt(beta: int) -> mpmath.mpf:
    with mpmath.workdps(_DPS):
        return 2 / mpmath.pi * mpmath.gamma(2 + mpmath.mpf(beta) / 2) ** (mpmath.mpf(2) / beta)


def hermite_constant(beta: int) -> HermiteValue:
    """Exact gamma_beta for beta in 1..8 and 24, Blichfeldt's upper bound otherwise."""
    if beta < 1:
        raise ValueError(f"beta must be >= 1, got {beta}")
    power = HERMITE_POWERS.get(beta)
    if power is not None:
        return HermiteValue(beta, float(_gamma_power(beta, 1)), True, power)
    return HermiteValue(beta, float(_blichfeldt(beta)), False, None)


def _check_block(m: int, beta: int, allow_degenerate: bool = True):
    if m < 1:
        raise ValueError(f"rank must be >= 1, got {m}")
    if m == 1 and allow_degenerate:
        return
    if not 2 <= beta <= m:
        raise ValueError(f"block size must satisfy 2 <= beta <= m={m}, got {beta}")


def _per_index(m: int, beta: int, i: int) -> mpmath.mpf:
    with mpmath.workdps(_DPS):
        e = mpmath.mpf(2 * (m + i - 2)) / (beta - 1)
        return _gamma_power(beta, e) * mpmath.mpf(i + 3) / 4


def proximity_bound_sic(m: int, beta: int) -> ProximityBound:
    """gamma_beta^(4(m-1)/(beta-1)) * (m+3)/4 plus the per-index chain.

    m=1 is accepted as a degenerate case with bound 1 (any beta).
    """
    _check_block(m, beta)
    if m == 1:
        h = hermite_constant(max(beta, 1))
        return ProximityBound(1, beta, 1.0, (1.0,), h, degenerate=True)
    with mpmath.workdps(_DPS):
        value = _gamma_power(beta, mpmath.mpf(4 * (m - 1)) / (beta - 1)) * mpmath.mpf(m + 3) / 4
        per = tuple(float(_per_index(m, beta, i)) for i in range(1, m + 1))
    return ProximityBound(m, beta, float(value), per, hermite_constant(beta))


def schnorr_upper(i: int, m: int, beta: int) -> float:
    """gamma_beta^(2(m-1)/(beta-1)) * (i+3)/4, bounding |b_i|^2 / lambda_i^2."""
    _check_index(i, m, beta)
    if m == 1:
        return (i + 3) / 4
    with mpmath.workdps(_DPS):
        return float(_gamma_power(beta, mpmath.mpf(2 * (m - 1)) / (beta - 1)) * mpmath.mpf(i + 3) / 4)


def schnorr_lower(i: int, m: int, beta: int) -> float:
    """gamma_beta^(-2(i-1)/(beta-1)), bounding |b_i*|^2 / lambda_i^2 from below."""
    _check_index(i, m, beta)
    if m == 1:
        return 1.0
    with mpmath.workdps(_DPS):
        return float(_gamma_power(beta, -mpmath.mpf(2 * (i - 1)) / (beta - 1)))


def _check_index(i, m, beta):
    _check_block(m, beta)
    if not 1 <= i <= m:
        raise ValueError(f"index must satisfy 1 <= i <= m={m}, got {i}")


@dataclass(frozen=True)
class SchnorrIndex:
    i: int
    upper_ratio: float
    upper_bound: float
    lower_ratio: float
    lower_bound: float

    @property
    def upper_ok(self) -> bool:
        return self.upper_ratio <= self.upper_bound * (1 + 1e-9)

    @property
    def lower_ok(self) -> bool:
        return self.lower_ratio >= self.lower_bound * (1 - 1e-9)

    @property
    def upper_margin(self) -> float:
        return self.upper_bound - self.upper_ratio

    @property
    def lower_margin(self) -> float:
        return self.lower_ratio - self.lower_bound


@dataclass(frozen=True)
class SchnorrReport:
    beta: int
    minima_sq: tuple[float, ...]
    entries: tuple[SchnorrIndex, ...]

    @property
    def violations(self) -> list[tuple[int, str]]:
        out = []
        for e in self.entries:
            if not e.upper_ok:
                out.append((e.i, "upper"))
            if not e.lower_ok:
                out.append((e.i, "lower"))
        return out

    @property
    def ok(self) -> bool:
        return not self.violations


def check_schnorr(basis: Basis, beta: int, max_rank: int = MAX_ENUM_RANK) -> SchnorrReport:
    """Evaluate both cited Schnorr inequalities index by index.

    Violations are reported, never raised.
    """
    m = basis.rank
    lam = successive_minima(basis, m, max_rank).norms_sq
    g = compute_gso(basis)
    lens = np.einsum("ij,ij->i", basis.vectors, basis.vectors)
    entries = []
    for i in range(1, m + 1):
        entries.append(
            SchnorrIndex(
                i,
                float(lens[i - 1] / lam[i - 1]),
                schnorr_upper(i, m, beta),
                float(g.norms_sq[i - 1] / lam[i - 1]),
                schnorr_lower(i, m, beta),
            )
        )
    return SchnorrReport(beta, lam, tuple(entries))


BOUND_COLUMNS = ("m", "beta", "gamma_beta", "exactness", "bound", "per_index_json")


def bound_rows(pairs):
    for m, beta in pairs:
        pb = proximity_bound_sic(m, beta)
        yield {
            "m": m,
            "beta": beta,
            "gamma_beta": repr(pb.hermite.value),
            "exactness": "degenerate" if pb.degenerate else pb.hermite.exactness,
            "bound": repr(pb.value),
            "per_index_json": json.dumps(list(pb.per_index)),
        }


def bound_table_csv(pairs) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=BOUND_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(bound_rows(pairs))
    return buf.getvalue()
