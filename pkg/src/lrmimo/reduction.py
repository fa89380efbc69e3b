"""LLL, BKZ and KZ reduction on top of exact shortest-vector enumeration."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import Basis, _gso_arrays, _reduce_against

DEFAULT_DELTA = 0.99
DEFAULT_MAX_TOURS = 32
# Enumeration refuses lattices of larger rank.
MAX_ENUM_RANK = 12
# BKZ inserts only on a relative improvement larger than this.
INSERT_EPS = 1e-9
# Norms within this relative distance count as ties in enumeration.
TIE_EPS = 1e-9


class RankGuardError(ValueError):
    def __init__(self, rank: int, cap: int):
        self.rank, self.cap = rank, cap
        super().__init__(f"rank {rank} exceeds the enumeration cap of {cap}")


@dataclass(frozen=True)
class ReductionParams:
    delta: float = DEFAULT_DELTA
    beta: int = 2
    max_tours: int = DEFAULT_MAX_TOURS

    def __post_init__(self):
        if not 0.25 < self.delta <= 1.0:
            raise ValueError(f"delta must lie in (1/4, 1], got {self.delta}")
        if self.beta < 2:
            raise ValueError(f"beta must be >= 2, got {self.beta}")
        if self.max_tours < 1:
            raise ValueError(f"max_tours must be positive, got {self.max_tours}")


@dataclass(frozen=True)
class SvpResult:
    coeffs: tuple[int, ...]
    norm_sq: float
    vector: np.ndarray


@dataclass(frozen=True)
class SuccessiveMinima:
    norms_sq: tuple[float, ...]
    coeffs: tuple[tuple[int, ...], ...]
    vectors: np.ndarray


@dataclass(frozen=True)
class ReductionStats:
    tours: int = 0
    insertions: int = 0
    swaps: int = 0


# --------------------------------------------------------------------------
# enumeration


def _sign_normalized(x) -> tuple[int, ...]:
    for v in x:
        if v:
            return tuple(x) if v > 0 else tuple(-t for t in x)
    return tuple(x)


def _enumerate(mu, bn, radius, visit):
    """Schnorr-Euchner enumeration of the lattice with GSO data ``(mu, bn)``.

    Visits every nonzero vector with squared length ``<= radius`` exactly
    once up to sign (the last nonzero coefficient is positive).
    ``visit(x, length)`` returns the radius to use from then on.
    """
    n = len(bn)
    x = [0] * n
    r = [radius]

    def rec(k, partial, top_zero):
        if top_zero:
            c, v, step = 0.0, 0, 0
        else:
            c = 0.0
            for j in range(k + 1, n):
                if x[j]:
                    c -= x[j] * mu[j][k]
            v0 = math.floor(c + 0.5)
            s = 1 if c >= v0 else -1
            v, step = v0, 0
        bk = bn[k]
        while True:
            d = v - c
            length = partial + d * d * bk
            if length > r[0]:
                break
            x[k] = v
            if k == 0:
                if not (top_zero and v == 0):
                    r[0] = visit(x, length)
            else:
                rec(k - 1, length, top_zero and v == 0)
            if top_zero:
                v += 1
            else:
                step += 1
                v = v0 + s * ((step + 1) // 2) if step % 2 else v0 - s * (step // 2)
        x[k] = 0

    rec(n - 1, 0.0, True)


def _shortest(mu, bn, radius):
    """Shortest vector (by GSO length) with deterministic tie-breaking.

    Returns ``(coeffs, length)`` or ``None`` if nothing lies within radius.
    """
    best = [None, math.inf]

    def visit(x, length):
        key = _sign_normalized(x)
        if best[0] is None or length < best[1] * (1 - TIE_EPS):
            best[0], best[1] = key, length
        elif length <= best[1] * (1 + TIE_EPS) and key < best[0]:
            best[0], best[1] = key, length
        return min(radius, best[1] * (1 + TIE_EPS))

    _enumerate(mu, bn, radius, visit)
    return None if best[0] is None else (best[0], best[1])


def _check_rank(basis: Basis, max_rank: int):
    if basis.rank > max_rank:
        raise RankGuardError(basis.rank, max_rank)


def svp_enumerate(basis: Basis, max_rank: int = MAX_ENUM_RANK) -> SvpResult:
    """Exact shortest nonzero vector of the lattice.

    Ties (relative ``TIE_EPS``) go to the lexicographically smallest
    coefficient vector whose first nonzero entry is positive.
    """
    _check_rank(basis, max_rank)
    v = np.asarray(basis.vectors, dtype=float)
    _, mu, bn = _gso_arrays(v)
    radius = float(min(np.einsum("ij,ij->i", v, v))) * (1 + 2 * TIE_EPS)
    best = [math.inf]
    cands: list[tuple[float, tuple[int, ...]]] = []

    def visit(x, length):
        key = _sign_normalized(x)
        p = np.asarray(key, dtype=float) @ v
        true = float(p @ p)
        cands.append((true, key))
        best[0] = min(best[0], true)
        return min(radius, best[0] * (1 + 2 * TIE_EPS))

    _enumerate(mu.tolist(), bn.tolist(), radius, visit)
    norm_sq, coeffs = canonical_shortest(cands)
    return SvpResult(coeffs, norm_sq, np.asarray(coeffs, dtype=float) @ v)


def canonical_shortest(cands):
    """(norm_sq, coeffs): smallest key among candidates within TIE_EPS of the minimum."""
    lo = min(t for t, _ in cands)
    return min((k, t) for t, k in cands if t <= lo * (1 + TIE_EPS))[::-1]


def enumerate_short(basis: Basis, radius: float, max_rank: int = MAX_ENUM_RANK):
    """All nonzero lattice vectors (up to sign) with squared norm <= radius.

    Returns a list of ``(norm_sq, coeffs)`` sorted by norm then coefficients.
    """
    _check_rank(basis, max_rank)
    v = np.asarray(basis.vectors, dtype=float)
    _, mu, bn = _gso_arrays(v)
    found = []

    def visit(x, length):
        found.append(_sign_normalized(x))
        return radius * (1 + 2 * TIE_EPS)

    _enumerate(mu.tolist(), bn.tolist(), radius * (1 + 2 * TIE_EPS), visit)
    if not found:
        return []
    pts = np.asarray(found, dtype=float) @ v
    norms = np.einsum("ij,ij->i", pts, pts)
    out = [(float(n), c) for n, c in zip(norms, found) if n <= radius * (1 + TIE_EPS)]
    out.sort()
    return out


def successive_minima(basis: Basis, k: int | None = None, max_rank: int = MAX_ENUM_RANK) -> SuccessiveMinima:
    """Squared successive minima lambda_1^2 <= ... <= lambda_k^2.

    The search radius is the k-th smallest squared length of an LLL-reduced
    basis of the same lattice, which upper-bounds lambda_k^2.  Greedy
    selection of independent vectors in sorted order is exact.
    """
    _check_rank(basis, max_rank)
    m = basis.rank
    k = m if k is None else k
    if not 1 <= k <= m:
        raise ValueError(f"k must lie in [1, {m}], got {k}")
    red = lll_reduce(basis)
    lens = np.sort(np.einsum("ij,ij->i", red.vectors, red.vectors))
    radius = float(lens[k - 1])
    echelon, pivots = [], []
    norms, coeffs = [], []
    for norm, c in enumerate_short(red, radius, max_rank):
        if _reduce_against(echelon, pivots, c) is not None:
            norms.append(norm)
            coeffs.append(c)
            if len(norms) == k:
                break
    vecs = np.asarray(coeffs, dtype=float) @ red.vectors
    # express the realizing vectors in the caller's basis
    local = np.rint(np.linalg.solve(basis.vectors @ basis.vectors.T, basis.vectors @ vecs.T)).astype(np.int64).T
    return SuccessiveMinima(tuple(norms), tuple(tuple(int(t) for t in row) for row in local), vecs)


# --------------------------------------------------------------------------
# reduction engine


class _Work:
    """Mutable reduction state: rows, integer row transform and GSO."""

    def __init__(self, basis: Basis):
        self.src = basis
        self.b = np.array(basis.vectors, dtype=float)
        self.m = basis.rank
        self.u = np.eye(self.m, dtype=np.int64)
        self.swaps = 0
        self.refresh()

    def refresh(self):
        _, mu, bn = _gso_arrays(self.b)
        self.mu = mu.tolist()
        self.bn = bn.tolist()

    def result(self) -> Basis:
        return self.src.derive(self.b, self.u)

    def reduce_pair(self, k, l):
        mu = self.mu
        q = mu[k][l]
        if abs(q) <= 0.5:
            return
        q = int(math.copysign(math.floor(abs(q) + 0.5), q))
        self.b[k] -= q * self.b[l]
        self.u[k] -= q * self.u[l]
        rk, rl = mu[k], mu[l]
        for j in range(l):
            rk[j] -= q * rl[j]
        rk[l] -= q

    def swap(self, k):
        mu, bn = self.mu, self.bn
        self.b[[k - 1, k]] = self.b[[k, k - 1]]
        self.u[[k - 1, k]] = self.u[[k, k - 1]]
        for j in range(k - 1):
            mu[k][j], mu[k - 1][j] = mu[k - 1][j], mu[k][j]
        m_ = mu[k][k - 1]
        big = bn[k] + m_ * m_ * bn[k - 1]
        mu[k][k - 1] = m_ * bn[k - 1] / big
        bn[k] = bn[k - 1] * bn[k] / big
        bn[k - 1] = big
        nm = mu[k][k - 1]
        for i in range(k + 1, self.m):
            t = mu[i][k]
            mu[i][k] = mu[i][k - 1] - m_ * t
            mu[i][k - 1] = t + nm * mu[i][k]
        self.swaps += 1

    def _lll_pass(self, delta):
        k = 1
        mu, bn = self.mu, self.bn
        while k < self.m:
            self.reduce_pair(k, k - 1)
            if bn[k] < (delta - mu[k][k - 1] ** 2) * bn[k - 1]:
                self.swap(k)
                k = max(1, k - 1)
            else:
                for l in range(k - 2, -1, -1):
                    self.reduce_pair(k, l)
                k += 1

    def is_lll(self, delta) -> bool:
        mu, bn = self.mu, self.bn
        for k in range(1, self.m):
            if any(abs(mu[k][j]) > 0.5 + 1e-12 for j in range(k)):
                return False
            if bn[k] + mu[k][k - 1] ** 2 * bn[k - 1] < delta * bn[k - 1] * (1 - 1e-12):
                return False
        return True

    def lll(self, delta):
        # incremental GSO drifts; confirm on a fresh decomposition
        for _ in range(20):
            self._lll_pass(delta)
            self.refresh()
            if self.is_lll(delta):
                return
        raise RuntimeError("LLL failed to stabilize numerically")

    def insert(self, k, coeffs):
        """Make ``sum c_j b_{k+j}`` the k-th row via exact unimodular steps."""
        c = [int(t) for t in coeffs]
        for j in range(len(c) - 1, 0, -1):
            a, bb = c[j - 1], c[j]
            if bb == 0:
                continue
            g, x, y = _xgcd(a, bb)
            i0, i1 = k + j - 1, k + j
            r0, r1 = self.b[i0].copy(), self.b[i1].copy()
            u0, u1 = self.u[i0].copy(), self.u[i1].copy()
            p, q = a // g, bb // g
            self.b[i0] = p * r0 + q * r1
            self.b[i1] = -y * r0 + x * r1
            self.u[i0] = p * u0 + q * u1
            self.u[i1] = -y * u0 + x * u1
            c[j - 1], c[j] = g, 0
        if c[0] != 1:
            raise ArithmeticError(f"non-primitive coefficient vector {coeffs}")


def _xgcd(a, b):
    """``g, x, y`` with ``a x + b y = g = gcd(a, b) > 0``."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def lll_reduce(basis: Basis, params: ReductionParams | None = None) -> Basis:
    params = params or ReductionParams()
    w = _Work(basis)
    w.lll(params.delta)
    return w.result()


def block_svp(mu, bn, start, stop):
    """Shortest vector of the projected block ``[start, stop)`` from GSO data."""
    sub_mu = [row[start:stop] for row in mu[start:stop]]
    return _shortest(sub_mu, bn[start:stop], bn[start] * (1 + TIE_EPS))


def bkz_with_stats(basis: Basis, params: ReductionParams) -> tuple[Basis, ReductionStats]:
    m = basis.rank
    if m >= 2 and not 2 <= params.beta <= m:
        raise ValueError(f"block size must satisfy 2 <= beta <= m={m}, got {params.beta}")
    if params.beta > MAX_ENUM_RANK:
        raise RankGuardError(params.beta, MAX_ENUM_RANK)
    w = _Work(basis)
    w.lll(params.delta)
    tours = insertions = 0
    for _ in range(params.max_tours):
        tours += 1
        changed = False
        for k in range(m - 1):
            stop = min(k + params.beta, m)
            found = block_svp(w.mu, w.bn, k, stop)
            if found is None:
                continue
            coeffs, length = found
            if length < w.bn[k] * (1 - INSERT_EPS):
                w.insert(k, coeffs)
                w.refresh()
                w.lll(params.delta)
                insertions += 1
                changed = True
        if not changed:
            break
    return w.result(), ReductionStats(tours, insertions, w.swaps)


def bkz_reduce(basis: Basis, params: ReductionParams) -> Basis:
    return bkz_with_stats(basis, params)[0]


def kz_reduce(basis: Basis, params: ReductionParams | None = None) -> Basis:
    params = params or ReductionParams()
    if basis.rank < 2:
        return lll_reduce(basis, params)
    return bkz_reduce(basis, ReductionParams(params.delta, basis.rank, params.max_tours))


METHODS = ("lll", "bkz", "kz")


def reduce_basis(basis: Basis, method: str, params: ReductionParams | None = None) -> tuple[Basis, ReductionStats]:
    params = params or ReductionParams()
    method = method.lower()
    if method == "lll":
        w = _Work(basis)
        w.lll(params.delta)
        return w.result(), ReductionStats(0, 0, w.swaps)
    if method == "bkz":
        return bkz_with_stats(basis, params)
    if method == "kz":
        if basis.rank < 2:
            return reduce_basis(basis, "lll", params)
        return bkz_with_stats(basis, ReductionParams(params.delta, basis.rank, params.max_tours))
    raise ValueError(f"unknown reduction method {method!r}; choose from {METHODS}")
