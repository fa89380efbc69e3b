"""Lattice bases, Gram-Schmidt orthogonalization and basic basis surgery.

A :class:`Basis` stores its generators as the rows of ``vectors`` (shape
``(m, d)``).  The column view ``basis.matrix`` (shape ``(d, m)``) follows the
usual convention that ``matrix @ coeffs`` is a lattice point.  Every basis
carries the integer unimodular ``transform`` that maps the basis it was
derived from onto the current one: ``matrix == original_matrix @ transform``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

# Relative tolerance for algebraic identities (Pythagoras, basis/transform).
IDENTITY_RTOL = 1e-9
# Orthogonality tolerance, scaled by the product of the vector norms.
ORTHO_TOL = 1e-8
# A Gram-Schmidt vector shorter than this (relative, squared) means dependence.
RANK_TOL = 1e-20


class RankDeficientError(ValueError):
    """Raised when the generators are linearly dependent."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(
            f"basis is rank deficient: vector at index {index} "
            "depends linearly on its predecessors"
        )


class BasisFormatError(ValueError):
    """Parse error in a basis file; ``line`` is 1-based."""

    def __init__(self, line: int, msg: str):
        self.line = line
        super().__init__(f"line {line}: {msg}")


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def exact_det(rows) -> int:
    """Determinant of a square integer matrix (fraction-free Bareiss)."""
    a = [[int(v) for v in row] for row in rows]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


@dataclass(frozen=True, eq=False)
class Basis:
    vectors: np.ndarray
    transform: np.ndarray
    original: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def from_rows(cls, rows) -> "Basis":
        v = np.array(rows, dtype=float, ndmin=2)
        if v.ndim != 2 or v.shape[0] > v.shape[1]:
            raise ValueError(f"need m <= d generators, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("basis has non-finite coordinates")
        m = v.shape[0]
        return cls(_frozen(v), _frozen(np.eye(m, dtype=np.int64)), _frozen(v.copy()))

    @classmethod
    def from_columns(cls, matrix) -> "Basis":
        return cls.from_rows(np.asarray(matrix, dtype=float).T)

    def derive(self, vectors: np.ndarray, local: np.ndarray) -> "Basis":
        """New basis ``local`` applied to this one (rows: ``vectors = local @ self.vectors``)."""
        transform = self.transform @ np.asarray(local, dtype=np.int64).T
        return Basis(_frozen(np.array(vectors, dtype=float)), _frozen(transform), self.original)

    @property
    def rank(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def matrix(self) -> np.ndarray:
        return self.vectors.T

    def point(self, coeffs) -> np.ndarray:
        return np.asarray(coeffs, dtype=float) @ self.vectors

    def gram(self) -> np.ndarray:
        return self.vectors @ self.vectors.T

    def gram_det(self) -> float:
        return float(np.prod(compute_gso(self).norms_sq))

    def transform_det(self) -> int:
        return exact_det(self.transform)

    def consistent(self, rtol: float = IDENTITY_RTOL) -> bool:
        """Check ``vectors == transform^T @ original`` to relative ``rtol``."""
        if self.original is None:
            return True
        rebuilt = self.transform.T.astype(float) @ self.original
        scale = max(1.0, float(np.abs(self.original).max()) * float(np.abs(self.transform).max()))
        return bool(np.allclose(rebuilt, self.vectors, rtol=0.0, atol=rtol * scale))


@dataclass(frozen=True, eq=False)
class GsoDecomposition:
    ortho: np.ndarray
    mu: np.ndarray
    norms_sq: np.ndarray


def _gso_arrays(v: np.ndarray):
    m = v.shape[0]
    ortho = np.empty_like(v)
    mu = np.eye(m)
    norms = np.empty(m)
    for i in range(m):
        w = v[i].copy()
        if i:
            # classical GS with one reorthogonalization pass
            prev = ortho[:i]
            c = (prev @ w) / norms[:i]
            w -= c @ prev
            c2 = (prev @ w) / norms[:i]
            w -= c2 @ prev
            mu[i, :i] = c + c2
        n = float(w @ w)
        if n <= RANK_TOL * max(float(v[i] @ v[i]), np.finfo(float).tiny):
            raise RankDeficientError(i)
        ortho[i] = w
        norms[i] = n
    return ortho, mu, norms


def compute_gso(basis: Basis) -> GsoDecomposition:
    ortho, mu, norms = _gso_arrays(np.asarray(basis.vectors, dtype=float))
    return GsoDecomposition(_frozen(ortho), _frozen(mu), _frozen(norms))


def round_half_away(x):
    """Nearest integer, ties away from zero (scalar or array)."""
    if np.ndim(x) == 0:
        return int(np.sign(x) * np.floor(abs(x) + 0.5))
    x = np.asarray(x, dtype=float)
    return (np.sign(x) * np.floor(np.abs(x) + 0.5)).astype(np.int64)


def size_reduce(basis: Basis) -> Basis:
    v = np.array(basis.vectors, dtype=float)
    _, mu, _ = _gso_arrays(v)
    m = basis.rank
    local = np.eye(m, dtype=np.int64)
    for i in range(1, m):
        for j in range(i - 1, -1, -1):
            if abs(mu[i, j]) > 0.5:
                q = round_half_away(mu[i, j])
                v[i] -= q * v[j]
                local[i] -= q * local[j]
                mu[i, : j + 1] -= q * mu[j, : j + 1]
    return basis.derive(v, local)


def project_block(basis: Basis, start: int, stop: int) -> Basis:
    """Projections of ``b[start:stop]`` orthogonally to ``span(b[:start])``.

    Indices are 0-based and half-open.  The result is a fresh basis of the
    projected lattice (identity transform).
    """
    m = basis.rank
    if not 0 <= start < stop <= m:
        raise IndexError(f"block [{start}, {stop}) out of range for rank {m}")
    g = compute_gso(basis)
    rows = g.mu[start:stop, start:stop] @ g.ortho[start:stop]
    return Basis.from_rows(rows)


def read_basis(path) -> Basis:
    """Read the ``m d`` header + one-generator-per-line text format.

    Lines starting with ``#`` and blank lines are skipped.
    """
    lines = Path(path).read_text().splitlines()
    body = [(n, s.strip()) for n, s in enumerate(lines, 1) if s.strip() and not s.lstrip().startswith("#")]
    if not body:
        raise BasisFormatError(1, "empty basis file")
    n0, head = body[0]
    try:
        m, d = (int(t) for t in head.split())
    except ValueError:
        raise BasisFormatError(n0, f"expected header 'm d', got {head!r}") from None
    if m < 1 or d < m:
        raise BasisFormatError(n0, f"need 1 <= m <= d, got m={m} d={d}")
    rows = []
    for n, s in body[1:]:
        parts = s.split()
        if len(parts) != d:
            raise BasisFormatError(n, f"expected {d} numbers, got {len(parts)}")
        try:
            rows.append([float(t) for t in parts])
        except ValueError:
            raise BasisFormatError(n, f"not a number in {s!r}") from None
    if len(rows) != m:
        last = body[-1][0] if len(body) > 1 else n0
        raise BasisFormatError(last, f"expected {m} generator lines, got {len(rows)}")
    return Basis.from_rows(rows)


def format_basis(basis: Basis, comment: str | None = None) -> str:
    out = []
    if comment:
        out.extend(f"# {c}" for c in comment.splitlines())
    out.append(f"{basis.rank} {basis.dim}")
    for row in basis.vectors:
        out.append(" ".join(f"{float(x):.17g}" for x in row))
    return "\n".join(out) + "\n"


def write_basis(basis: Basis, path, comment: str | None = None) -> None:
    Path(path).write_text(format_basis(basis, comment))


def integer_rank(rows) -> int:
    """Exact rank of an integer matrix."""
    echelon: list[list[Fraction]] = []
    pivots: list[int] = []
    for row in rows:
        _reduce_against(echelon, pivots, row)
    return len(echelon)


def _reduce_against(echelon, pivots, row):
    """Reduce ``row`` against an echelon form; append and return it if independent."""
    r = [Fraction(int(x)) for x in row]
    for e, p in zip(echelon, pivots):
        if r[p]:
            f = r[p] / e[p]
            r = [a - f * b for a, b in zip(r, e)]
    for p, x in enumerate(r):
        if x:
            echelon.append(r)
            pivots.append(p)
            return r
    return None
