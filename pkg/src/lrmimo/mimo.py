"""MIMO channel model y = B x + noise and its real-valued lattice form.

Convention: B is (n_rx x n_tx).  Real vectors stack real parts over
imaginary parts, so a complex n-vector maps to ``(Re x, Im x)`` of length 2n.

SNR convention: SNR = n_tx * E_s / sigma^2 per receive antenna, with
sigma^2 the noise variance per complex dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SNR_CONVENTION = "SNR = n_tx*E_s/sigma^2 per receive antenna; sigma^2 per complex dimension"


def make_rng(seed) -> np.random.Generator:
    """Generator from an int, a sequence of ints, a SeedSequence or a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.default_rng(seed)


def trial_streams(master_seed: int, trial_index: int, n: int = 2) -> list[np.random.Generator]:
    """Independent generators for one trial, keyed only by (master_seed, trial_index)."""
    ss = np.random.SeedSequence([int(master_seed), int(trial_index)])
    return [np.random.Generator(np.random.PCG64(c)) for c in ss.spawn(n)]


@dataclass(frozen=True, eq=False)
class ComplexChannel:
    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=complex, ndmin=2)
        if not np.all(np.isfinite(a)):
            raise ValueError("channel has non-finite entries")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    @property
    def n_rx(self) -> int:
        return self.entries.shape[0]

    @property
    def n_tx(self) -> int:
        return self.entries.shape[1]


def sample_channel(n_rx: int, n_tx: int, seed) -> ComplexChannel:
    """i.i.d. CN(0, 1) entries."""
    if n_rx < 1 or n_tx < 1:
        raise ValueError(f"channel dimensions must be >= 1, got {n_rx}x{n_tx}")
    rng = make_rng(seed)
    z = rng.standard_normal((n_rx, n_tx, 2)) * math.sqrt(0.5)
    return ComplexChannel(z[..., 0] + 1j * z[..., 1])


def to_real(x) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    return np.concatenate([x.real, x.imag], axis=0)


def to_complex(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = v.shape[0] // 2
    return v[:n] + 1j * v[n:]


@dataclass(frozen=True, eq=False)
class RealEmbedding:
    matrix: np.ndarray
    n_rx: int
    n_tx: int

    def forward_index(self, k: int, imag: bool = False) -> int:
        """Real coordinate holding the real (or imaginary) part of transmit stream k."""
        return k + self.n_tx * int(imag)

    def backward_index(self, r: int) -> tuple[int, bool]:
        return r % self.n_tx, r >= self.n_tx


def embed_real(channel) -> RealEmbedding:
    """[[Re B, -Im B], [Im B, Re B]]."""
    b = np.asarray(channel, dtype=complex)
    top = np.hstack([b.real, -b.imag])
    bot = np.hstack([b.imag, b.real])
    m = np.vstack([top, bot])
    m.setflags(write=False)
    return RealEmbedding(m, b.shape[0], b.shape[1])


@dataclass(frozen=True, eq=False)
class Constellation:
    """Square QAM; point index = re_level * side + im_level."""

    order: int

    def __post_init__(self):
        if self.order not in (4, 16, 64):
            raise ValueError(f"square QAM order must be 4, 16 or 64, got {self.order}")

    @property
    def side(self) -> int:
        return math.isqrt(self.order)

    @property
    def levels(self) -> np.ndarray:
        s = self.side
        return np.arange(-(s - 1), s, 2, dtype=float)

    @property
    def points(self) -> np.ndarray:
        lv = self.levels
        return (lv[:, None] + 1j * lv[None, :]).ravel()

    @property
    def energy(self) -> float:
        return 2 * (self.order - 1) / 3

    @property
    def bits_per_symbol(self) -> int:
        return int(math.log2(self.order))


def constellation_to_lattice(symbols, constellation: Constellation) -> np.ndarray:
    """Per-axis affine map u = (s + side - 1) / 2 onto {0, ..., side-1}, real-stacked."""
    r = to_real(np.atleast_1d(symbols))
    u = (r + constellation.side - 1) / 2
    ui = np.rint(u)
    if np.any(np.abs(u - ui) > 1e-9) or np.any(ui < 0) or np.any(ui > constellation.side - 1):
        raise ValueError("symbol not in the constellation")
    return ui.astype(np.int64)


def lattice_to_constellation(ints, constellation: Constellation) -> tuple[np.ndarray, np.ndarray]:
    """Inverse map with clipping; returns ``(symbols, clipped_mask)``."""
    u = np.asarray(ints, dtype=np.int64)
    top = constellation.side - 1
    clipped = (u < 0) | (u > top)
    uc = np.clip(u, 0, top)
    return to_complex(2.0 * uc - top), clipped


def symbol_indices(symbols, constellation: Constellation) -> np.ndarray:
    u = constellation_to_lattice(symbols, constellation)
    n = u.shape[0] // 2
    return u[:n] * constellation.side + u[n:]


def random_symbols(n: int, constellation: Constellation, seed) -> np.ndarray:
    rng = make_rng(seed)
    return constellation.points[rng.integers(0, constellation.order, n)]


def add_awgn(y, sigma: float, seed) -> np.ndarray:
    """Add CN(0, sigma^2) noise per complex entry."""
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    y = np.asarray(y, dtype=complex)
    if sigma == 0:
        return y.copy()
    return y + sigma * unit_noise(y.shape[0], seed)


def unit_noise(n: int, seed) -> np.ndarray:
    z = make_rng(seed).standard_normal((n, 2)) * math.sqrt(0.5)
    return z[:, 0] + 1j * z[:, 1]


def snr_to_sigma(snr_db: float, n_tx: int, constellation: Constellation) -> float:
    return math.sqrt(n_tx * constellation.energy / 10 ** (snr_db / 10))


def gray_bits(symbols, constellation: Constellation) -> np.ndarray:
    """Gray-coded bit labels, per axis, flattened."""
    u = constellation_to_lattice(symbols, constellation)
    g = u ^ (u >> 1)
    nb = constellation.bits_per_symbol // 2
    return ((g[:, None] >> np.arange(nb)) & 1).ravel()
