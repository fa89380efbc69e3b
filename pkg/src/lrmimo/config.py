"""Experiment configuration: plain ``key=value`` files merged with CLI flags."""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .detectors import DETECTORS
from .experiments import ENSEMBLES, BerConfig
from .reduction import DEFAULT_DELTA, DEFAULT_MAX_TOURS


class ConfigError(ValueError):
    def __init__(self, field: str, msg: str):
        self.field = field
        super().__init__(msg if msg.startswith(field) else f"{field}: {msg}")


def _ints(s) -> tuple[int, ...]:
    return tuple(_int_items(s))


def _int_items(s):
    for part in str(s).split(","):
        part = part.strip()
        if ":" in part:
            a, b = part.split(":")
            yield from range(int(a), int(b) + 1)
        elif part:
            yield int(part)


def _floats(s) -> tuple[float, ...]:
    return tuple(float(p) for p in str(s).split(",") if p.strip())


def _strs(s) -> tuple[str, ...]:
    return tuple(p.strip() for p in str(s).split(",") if p.strip())


_PARSERS = {
    "m": _ints,
    "beta": _ints,
    "ensemble": _strs,
    "trials": int,
    "master_seed": int,
    "delta": float,
    "max_tours": int,
    "workers": int,
    "n_tx": int,
    "n_rx": int,
    "order": int,
    "detectors": _strs,
    "snr_db": _floats,
    "method": str,
    "output": str,
    "archive_dir": str,
}


@dataclass(frozen=True)
class ExperimentConfig:
    master_seed: int | None = None
    m: tuple[int, ...] = (4,)
    beta: tuple[int, ...] = (2,)
    ensemble: tuple[str, ...] = ("gaussian",)
    trials: int = 10_000
    delta: float = DEFAULT_DELTA
    max_tours: int = DEFAULT_MAX_TOURS
    workers: int = 1
    n_tx: int = 4
    n_rx: int = 4
    order: int = 4
    detectors: tuple[str, ...] = ("ml", "sic", "lra-lll-sic", "lra-bkz-sic")
    snr_db: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0)
    method: str = "bkz"
    output: str | None = None
    archive_dir: str | None = None

    @classmethod
    def build(cls, file_values: dict[str, str] | None = None, flags: dict | None = None) -> "ExperimentConfig":
        """Merge file values and flags (flags win); parse every field with a named error."""
        raw: dict = {}
        known = {f.name for f in fields(cls)}
        for src in (file_values or {}, {k: v for k, v in (flags or {}).items() if v is not None}):
            for k, v in src.items():
                k = k.replace("-", "_")
                if k not in known:
                    raise ConfigError(k, "unknown setting")
                raw[k] = v
        kw = {}
        for k, v in raw.items():
            if isinstance(v, str) or k not in ("m", "beta", "ensemble", "detectors", "snr_db"):
                try:
                    kw[k] = _PARSERS[k](v) if isinstance(v, str) else v
                except ValueError as e:
                    raise ConfigError(k, f"cannot parse {v!r} ({e})") from None
            else:
                kw[k] = tuple(v)
        return cls(**kw)

    def require_seed(self):
        if self.master_seed is None:
            raise ConfigError("master_seed", "master_seed required")

    def validate_common(self):
        self.require_seed()
        if self.trials < 1:
            raise ConfigError("trials", f"must be >= 1, got {self.trials}")
        if not 0.25 < self.delta <= 1:
            raise ConfigError("delta", f"must lie in (1/4, 1], got {self.delta}")
        if self.max_tours < 1:
            raise ConfigError("max_tours", f"must be >= 1, got {self.max_tours}")
        if self.workers < 1:
            raise ConfigError("workers", f"must be >= 1, got {self.workers}")

    def validate_proximity(self):
        self.validate_common()
        if not self.m:
            raise ConfigError("m", "empty")
        for m in self.m:
            if m < 2:
                raise ConfigError("m", f"must be >= 2, got {m}")
        bad = [e for e in self.ensemble if e not in ENSEMBLES]
        if bad or not self.ensemble:
            raise ConfigError("ensemble", f"unknown {bad}; choose from {ENSEMBLES}")
        if not self.beta or any(b < 2 for b in self.beta):
            raise ConfigError("beta", f"every block size must be >= 2, got {self.beta}")
        return self

    def proximity_pairs(self) -> list[tuple[int, int]]:
        """(m, beta) pairs with beta <= m; ranks above the guard are kept so the caller refuses them."""
        return [(m, b) for m in self.m for b in self.beta if b <= m]

    def ber_config(self) -> BerConfig:
        self.validate_common()
        if len(self.beta) != 1:
            raise ConfigError("beta", f"ber takes a single block size, got {self.beta}")
        bad = [d for d in self.detectors if d not in DETECTORS]
        if bad:
            raise ConfigError("detectors", f"unknown {bad}; choose from {DETECTORS}")
        cfg = BerConfig(
            master_seed=self.master_seed, n_tx=self.n_tx, n_rx=self.n_rx, order=self.order,
            detectors=self.detectors, snr_db=self.snr_db, trials=self.trials, delta=self.delta,
            beta=self.beta[0], max_tours=self.max_tours, workers=self.workers,
        )
        try:
            return cfg.validate()
        except ValueError as e:
            field = str(e).split(":")[0].split()[0]
            raise ConfigError(field, str(e).split(": ", 1)[-1]) from None

    def summary(self, command: str) -> dict:
        keys = {
            "proximity": ("m", "beta", "ensemble", "trials", "master_seed", "delta", "max_tours", "workers", "archive_dir"),
            "ber": ("n_tx", "n_rx", "order", "detectors", "snr_db", "trials", "master_seed", "delta", "beta", "max_tours", "workers"),
        }[command]
        out = {}
        for k in keys:
            v = getattr(self, k)
            out[k] = ",".join(str(t) for t in v) if isinstance(v, tuple) else v
        return out


def read_config_file(path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}", f"expected key=value, got {line!r}")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out

