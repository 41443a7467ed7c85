"""Flat ``key = value`` run configuration."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .spectral.grid import ContractError, GridSpec


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    # grid
    n: int = 64
    length: float = 16.0
    t_samples: int = 32
    dt: float = 0.01
    time_periodic: bool = False
    # data and integration
    epsilon: float = 0.01
    bump_radius: float = 2.5
    bump_sharpness: float = 8.0
    bump_offset_scale: float = 1.0
    T: float = 1.0
    stride: int = 10
    c_cfl: float = 0.5
    dealias: bool = True
    # verification
    seed: int = 0
    seeds: int = 5
    verify_n: int = 32
    verify_t_samples: int = 32
    flip_signature: bool = False
    # norms
    sigma: float = 0.1
    mu: float = 0.01
    omega_samples: int = 64
    # scans
    scan_n: int = 32
    scan_length: float = 8 * math.pi
    scan_t_samples: int = 32
    scan_k2: int = 0
    scan_ds: tuple = (0, 1, 2)
    scan_k3s: tuple = (-2, -1, 0)
    scan_seeds: int = 1
    scan_inputs: str = "random"
    bernstein_ns: tuple = (32, 64)
    out: str = "runs"

    def grid(self) -> GridSpec:
        return GridSpec(self.n, self.length, 1, self.dt, False)

    def validate(self) -> "RunConfig":
        try:
            g = self.grid()
            GridSpec(self.verify_n, 2 * math.pi, self.verify_t_samples, 1.0, True)
            GridSpec(self.scan_n, self.scan_length, self.scan_t_samples, 1.0, True)
        except ValueError as e:
            raise ConfigError(str(e)) from e
        if self.epsilon < 0:
            raise ConfigError("epsilon must be >= 0")
        if not (self.sigma > 0 and self.mu > 0):
            raise ConfigError("sigma and mu must be positive")
        if self.T <= 0 or self.stride < 1 or self.seeds < 1 or self.omega_samples < 1:
            raise ConfigError("T, stride, seeds and omega_samples must be positive")
        from .solver import cfl_limit

        lim = cfl_limit(g, self.c_cfl)
        if self.dt > lim * (1 + 1e-12):
            raise ConfigError(f"dt={self.dt:g} exceeds the stability bound {lim:g} (c_cfl={self.c_cfl:g})")
        if self.scan_inputs not in ("random", "packet"):
            raise ConfigError("scan_inputs must be 'random' or 'packet'")
        return self

    def bump(self):
        from .solver import BumpSpec

        base = BumpSpec()
        offs = tuple(tuple(self.bump_offset_scale * c for c in o) for o in base.offsets)
        return BumpSpec(self.bump_radius, self.bump_sharpness, offs, base.weights)

    def horizon(self) -> float:
        """Simulated time: the requested ``T`` capped so the signal stays clear of the periodic images."""
        return min(self.T, self.length / 4 - self.bump().support_radius)

    def replace(self, **kw) -> "RunConfig":
        d = asdict(self)
        d.update(kw)
        return RunConfig(**d)

    def to_text(self) -> str:
        return "".join(f"{f.name} = {_fmt(getattr(self, f.name))}\n" for f in fields(self))

    def write(self, path) -> Path:
        p = Path(path)
        p.write_text(self.to_text())
        return p


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    return str(v)


_TYPES = {f.name: type(f.default) for f in fields(RunConfig)}


def _parse(key: str, raw: str):
    kind = _TYPES[key]
    try:
        if kind is bool:
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind is tuple:
            return tuple(int(x) for x in raw.split(",") if x.strip()) if raw.strip() else ()
        return raw
    except ValueError as e:
        raise ConfigError(f"bad value for {key}: {raw!r}") from e


def parse_config(text: str) -> RunConfig:
    vals = {}
    for i, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {i}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        if k not in _TYPES:
            raise ConfigError(f"line {i}: unknown key {k!r}")
        vals[k] = _parse(k, v)
    try:
        return RunConfig(**vals).validate()
    except ContractError as e:
        raise ConfigError(str(e)) from e


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_config(text)
