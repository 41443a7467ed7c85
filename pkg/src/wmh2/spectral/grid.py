"""Periodic space-time grids and the field containers that live on them."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

SPATIAL_AXES = (-3, -2, -1)


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


@dataclass(frozen=True)
class GridSpec:
    """Discretisation of the box ``[0, L)^3`` times a window of ``t_samples`` slices."""

    n: int
    length: float = 2 * math.pi
    t_samples: int = 1
    dt: float = 1.0
    time_periodic: bool = False

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 8 or not _is_pow2(int(self.n)):
            raise ValueError(f"n must be a power of two >= 8, got {self.n!r}")
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length!r}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if int(self.t_samples) < 1:
            raise ValueError(f"t_samples must be >= 1, got {self.t_samples!r}")

    @property
    def h(self) -> float:
        return self.length / self.n

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n)

    @property
    def st_shape(self) -> tuple[int, int, int, int]:
        return (self.t_samples, self.n, self.n, self.n)

    @property
    def volume(self) -> float:
        return self.length ** 3

    @property
    def cell(self) -> float:
        return self.h ** 3

    @property
    def window(self) -> float:
        """Length of the recorded time window (the period for periodic grids)."""
        return self.t_samples * self.dt

    @property
    def modes(self) -> "SpatialModes":
        return spatial_modes(self.n, float(self.length))

    def coords(self):
        x = np.arange(self.n) * self.h
        return x[:, None, None], x[None, :, None], x[None, None, :]

    def times(self) -> np.ndarray:
        return np.arange(self.t_samples) * self.dt

    def time_freqs(self) -> np.ndarray:
        """Angular time frequencies, shaped to broadcast against ``(t, i, j, k)``."""
        tau = 2 * math.pi * sfft.fftfreq(self.t_samples, self.dt)
        return tau[:, None, None, None]

    def time_freqs_odd(self) -> np.ndarray:
        """Time frequencies with the Nyquist slice zeroed (for odd symbols)."""
        tau = self.time_freqs().copy()
        if self.t_samples % 2 == 0:
            tau[self.t_samples // 2] = 0.0
        return tau

    def k_range(self) -> tuple[int, int]:
        """Dyadic bands resolvable on this grid, shifted by the box scale."""
        shift = int(round(math.log2(2 * math.pi / self.length)))
        e = int(round(math.log2(self.n)))
        return 2 - e + shift, e - 2 + shift

    def l_range(self) -> tuple[int, int]:
        return 0, int(math.log2(self.n)) // 2

    def with_time(self, t_samples: int, dt: float, time_periodic: bool) -> "GridSpec":
        return replace(self, t_samples=int(t_samples), dt=float(dt), time_periodic=time_periodic)

    def spatial(self) -> "GridSpec":
        return replace(self, t_samples=1, time_periodic=False)


class SpatialModes:
    """Wavenumber tables for an ``n``-point box of side ``length``.

    ``k`` holds the plain lattice, ``kd`` the same with the Nyquist plane zeroed,
    which is what odd symbols (first derivatives, Riesz transforms) use so that
    real fields stay real.
    """

    def __init__(self, n: int, length: float):
        m = sfft.fftfreq(n, 1.0 / n)
        k1 = 2 * math.pi * m / length
        kd1 = k1.copy()
        kd1[n // 2] = 0.0
        self.n = n
        self.length = length
        self.k = (k1[:, None, None], k1[None, :, None], k1[None, None, :])
        self.kd = (kd1[:, None, None], kd1[None, :, None], kd1[None, None, :])
        self.k2 = self.k[0] ** 2 + self.k[1] ** 2 + self.k[2] ** 2
        self.kd2 = self.kd[0] ** 2 + self.kd[1] ** 2 + self.kd[2] ** 2
        self.kmag = np.sqrt(self.k2)
        inv = np.zeros_like(self.kmag)
        np.divide(1.0, self.kmag, out=inv, where=self.kmag > 0)
        self.kmag_inv = inv
        for a in (*self.k, *self.kd, self.k2, self.kd2, self.kmag, self.kmag_inv):
            a.setflags(write=False)

    @property
    def kmin(self) -> float:
        return 2 * math.pi / self.length


@lru_cache(maxsize=16)
def spatial_modes(n: int, length: float) -> SpatialModes:
    return SpatialModes(n, length)


def fft3(a: np.ndarray) -> np.ndarray:
    return sfft.fftn(a, axes=SPATIAL_AXES)


def ifft3(a: np.ndarray) -> np.ndarray:
    return sfft.ifftn(a, axes=SPATIAL_AXES)


def fft4(a: np.ndarray) -> np.ndarray:
    return sfft.fftn(a, axes=(-4, -3, -2, -1))


def ifft4(a: np.ndarray) -> np.ndarray:
    return sfft.ifftn(a, axes=(-4, -3, -2, -1))


@dataclass(frozen=True, eq=False)
class ScalarField3:
    """Samples of a function on the spatial lattice."""

    data: np.ndarray
    grid: GridSpec
    real: bool = False

    def __post_init__(self):
        if self.data.shape != self.grid.shape:
            raise ValueError(f"data shape {self.data.shape} does not match grid {self.grid.shape}")

    def with_data(self, data: np.ndarray) -> "ScalarField3":
        return ScalarField3(data, self.grid, self.real)


@dataclass(frozen=True, eq=False)
class SpacetimeField:
    """Samples on the space-time lattice, indexed ``(t, i, j, k)``.

    ``tapered`` records that a window taper has been applied, which together with
    ``grid.time_periodic`` decides whether modulation projections are legal.
    """

    data: np.ndarray
    grid: GridSpec
    tapered: bool = False

    def __post_init__(self):
        if self.data.shape != self.grid.st_shape:
            raise ValueError(f"data shape {self.data.shape} does not match grid {self.grid.st_shape}")

    @property
    def time_periodic(self) -> bool:
        return self.grid.time_periodic

    @property
    def modulation_ready(self) -> bool:
        return self.grid.time_periodic or self.tapered

    def with_data(self, data: np.ndarray, tapered: bool | None = None) -> "SpacetimeField":
        return SpacetimeField(data, self.grid, self.tapered if tapered is None else tapered)

    def slice(self, i: int) -> ScalarField3:
        return ScalarField3(self.data[i], self.grid.spatial())


class ContractError(ValueError):
    """Raised when an operation is used outside its stated preconditions."""


def unpack(f, grid: GridSpec | None = None):
    """Return ``(data, grid, rewrap)`` for a field or a bare array plus grid."""
    if isinstance(f, (ScalarField3, SpacetimeField)):
        return f.data, f.grid, f.with_data
    if grid is None:
        raise TypeError("bare arrays need an explicit grid")
    return np.asarray(f), grid, lambda d: d
