r"""Null-frame resampling.

For a unit vector :math:`\omega` the hyperplanes :math:`t_\omega = c` are
:math:`\{t = \sqrt2 c - x\cdot\omega\}`.  We parametrise each one by the spatial
lattice, so the resampled field is :math:`g(t_\omega, x) = f(\sqrt2 t_\omega - x\cdot\omega, x)`
with surface measure :math:`\sqrt2\,dx`.  Only a 1-d interpolation along ``t`` is
needed (cubic Lagrange, fourth order); ``x`` is taken in ``[0, L)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import _accel
from .grid import ContractError, GridSpec, SpacetimeField

INTERP_ORDER = 4
INTERP_TAG = "cubic-lagrange-t"
SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class NullFrameField:
    data: np.ndarray          # (m, i, j, k)
    omega: tuple[float, float, float]
    offset: int               # sqrt(2) t_omega = (m + offset) dt
    grid: GridSpec
    periodic: bool
    order: int = INTERP_ORDER
    tag: str = INTERP_TAG

    @property
    def t_omega(self) -> np.ndarray:
        return (np.arange(self.data.shape[0]) + self.offset) * self.grid.dt / SQRT2

    def mixed_norm(self, p: float, q: float) -> float:
        """``L^p_{t_omega} L^q_{x_omega}`` with the hyperplane measure ``sqrt(2) dx``."""
        g = self.grid
        flat = self.data.reshape(self.data.shape[0], -1)
        return _accel.mixed_norm(flat, p, q, g.dt / SQRT2, SQRT2 * g.cell)


def _check_omega(omega) -> np.ndarray:
    w = np.asarray(omega, dtype=float).reshape(3)
    if abs(float(np.linalg.norm(w)) - 1.0) > 1e-12:
        raise ContractError(f"omega must be a unit vector, |omega| = {np.linalg.norm(w)!r}")
    return w


def _shift(grid: GridSpec, w: np.ndarray) -> np.ndarray:
    x1, x2, x3 = grid.coords()
    return ((x1 * w[0] + x2 * w[1] + x3 * w[2]) / grid.dt).reshape(-1)


def null_frame_transform(f: SpacetimeField, omega) -> NullFrameField:
    w = _check_omega(omega)
    g = f.grid
    if f.data.ndim != 4:
        raise ContractError("null_frame_transform needs a space-time field")
    b = _shift(g, w)
    nt = g.t_samples
    periodic = g.time_periodic
    if periodic:
        offset, count = 0, nt
    else:
        offset = int(math.floor(b.min())) - 2
        count = int(math.ceil(nt - 1 + b.max())) + 3 - offset
    a = np.arange(count, dtype=float) + offset
    src = f.data.reshape(nt, -1)
    out = _accel.null_frame_gather(src, a, b, periodic)
    return NullFrameField(out.reshape((count,) + g.shape), tuple(map(float, w)), offset, g, periodic)


def null_frame_inverse(nf: NullFrameField) -> SpacetimeField:
    g = nf.grid
    b = -_shift(g, np.asarray(nf.omega))
    a = np.arange(g.t_samples, dtype=float) - nf.offset
    src = nf.data.reshape(nf.data.shape[0], -1)
    out = _accel.null_frame_gather(src, a, b, nf.periodic)
    return SpacetimeField(out.reshape(g.st_shape), g)
