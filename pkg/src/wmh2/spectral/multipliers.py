r"""Fourier multipliers on the periodic box.

Every operator here is diagonal in frequency.  Inverse operators send the zero
mode to zero, and odd symbols drop the Nyquist plane so that real input stays
real.  The dyadic bump is the closed-form telescoping family

.. math::  \chi(\lambda) = \frac{g(2-\lambda)}{g(2-\lambda)+g(\lambda-1)}, \qquad
           m_k(\lambda) = \chi(\lambda/2^k) - \chi(\lambda/2^{k-1}),

with :math:`g(t) = e^{-1/t}` for positive ``t``.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from .grid import (
    ContractError,
    GridSpec,
    SpacetimeField,
    fft3,
    fft4,
    ifft3,
    ifft4,
    unpack,
)

BUMP_ID = "chi=g(2-l)/(g(2-l)+g(l-1)),g(t)=exp(-1/t);m_k=chi(l/2^k)-chi(l/2^(k-1))"
NULL_CONE_TOL = 1e-10


def g_exp(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def chi(lam):
    """Smooth step: 1 on ``[0, 1]``, 0 on ``[2, inf)``."""
    lam = np.asarray(lam, dtype=float)
    a = g_exp(2.0 - lam)
    b = g_exp(lam - 1.0)
    return a / (a + b)


def smooth_step(u):
    """0 for ``u <= 0``, 1 for ``u >= 1``; C-infinity in between."""
    u = np.asarray(u, dtype=float)
    a = g_exp(u)
    b = g_exp(1.0 - u)
    return a / (a + b)


def lp_symbol(lam, k: int):
    return chi(lam / 2.0 ** k) - chi(lam / 2.0 ** (k - 1))


def lp_symbol_tilde(lam, k: int):
    # telescopes to chi(lam/2^(k+1)) - chi(lam/2^(k-2))
    return chi(lam / 2.0 ** (k + 1)) - chi(lam / 2.0 ** (k - 2))


def lp_symbol_below(lam, k: int):
    """Symbol of ``P_{<k}``: the sum of ``m_i`` over ``i < k`` including the zero mode."""
    return chi(lam / 2.0 ** (k - 1))


def _check_k(grid: GridSpec, k: int):
    lo, hi = grid.k_range()
    if not lo <= k <= hi:
        raise ValueError(f"band k={k} outside the resolvable range [{lo}, {hi}] for n={grid.n}, L={grid.length:g}")


# ---------------------------------------------------------------- spatial ops

def apply_spatial(data: np.ndarray, symbol: np.ndarray) -> np.ndarray:
    return ifft3(fft3(data) * symbol)


def _spatial_op(symbol_fn):
    def op(f, *args, grid: GridSpec | None = None):
        data, g, wrap = unpack(f, grid)
        return wrap(apply_spatial(data, symbol_fn(g, *args)))

    op.__name__ = symbol_fn.__name__.replace("_symbol", "")
    op.__doc__ = symbol_fn.__doc__
    return op


@lru_cache(maxsize=64)
def _lp_cached(n, length, k, tilde):
    from .grid import spatial_modes

    km = spatial_modes(n, length).kmag
    s = lp_symbol_tilde(km, k) if tilde else lp_symbol(km, k)
    s.setflags(write=False)
    return s


def lp(grid: GridSpec, k: int, tilde: bool = False) -> np.ndarray:
    return _lp_cached(grid.n, float(grid.length), int(k), bool(tilde))


def riesz_symbol(grid: GridSpec, j: int):
    """``i xi_j / |xi|``"""
    md = grid.modes
    return 1j * md.kd[j - 1] * md.kmag_inv


def inv_lap_partial_symbol(grid: GridSpec, j: int):
    """``i xi_j / (-|xi|^2)``, the operator Delta^{-1} d_j."""
    md = grid.modes
    return -1j * md.kd[j - 1] * md.kmag_inv ** 2


def inv_grad_symbol(grid: GridSpec):
    """``1 / |xi|``"""
    return grid.modes.kmag_inv


def partial_symbol(grid: GridSpec, j: int):
    return 1j * grid.modes.kd[j - 1]


def laplacian_symbol(grid: GridSpec):
    return -grid.modes.k2


def sobolev_symbol(grid: GridSpec, s: float):
    km = grid.modes.kmag
    out = np.zeros_like(km)
    np.power(km, s, out=out, where=km > 0)
    return out


riesz_spatial = _spatial_op(riesz_symbol)
inv_lap_partial = _spatial_op(inv_lap_partial_symbol)
inv_grad = _spatial_op(inv_grad_symbol)
partial = _spatial_op(partial_symbol)
laplacian = _spatial_op(laplacian_symbol)


def lp_project(f, k: int, grid: GridSpec | None = None, tilde: bool = False):
    """Littlewood-Paley projection ``P_k`` (or the fattened ``P~_k``)."""
    data, g, wrap = unpack(f, grid)
    _check_k(g, k)
    return wrap(apply_spatial(data, lp(g, k, tilde)))


def sobolev_norm(data: np.ndarray, grid: GridSpec, s: float) -> float:
    """Homogeneous ``H^s`` norm of a spatial field (zero mode excluded)."""
    c = fft3(data)
    w = sobolev_symbol(grid, 2 * s)
    tot = float(np.sum(w * (c.real ** 2 + c.imag ** 2)))
    return math.sqrt(tot * grid.volume / grid.n ** 6)


def l2_norm(data: np.ndarray, grid: GridSpec) -> float:
    return math.sqrt(float(np.sum(np.abs(data) ** 2)) * grid.cell)


def l2_norm_fourier(data: np.ndarray, grid: GridSpec) -> float:
    c = fft3(data)
    return math.sqrt(float(np.sum(np.abs(c) ** 2)) * grid.volume / grid.n ** 6)


# ------------------------------------------------------------- space-time ops

def _need_periodic(f: SpacetimeField, what: str):
    if not isinstance(f, SpacetimeField):
        raise ContractError(f"{what} needs a SpacetimeField")
    if not f.time_periodic:
        raise ContractError(f"{what} needs a time-periodic field or an explicit time derivative")


def time_derivative(f: SpacetimeField, order: int = 1) -> SpacetimeField:
    """Spectral time derivative of a time-periodic field."""
    _need_periodic(f, "spectral time derivative")
    g = f.grid
    tau = g.time_freqs_odd() if order % 2 else g.time_freqs()
    c = sfft.fft(f.data, axis=0)
    c *= (1j * tau) ** order
    return f.with_data(sfft.ifft(c, axis=0))


def riesz_time(f: SpacetimeField, dt_field: SpacetimeField | None = None) -> SpacetimeField:
    """``R_0 = d_t (-Delta)^{-1/2}``, spectral in time or from a supplied derivative."""
    if dt_field is not None:
        return dt_field.with_data(apply_spatial(dt_field.data, inv_grad_symbol(dt_field.grid)))
    if not isinstance(f, SpacetimeField) or not f.time_periodic:
        raise ContractError("riesz_time needs a time-periodic field or a supplied time derivative")
    g = f.grid
    tau = g.time_freqs_odd()
    return f.with_data(ifft4(fft4(f.data) * (1j * tau) * g.modes.kmag_inv))


def box_symbol(grid: GridSpec) -> np.ndarray:
    return -grid.time_freqs() ** 2 + grid.modes.k2


def box_operator(f: SpacetimeField, mode: str | None = None) -> SpacetimeField:
    """``d_t^2 f - Delta f``; spectral on periodic fields, 4th-order differences with ``mode='fd'``."""
    if not isinstance(f, SpacetimeField):
        raise ContractError("box_operator needs a SpacetimeField")
    if f.time_periodic and mode in (None, "spectral"):
        return f.with_data(ifft4(fft4(f.data) * box_symbol(f.grid)))
    if mode == "fd":
        from .calculus import fd_derivative

        tt = fd_derivative(f.data, f.grid.dt, 2)
        return f.with_data(tt - apply_spatial(f.data, laplacian_symbol(f.grid)))
    raise ContractError("box_operator needs a time-periodic field or mode='fd'")


def modulation(grid: GridSpec) -> np.ndarray:
    """``||tau| - |xi||`` on the space-time lattice, snapped to 0 on the cone."""
    tau = np.abs(grid.time_freqs())
    mod = np.abs(tau - grid.modes.kmag)
    scale = max(float(np.max(tau)), float(np.max(grid.modes.kmag)), 1.0)
    mod[mod < NULL_CONE_TOL * scale] = 0.0
    return mod


def half_space_symbol(grid: GridSpec, half_space: str) -> np.ndarray:
    tau = grid.time_freqs()
    if half_space == "+":
        return (tau > 0).astype(float)
    if half_space == "-":
        return (tau < 0).astype(float)
    if half_space == "both":
        return np.ones_like(tau)
    raise ValueError(f"half_space must be '+', '-' or 'both', got {half_space!r}")


def modulation_range(grid: GridSpec) -> tuple[int, int]:
    """Smallest band range whose ``m_j`` sum to one at every off-cone lattice point."""
    mod = modulation(grid)
    pos = mod[mod > 0]
    if pos.size == 0:
        return 0, 0
    return int(math.floor(math.log2(pos.min()))), int(math.ceil(math.log2(pos.max())))


def _need_modulation(f):
    if not isinstance(f, SpacetimeField):
        raise ContractError("modulation projections need a SpacetimeField")
    if not f.modulation_ready:
        raise ContractError("modulation projection on a raw finite window; apply taper() first")


def modulation_symbol(grid: GridSpec, j: int, half_space: str = "both") -> np.ndarray:
    return lp_symbol(modulation(grid), j) * half_space_symbol(grid, half_space)


def modulation_project(f: SpacetimeField, j: int, half_space: str = "both") -> SpacetimeField:
    """``Q_j^{+-}``: multiply by ``m_j(||tau|-|xi||)`` and the half-space indicator."""
    _need_modulation(f)
    return f.with_data(ifft4(fft4(f.data) * modulation_symbol(f.grid, j, half_space)))


def modulation_below(f: SpacetimeField, j: int, half_space: str = "both") -> SpacetimeField:
    """``Q_{<j}``; includes the null cone itself."""
    _need_modulation(f)
    sym = lp_symbol_below(modulation(f.grid), j) * half_space_symbol(f.grid, half_space)
    return f.with_data(ifft4(fft4(f.data) * sym))


def window_weights(t_samples: int) -> np.ndarray:
    """C-infinity taper equal to 1 on the middle half of the window and 0 at its ends."""
    if t_samples < 2:
        return np.ones(t_samples)
    s = np.arange(t_samples) / (t_samples - 1)
    return smooth_step(4 * s) * smooth_step(4 * (1 - s))


def taper(f: SpacetimeField) -> SpacetimeField:
    if f.time_periodic:
        return f
    w = window_weights(f.grid.t_samples)[:, None, None, None]
    return f.with_data(f.data * w, tapered=True)


def st_l2_norm(data: np.ndarray, grid: GridSpec) -> float:
    return math.sqrt(float(np.sum(np.abs(data) ** 2)) * grid.cell * grid.dt)
