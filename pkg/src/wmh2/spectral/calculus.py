"""Space-time differential calculus on raw arrays.

A :class:`Calculus` binds a grid, a metric signature and a time-derivative mode
so that formula-heavy code (null forms, gauge identities) can be written with
short calls on bare ``(t, i, j, k)`` arrays.  Three time modes exist:

``spectral``  time-periodic synthetic fields, exact trigonometric derivatives
``fd``        recorded windows, fourth-order finite differences in ``t``
``None``      single slices; time derivatives must be supplied by the caller
"""
from __future__ import annotations

import numpy as np
import scipy.fft as sfft

from .grid import ContractError, GridSpec, fft3, fft4, ifft3, ifft4

MINKOWSKI = (1.0, -1.0, -1.0, -1.0)
FLIPPED = (-1.0, 1.0, 1.0, 1.0)


def fornberg_weights(z: float, x: np.ndarray, m: int) -> np.ndarray:
    """Finite-difference weights at ``z`` on nodes ``x`` for derivatives up to ``m``."""
    n = len(x)
    c = np.zeros((n, m + 1))
    c1, c4 = 1.0, x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


def fd_derivative(f: np.ndarray, h: float, order: int = 1, axis: int = 0) -> np.ndarray:
    """Fourth-order accurate derivative along ``axis`` (one-sided near the ends)."""
    f = np.moveaxis(np.asarray(f), axis, 0)
    nt = f.shape[0]
    width = 5 if order == 1 else 6
    if nt < width:
        raise ContractError(f"need at least {width} samples for a 4th-order derivative, got {nt}")
    out = np.empty_like(f)
    for i in range(nt):
        if order == 1 or 2 <= i < nt - 2:
            lo = min(max(i - 2, 0), nt - 5)
            idx = np.arange(lo, lo + 5)
        else:
            lo = 0 if i < 2 else nt - 6
            idx = np.arange(lo, lo + 6)
        w = fornberg_weights(float(i), idx.astype(float), order) / h ** order
        acc = w[0] * f[idx[0]]
        for wk, ik in zip(w[1:], idx[1:]):
            acc = acc + wk * f[ik]
        out[i] = acc
    return np.moveaxis(out, 0, axis)


class Calculus:
    def __init__(self, grid: GridSpec, time: str | None = "spectral", metric=MINKOWSKI):
        if time not in ("spectral", "fd", None):
            raise ValueError(f"unknown time mode {time!r}")
        if time == "spectral" and not grid.time_periodic:
            raise ContractError("spectral time derivatives need a time-periodic grid")
        self.grid = grid
        self.time = time
        self.metric = tuple(float(s) for s in metric)
        md = grid.modes
        self._ik = tuple(1j * k for k in md.kd)
        self._kinv = md.kmag_inv
        self._k2 = md.kd2  # squared odd derivative; equals |xi|^2 off the Nyquist planes
        self._k2inv = md.kmag_inv ** 2
        if time == "spectral":
            self._itau = 1j * grid.time_freqs_odd()
            self._tau2 = grid.time_freqs() ** 2

    # transforms
    def fs(self, f):
        return fft3(f)

    def ifs(self, c):
        return ifft3(c)

    # first derivatives
    def dt(self, f):
        if self.time == "spectral":
            return sfft.ifft(sfft.fft(f, axis=0) * self._itau, axis=0)
        if self.time == "fd":
            return fd_derivative(f, self.grid.dt, 1)
        raise ContractError("no time derivative available on a single slice")

    def dx(self, f, j: int):
        return ifft3(fft3(f) * self._ik[j - 1])

    def d(self, f, nu: int):
        return self.dt(f) if nu == 0 else self.dx(f, nu)

    def up(self, f, nu: int):
        """Raised derivative ``d^nu f``."""
        return self.metric[nu] * self.d(f, nu)

    def grad4(self, f):
        return [self.d(f, nu) for nu in range(4)]

    def dot(self, a, b):
        """``a_nu b^nu`` for 4-lists of arrays."""
        s = self.metric
        return s[0] * a[0] * b[0] + s[1] * a[1] * b[1] + s[2] * a[2] * b[2] + s[3] * a[3] * b[3]

    # spatial multipliers
    def riesz(self, f, nu: int, f_t=None):
        if nu == 0:
            return self.inv_grad(self.dt(f) if f_t is None else f_t)
        return ifft3(fft3(f) * (self._ik[nu - 1] * self._kinv))

    def inv_lap_partial(self, f, j: int):
        return ifft3(fft3(f) * (-self._ik[j - 1] * self._k2inv))

    def inv_grad(self, f):
        return ifft3(fft3(f) * self._kinv)

    def inv_lap(self, f):
        return ifft3(fft3(f) * (-self._k2inv))

    def lap(self, f):
        return ifft3(fft3(f) * (-self._k2))

    def dtt(self, f):
        if self.time == "spectral":
            return sfft.ifft(sfft.fft(f, axis=0) * (-self._tau2), axis=0)
        if self.time == "fd":
            return fd_derivative(f, self.grid.dt, 2)
        raise ContractError("no time derivative available on a single slice")

    def box(self, f):
        """``d_t^2 f - Delta f`` (independent of the raising convention)."""
        if self.time == "spectral":
            return ifft4(fft4(f) * (-self._tau2 + self._k2))
        return self.dtt(f) - self.lap(f)

    def mean(self, f):
        return f.mean(axis=(-3, -2, -1), keepdims=True)
