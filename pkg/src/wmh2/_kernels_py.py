"""Pure numpy versions of the compiled hot loops in ``_kernels.pyx``.

Both modules expose the same three functions with the same semantics; the
compiled one is picked at import time by :mod:`wmh2._accel`.
"""
from __future__ import annotations

import math

import numpy as np


def cubic_weights(u: np.ndarray):
    """4-point Lagrange weights for nodes -1, 0, 1, 2 at offset ``u`` in ``[0, 1)``."""
    um1, up1, um2 = u - 1.0, u + 1.0, u - 2.0
    return (
        -u * um1 * um2 / 6.0,
        up1 * um1 * um2 / 2.0,
        -up1 * u * um2 / 2.0,
        up1 * u * um1 / 6.0,
    )


def null_frame_gather(src, a, b, periodic: bool, chunk: int = 8):
    """Resample ``src[t, p]`` at fractional times ``a[m] - b[p]`` (units of the slice spacing).

    Cubic Lagrange interpolation along ``t``.  Periodic sources wrap; otherwise
    samples outside the window count as zero.
    """
    src = np.ascontiguousarray(src, dtype=np.complex128)
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    nt, npts = src.shape
    out = np.empty((a.shape[0], npts), dtype=np.complex128)
    cols = np.arange(npts)
    for lo in range(0, a.shape[0], chunk):
        pos = a[lo:lo + chunk, None] - b[None, :]
        i0 = np.floor(pos)
        u = pos - i0
        i0 = i0.astype(np.int64)
        acc = np.zeros(pos.shape, dtype=np.complex128)
        for off, w in zip((-1, 0, 1, 2), cubic_weights(u)):
            idx = i0 + off
            if periodic:
                acc += w * src[idx % nt, cols]
            else:
                ok = (idx >= 0) & (idx < nt)
                vals = src[np.clip(idx, 0, nt - 1), cols]
                acc += np.where(ok, w * vals, 0.0)
        out[lo:lo + chunk] = acc
    return out


def mixed_norm(src, p: float, q: float, wt: float, wx: float) -> float:
    """``(sum_t wt (sum_x wx |f|^q)^(p/q))^(1/p)`` with ``inf`` meaning max."""
    mag = np.abs(np.asarray(src, dtype=np.complex128))
    if math.isinf(q):
        inner = mag.max(axis=1)
    else:
        inner = (wx * np.sum(mag ** q, axis=1)) ** (1.0 / q)
    if math.isinf(p):
        return float(inner.max())
    return float((wt * np.sum(inner ** p)) ** (1.0 / p))


def wave_products(xt, yt, gx, gy):
    """Quadratic forms of the H^2 wave map: ``Q(x,y)`` and ``Q(x,x) - Q(y,y)``.

    ``Q(u,v) = u_t v_t - grad u . grad v``; ``gx``/``gy`` hold the three spatial
    derivatives stacked on the first axis.
    """
    qxy = xt * yt - (gx[0] * gy[0] + gx[1] * gy[1] + gx[2] * gy[2])
    qxx = xt * xt - (gx[0] * gx[0] + gx[1] * gx[1] + gx[2] * gx[2])
    qyy = yt * yt - (gy[0] * gy[0] + gy[1] * gy[1] + gy[2] * gy[2])
    return qxy, qxx - qyy
