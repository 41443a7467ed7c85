# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops; semantics mirror ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor, fabs, pow, sqrt, INFINITY

cnp.import_array()


cdef inline Py_ssize_t _wrap(Py_ssize_t i, Py_ssize_t n) noexcept nogil:
    i = i % n
    if i < 0:
        i += n
    return i


def null_frame_gather(src, a, b, bint periodic):
    cdef double complex[:, ::1] s = np.ascontiguousarray(src, dtype=np.complex128)
    cdef double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t nt = s.shape[0], npts = s.shape[1], nm = av.shape[0]
    out_arr = np.empty((nm, npts), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    cdef Py_ssize_t m, p, i0, idx, off
    cdef double pos, u, w[4]
    cdef double complex acc
    with nogil:
        for m in range(nm):
            for p in range(npts):
                pos = av[m] - bv[p]
                i0 = <Py_ssize_t> floor(pos)
                u = pos - i0
                w[0] = -u * (u - 1.0) * (u - 2.0) / 6.0
                w[1] = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0
                w[2] = -(u + 1.0) * u * (u - 2.0) / 2.0
                w[3] = (u + 1.0) * u * (u - 1.0) / 6.0
                acc = 0
                for off in range(4):
                    idx = i0 - 1 + off
                    if periodic:
                        acc = acc + w[off] * s[_wrap(idx, nt), p]
                    elif 0 <= idx < nt:
                        acc = acc + w[off] * s[idx, p]
                out[m, p] = acc
    return out_arr


cdef inline void _neumaier(double *s, double *c, double x) noexcept nogil:
    cdef double t = s[0] + x
    if fabs(s[0]) >= fabs(x):
        c[0] += (s[0] - t) + x
    else:
        c[0] += (x - t) + s[0]
    s[0] = t


def mixed_norm(src, double p, double q, double wt, double wx):
    cdef double complex[:, ::1] s = np.ascontiguousarray(src, dtype=np.complex128)
    cdef Py_ssize_t nt = s.shape[0], npts = s.shape[1], t, x
    cdef bint qinf = q == INFINITY, pinf = p == INFINITY
    cdef double inner, sx, cx, blk, st = 0.0, ct = 0.0, mag, best = 0.0
    with nogil:
        for t in range(nt):
            if qinf:
                inner = 0.0
                for x in range(npts):
                    mag = sqrt(s[t, x].real * s[t, x].real + s[t, x].imag * s[t, x].imag)
                    if mag > inner:
                        inner = mag
            else:
                sx = 0.0
                cx = 0.0
                # plain sums over short blocks, compensated across blocks
                blk = 0.0
                for x in range(npts):
                    mag = s[t, x].real * s[t, x].real + s[t, x].imag * s[t, x].imag
                    if q == 2.0:
                        blk += mag
                    elif q == 4.0:
                        blk += mag * mag
                    else:
                        blk += pow(mag, 0.5 * q)
                    if (x & 255) == 255:
                        _neumaier(&sx, &cx, blk)
                        blk = 0.0
                _neumaier(&sx, &cx, blk)
                inner = pow(wx * (sx + cx), 1.0 / q)
            if pinf:
                if inner > best:
                    best = inner
            else:
                _neumaier(&st, &ct, pow(inner, p))
    if pinf:
        return best
    return pow(wt * (st + ct), 1.0 / p)


def wave_products(xt, yt, gx, gy):
    cdef double[::1] a = np.ascontiguousarray(xt, dtype=np.float64).reshape(-1)
    cdef double[::1] b = np.ascontiguousarray(yt, dtype=np.float64).reshape(-1)
    cdef double[:, ::1] gxv = np.ascontiguousarray(gx, dtype=np.float64).reshape(3, -1)
    cdef double[:, ::1] gyv = np.ascontiguousarray(gy, dtype=np.float64).reshape(3, -1)
    cdef Py_ssize_t n = a.shape[0], i
    qxy_arr = np.empty(n)
    qd_arr = np.empty(n)
    cdef double[::1] qxy = qxy_arr
    cdef double[::1] qd = qd_arr
    cdef double x0, x1, x2, y0, y1, y2
    with nogil:
        for i in range(n):
            x0 = gxv[0, i]; x1 = gxv[1, i]; x2 = gxv[2, i]
            y0 = gyv[0, i]; y1 = gyv[1, i]; y2 = gyv[2, i]
            qxy[i] = a[i] * b[i] - (x0 * y0 + x1 * y1 + x2 * y2)
            qd[i] = (a[i] * a[i] - (x0 * x0 + x1 * x1 + x2 * x2)) - (b[i] * b[i] - (y0 * y0 + y1 * y1 + y2 * y2))
    shape = np.shape(xt)
    return qxy_arr.reshape(shape), qd_arr.reshape(shape)
