"""Angular caps on the unit sphere and the smooth partition of unity built on them.

Cap centres are the vertices of an icosahedron subdivided ``l + 1`` times.  Each
centre carries a bump equal to one inside ``inner`` (a hair above the largest
face circumradius, so the plateaus already cover the sphere) and vanishing
beyond ``support`` (just below the smallest vertex separation, so a centre
sees no other bump).  The full cap radius is ``2 * support`` which tracks
``2^-l``; concentric caps of half that radius are the supports and cover S^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .multipliers import smooth_step

MAX_LEVEL = 5
GOLDEN = (1 + math.sqrt(5)) / 2


@dataclass(frozen=True)
class Cap:
    index: int
    level: int
    center: tuple[float, float, float]
    radius: float
    support: float
    inner: float

    def contains(self, dirs: np.ndarray, scale: float = 1.0) -> np.ndarray:
        return angle_to(dirs, self.center) <= scale * self.radius


def angle_to(dirs: np.ndarray, center) -> np.ndarray:
    c = np.asarray(center, dtype=float)
    d = np.asarray(dirs, dtype=float)
    # atan2 form keeps accuracy at small angles
    cross = np.linalg.norm(np.cross(d, c), axis=-1)
    return np.arctan2(cross, d @ c)


def _icosahedron():
    p = GOLDEN
    v = np.array(
        [[-1, p, 0], [1, p, 0], [-1, -p, 0], [1, -p, 0],
         [0, -1, p], [0, 1, p], [0, -1, -p], [0, 1, -p],
         [p, 0, -1], [p, 0, 1], [-p, 0, -1], [-p, 0, 1]],
        dtype=float,
    )
    v /= np.linalg.norm(v, axis=1)[:, None]
    f = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
         (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
         (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
         (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    return [tuple(x) for x in v], f


def subdivided_icosahedron(depth: int):
    verts, faces = _icosahedron()
    for _ in range(depth):
        cache: dict[tuple[int, int], int] = {}

        def mid(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = np.add(verts[a], verts[b])
                m /= np.linalg.norm(m)
                verts.append(tuple(m))
                cache[key] = len(verts) - 1
            return cache[key]

        nf = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            nf += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = nf
    return np.array(verts), np.array(faces)


class CapCover:
    """The cover ``K_l`` with its normalised smooth partition ``a_kappa``."""

    def __init__(self, level: int):
        verts, faces = subdivided_icosahedron(level + 1)
        edges = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
        sep = np.arccos(np.clip(np.einsum("ij,ij->i", verts[edges[:, 0]], verts[edges[:, 1]]), -1, 1))
        circ = 0.0
        for tri in faces:
            a, b, c = verts[tri]
            cen = a + b + c
            cen /= np.linalg.norm(cen)
            circ = max(circ, float(angle_to(np.array([a, b, c]), cen).max()))
        self.level = level
        self.centers = verts
        self.support = 0.98 * float(sep.min())
        self.inner = 1.05 * circ
        if not self.inner < self.support:
            raise RuntimeError("cap geometry degenerate: plateau does not fit inside support")
        self.radius = 2 * self.support
        self.caps = [
            Cap(i, level, tuple(map(float, c)), self.radius, self.support, self.inner)
            for i, c in enumerate(verts)
        ]

    def __len__(self):
        return len(self.caps)

    def __iter__(self):
        return iter(self.caps)

    def bump(self, dirs: np.ndarray, cap: Cap) -> np.ndarray:
        ang = angle_to(dirs, cap.center)
        return 1.0 - smooth_step((ang - self.inner) / (self.support - self.inner))

    def raw_sum(self, dirs: np.ndarray) -> np.ndarray:
        tot = np.zeros(np.shape(dirs)[:-1])
        for cap in self.caps:
            tot = tot + self.bump(dirs, cap)
        return tot

    def weights(self, dirs: np.ndarray) -> np.ndarray:
        """``a_kappa(theta)`` for every cap, shape ``(len(self), ...)``."""
        tot = self.raw_sum(dirs)
        return np.stack([self.bump(dirs, c) for c in self.caps]) / tot

    def weight(self, dirs: np.ndarray, cap: Cap, total: np.ndarray | None = None) -> np.ndarray:
        tot = self.raw_sum(dirs) if total is None else total
        return self.bump(dirs, cap) / tot

    def overlap(self, dirs: np.ndarray) -> np.ndarray:
        return sum((angle_to(dirs, c.center) < self.support).astype(int) for c in self.caps)


@lru_cache(maxsize=8)
def _cover(level: int) -> CapCover:
    return CapCover(level)


def feasible_levels(n: int) -> tuple[int, int]:
    return 0, min(int(math.log2(n)) // 2, MAX_LEVEL)


def cap_cover(level: int, n: int | None = None) -> CapCover:
    hi = MAX_LEVEL if n is None else feasible_levels(n)[1]
    if not 0 <= level <= hi:
        raise ValueError(f"cap level l={level} outside the feasible range [0, {hi}]"
                         + (f" for n={n}" if n is not None else ""))
    return _cover(int(level))


def sphere_sequence(count: int, offset: int = 0) -> np.ndarray:
    """Nested equal-area low-discrepancy points: the first ``N`` are a prefix of the first ``2N``."""
    i = np.arange(offset, offset + count, dtype=float) + 0.5
    # plastic-number (R2) sequence mapped area-preservingly to the sphere
    g = 1.32471795724474602596
    u = np.mod(i / g, 1.0)
    v = np.mod(i / g ** 2, 1.0)
    z = 1 - 2 * u
    r = np.sqrt(np.maximum(0.0, 1 - z * z))
    ph = 2 * math.pi * v
    return np.stack([r * np.cos(ph), r * np.sin(ph), z], axis=-1)


def directions_where(pred, count: int, chunk: int = 4096, limit: int = 1 << 22) -> np.ndarray:
    """First ``count`` points of :func:`sphere_sequence` satisfying ``pred``."""
    out, off = [], 0
    have = 0
    while have < count and off < limit:
        pts = sphere_sequence(chunk, off)
        keep = pts[pred(pts)]
        out.append(keep)
        have += len(keep)
        off += chunk
    if not out:
        return np.zeros((0, 3))
    return np.concatenate(out)[:count]


def cap_distance(a: Cap, b: Cap) -> float:
    """Angular separation of the cap centres."""
    return float(angle_to(np.array(a.center), b.center))


# ------------------------------------------------------------ cap projectors

_TOTALS: dict = {}


def _lattice_dirs(grid, sign: float):
    md = grid.modes
    k = np.stack(np.broadcast_arrays(*md.k), axis=-1)
    return sign * k * md.kmag_inv[..., None]


def _cap_raw_total(grid, cover: CapCover, sign: float, mask: np.ndarray) -> np.ndarray:
    key = (grid.n, float(grid.length), cover.level, sign)
    cached = _TOTALS.get(key)
    if cached is None or not np.all(cached[1][mask]):
        dirs = _lattice_dirs(grid, sign)
        tot = np.zeros(grid.shape)
        done = np.zeros(grid.shape, dtype=bool) if cached is None else cached[1].copy()
        if cached is not None:
            tot[done] = cached[0][done]
        todo = mask & ~done
        tot[todo] = cover.raw_sum(dirs[todo])
        done |= todo
        cached = (tot, done)
        _TOTALS[key] = cached
    return cached[0]


def cap_symbol(grid, k: int, cap: Cap, cover: CapCover | None = None, sign: float = 1.0) -> np.ndarray:
    """``m~_k(|xi|) a_kappa(sign * xi/|xi|)`` on the spatial lattice."""
    from .multipliers import _check_k, lp

    _check_k(grid, k)
    cover = cover or cap_cover(cap.level)
    radial = lp(grid, k, tilde=True)
    mask = radial != 0
    out = np.zeros(grid.shape)
    if not mask.any():
        return out
    dirs = _lattice_dirs(grid, sign)[mask]
    tot = _cap_raw_total(grid, cover, sign, mask)[mask]
    out[mask] = radial[mask] * cover.bump(dirs, cap) / tot
    return out


def cap_project(f, k: int, cap: Cap, half_space: str = "both", grid=None, cover: CapCover | None = None):
    """``P~_{k,kappa}``; on space-time fields ``'+'``/``'-'`` select ``tau > 0`` / ``tau < 0``
    and use the cap (resp. its antipode) in frequency."""
    from .grid import SpacetimeField, fft3, fft4, ifft3, ifft4, unpack
    from .multipliers import half_space_symbol

    data, g, wrap = unpack(f, grid)
    if half_space not in ("+", "-", "both"):
        raise ValueError(f"half_space must be '+', '-' or 'both', got {half_space!r}")
    sign = -1.0 if half_space == "-" else 1.0
    sym = cap_symbol(g, k, cap, cover, sign)
    if isinstance(f, SpacetimeField):
        return wrap(ifft4(fft4(data) * (sym * half_space_symbol(g, half_space))))
    if half_space != "both":
        raise ValueError("half-space selection needs a space-time field")
    return wrap(ifft3(fft3(data) * sym))
