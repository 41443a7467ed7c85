"""Random band-limited fields for identity checks and scans."""
from __future__ import annotations

import math

import numpy as np

from .spectral import multipliers as mp
from .spectral.grid import GridSpec, SpacetimeField, ifft3, ifft4


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _lattice_index(n, band):
    m = np.fft.fftfreq(n, 1.0 / n).astype(int)
    return m, np.abs(m) <= band


def trig_field(grid: GridSpec, seed=0, band: int = 4, tband: int = 4, half: bool = True) -> SpacetimeField:
    """Random time-periodic trigonometric polynomial.

    Spatial modes satisfy ``|m_i| <= band``; with ``half`` only ``m_1 >= 1`` is
    populated, so products of such fields never reach the zero spatial mode.
    Normalised to unit rms.
    """
    if not grid.time_periodic:
        raise ValueError("trig_field needs a time-periodic grid")
    rng = _rng(seed)
    n, nt = grid.n, grid.t_samples
    if 3 * band >= n // 2 or 3 * tband >= nt // 2:
        raise ValueError("band too wide for alias-free cubic products")
    m, ok = _lattice_index(n, band)
    mt, okt = _lattice_index(nt, tband)
    mask = okt[:, None, None, None] & ok[None, :, None, None] & ok[None, None, :, None] & ok[None, None, None, :]
    if half:
        mask &= (m >= 1)[None, :, None, None]
    else:
        mask &= ~((m == 0)[None, :, None, None] & (m == 0)[None, None, :, None] & (m == 0)[None, None, None, :])
    c = np.zeros(grid.st_shape, complex)
    k = int(mask.sum())
    c[mask] = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    data = ifft4(c)
    data /= math.sqrt(np.mean(np.abs(data) ** 2))
    return SpacetimeField(data, grid)


def trig_triple(grid: GridSpec, seed=0, band: int = 4, tband: int = 4):
    rng = _rng(seed)
    return tuple(trig_field(grid, rng, band, tband) for _ in range(3))


def random_spatial(grid: GridSpec, seed=0, band: int | None = None, real: bool = False, lead=()):
    """Random mean-free band-limited spatial samples (leading shape ``lead``)."""
    rng = _rng(seed)
    n = grid.n
    band = n // 4 if band is None else band
    m, ok = _lattice_index(n, band)
    mask = ok[:, None, None] & ok[None, :, None] & ok[None, None, :]
    mask[0, 0, 0] = False
    shape = tuple(lead) + grid.shape
    c = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * mask
    data = ifft3(c)
    if real:
        data = data.real
    return data / math.sqrt(np.mean(np.abs(data) ** 2))


def band_field(grid: GridSpec, k: int, seed=0, near_cone: float | None = None, sign: int = 0) -> SpacetimeField:
    """Random time-periodic field localised to the dyadic band ``k``.

    ``near_cone`` keeps only space-time modes with modulation below that value;
    ``sign`` selects ``tau > 0`` (1), ``tau < 0`` (-1) or both (0).
    """
    if not grid.time_periodic:
        raise ValueError("band_field needs a time-periodic grid")
    rng = _rng(seed)
    md = grid.modes
    sym = mp.lp(grid, k)
    tau = grid.time_freqs()
    keep = np.broadcast_to(sym != 0, grid.st_shape).copy()
    if near_cone is not None:
        keep &= np.abs(np.abs(tau) - md.kmag) <= near_cone
    if sign:
        keep &= sign * tau > 0
    c = np.zeros(grid.st_shape, complex)
    cnt = int(keep.sum())
    if cnt == 0:
        raise ValueError(f"no lattice modes in band {k} with the requested cone distance")
    c[keep] = rng.standard_normal(cnt) + 1j * rng.standard_normal(cnt)
    c *= sym
    data = ifft4(c)
    return SpacetimeField(data / math.sqrt(np.mean(np.abs(data) ** 2)), grid)
