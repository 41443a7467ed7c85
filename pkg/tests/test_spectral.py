import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import plane
from wmh2.spectral import multipliers as mp
from wmh2.spectral.caps import angle_to, cap_cover, directions_where, sphere_sequence
from wmh2.spectral.grid import ContractError, GridSpec, SpacetimeField
from wmh2.spectral.nullframe import null_frame_transform
from wmh2.synth import random_spatial


def test_grid_rejects_bad_sizes():
    for n in (6, 12, 0):
        with pytest.raises(ValueError):
            GridSpec(n)
    with pytest.raises(ValueError):
        GridSpec(16, dt=0.0)


def test_lp_plane_wave_kept_and_killed():
    g = GridSpec(32)
    f = plane(g, (2, 0, 0))
    assert np.abs(mp.lp_project(f, 1, g) - f).max() < 1e-14
    assert np.abs(mp.lp_project(plane(g, (8, 0, 0)), 1, g)).max() < 1e-14


def test_lp_out_of_range_names_band():
    with pytest.raises(ValueError, match="resolvable range"):
        mp.lp_project(np.zeros((16,) * 3), 9, GridSpec(16))


def test_partition_of_unity(g16):
    f = random_spatial(g16, 3, band=2)
    lo, hi = g16.k_range()
    s = sum(mp.lp_project(f, k, g16) for k in range(lo, hi + 1))
    assert np.abs(s - f).max() < 1e-12


def test_riesz_examples(g16):
    f = plane(g16)
    assert np.abs(mp.riesz_spatial(f, 1, grid=g16) - 1j * f).max() < 1e-14
    assert np.abs(mp.riesz_spatial(np.ones(g16.shape), 2, grid=g16)).max() == 0
    h = random_spatial(g16, 1, band=4)
    rr = sum(mp.riesz_spatial(mp.riesz_spatial(h, j, grid=g16), j, grid=g16) for j in (1, 2, 3))
    assert np.abs(rr + h).max() < 1e-12


def test_inverse_operators(g16):
    f = plane(g16)
    assert np.abs(mp.inv_lap_partial(f, 1, grid=g16) + 1j * f).max() < 1e-14
    assert np.abs(mp.inv_grad(f, grid=g16) - f).max() < 1e-14
    h = random_spatial(g16, 2, band=4)
    twice = mp.inv_grad(mp.inv_grad(h, grid=g16), grid=g16)
    assert np.abs(twice - mp.apply_spatial(h, g16.modes.kmag_inv ** 2)).max() < 1e-12
    back = sum(mp.partial(mp.inv_lap_partial(h, j, grid=g16), j, grid=g16) for j in (1, 2, 3))
    assert np.abs(back - h).max() < 1e-12


def test_riesz_time_paths(st16):
    f = plane(st16, (1, 0, 0), 1.0)
    assert np.abs(mp.riesz_time(f).data - 1j * f.data).max() < 1e-12
    dt = mp.time_derivative(f)
    assert np.abs(mp.riesz_time(f, dt).data - mp.riesz_time(f).data).max() < 1e-10
    raw = SpacetimeField(f.data, st16.with_time(16, st16.dt, False))
    with pytest.raises(ContractError):
        mp.riesz_time(raw)


def test_modulation_examples(st16):
    on_cone = plane(st16, (1, 0, 0), 1.0)
    for j in range(*mp.modulation_range(st16)):
        assert np.abs(mp.modulation_project(on_cone, j).data).max() < 1e-13
    f = plane(st16, (1, 0, 0), 2.0)
    assert np.abs(mp.modulation_project(f, 0).data - f.data).max() < 1e-13
    raw = SpacetimeField(f.data, st16.with_time(16, st16.dt, False))
    with pytest.raises(ContractError, match="taper"):
        mp.modulation_project(raw, 0)
    assert mp.taper(raw).modulation_ready


def test_box_symbol_on_cone(st16):
    f = plane(st16, (1, 0, 0), 1.0)
    assert np.abs(mp.box_operator(f).data).max() < 1e-12


def test_caps_partition_and_cover():
    dirs = sphere_sequence(2000)
    for level in (0, 1, 2):
        cover = cap_cover(level)
        assert np.abs(cover.weights(dirs).sum(axis=0) - 1).max() < 1e-12
        half = np.min([angle_to(dirs, c.center) for c in cover], axis=0)
        assert half.max() <= 0.5 * cover.radius


def test_sphere_sequence_nested():
    a, b = sphere_sequence(50), sphere_sequence(100)
    assert np.array_equal(a, b[:50])
    assert np.allclose(np.linalg.norm(b, axis=1), 1)
    pts = directions_where(lambda d: d[:, 2] > 0.5, 10)
    assert len(pts) == 10 and np.all(pts[:, 2] > 0.5)


def test_null_frame_plane_wave_norm(st16):
    # |f| = 1 everywhere: the L^inf L^2 norm is the square root of the box volume
    f = plane(st16, (1, 0, 0), 1.0)
    nf = null_frame_transform(f, (0.0, 0.0, 1.0))
    assert nf.mixed_norm(math.inf, math.inf) == pytest.approx(1.0, rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31), st.floats(-3, 3))
def test_lp_linear_and_real(seed, lam):
    g = GridSpec(8)
    f = random_spatial(g, seed, band=2, real=True)
    h = random_spatial(g, seed + 1, band=2, real=True)
    a = mp.lp_project(f + lam * h, 0, g)
    b = mp.lp_project(f, 0, g) + lam * mp.lp_project(h, 0, g)
    assert np.abs(a - b).max() < 1e-12
    assert np.abs(a.imag).max() < 1e-12
