import math

import numpy as np
import pytest
from hypothesis import example, given, settings, strategies as st

from wmh2 import norms as N
from wmh2.spectral import multipliers as mp
from wmh2.spectral.caps import cap_cover, cap_distance
from wmh2.spectral.grid import ContractError, GridSpec, SpacetimeField
from wmh2.spectral.nullframe import null_frame_transform
from wmh2.synth import band_field


def grid(L=2 * math.pi, n=16, nt=16):
    return GridSpec(n, L, nt, L / nt, True)


def wave(g, m=(1, 0, 0), w=2.0, amp=1.0):
    x = g.coords()
    t = g.times()[:, None, None, None]
    k = 2 * math.pi / g.length
    return SpacetimeField(amp * np.exp(1j * (w * t + k * (m[0] * x[0] + m[1] * x[1] + m[2] * x[2]))) + 0j, g)


def test_xsb_single_mode():
    g = grid()
    f = wave(g)
    l2 = N.mixed_norm(f.data, g, 2, 2)
    bins, null = N.modulation_bins(f)
    assert [j for j, v in bins.items() if v > 1e-10] == [0]
    assert N.xsb_component(f, 0, 0.5, 0.5) == pytest.approx(l2, rel=1e-12)
    assert N.xsb_component(f, 1, 0.5, 0.5, "inf") == pytest.approx(math.sqrt(2) * l2, rel=1e-12)


def test_strichartz_plane_wave_and_admissibility():
    g = grid()
    f = wave(g)
    T, V = g.window, g.volume
    assert N.strichartz_component(f, 0, 4, 4) == pytest.approx(T ** 0.25 * V ** 0.25, rel=1e-12)
    with pytest.raises(ContractError):
        N.strichartz_component(f, 0, 2, 100)
    with pytest.raises(ContractError):
        N.strichartz_component(f, 0, 3, 3)


def test_bernstein_plane_wave():
    g = grid()
    assert N.improved_bernstein_ratio(wave(g), 0, 0) == pytest.approx((2 * math.pi) ** -1.5, rel=1e-12)


def test_ratio_refuses_vacuous_direction():
    up, lo = N.Estimate(1.0, N.UPPER), N.Estimate(2.0, N.LOWER)
    with pytest.raises(ValueError):
        N.ratio(up, lo)
    assert N.ratio(up, lo, indicative=True).bound == N.INDICATIVE
    assert N.ratio(lo, up).bound == N.LOWER


def test_report_refuses_mixed_sum():
    rep = N.NormReport(0, {"a": N.Estimate(1, N.UPPER), "b": N.Estimate(1, N.LOWER)})
    with pytest.raises(ValueError):
        rep.combined((N.UPPER, N.LOWER))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0, 1e3), min_size=1, max_size=12), st.floats(0.01, 2.0))
@example([5e-324], 1.0)
def test_envelope_two_sided_bound(bands, sigma):
    env = N.envelope_from_bands(range(len(bands)), bands, sigma)
    assert env.two_sided_violation() <= 1e-14
    ratio, cs = env.sum_bound()
    assert ratio <= cs * (1 + 1e-12)
    assert np.all(env.values >= np.array(bands) * (1 - 1e-15))


def test_envelope_rejects_bad_sigma():
    with pytest.raises(ValueError):
        N.envelope_from_bands([0], [1.0], 0.0)


def test_components_homogeneous():
    g = grid()
    f = band_field(g, 0, 1)
    a = N.s_k_diagnostic(f, 0)
    b = N.s_k_diagnostic(f.with_data(-3 * f.data), 0)
    for name in a.components:
        assert b.value(name) == pytest.approx(3 * a.value(name), rel=1e-12)


def test_projection_monotone():
    g = grid()
    f = band_field(g, 1, 2)
    pk = f.with_data(mp.lp_project(f.data, 0, g))
    pt = f.with_data(mp.lp_project(f.data, 0, g, tilde=True))
    a, b = N.s_k_diagnostic(pk, 0), N.s_k_diagnostic(pt, 0)
    for name in ("energy", "xsb"):
        assert a.value(name) <= b.value(name) * (1 + 1e-12)


def test_dilation_identity():
    f = wave(grid(2 * math.pi), (1, 0, 0), 2.0)
    h = wave(grid(math.pi), (1, 0, 0), 4.0, amp=2.0)
    a, b = N.s_k_diagnostic(f, 0), N.s_k_diagnostic(h, 1)
    for name in ("energy", "xsb", "strichartz"):
        assert b.value(name) == pytest.approx(a.value(name), rel=1e-12)


def test_nk_upper_is_min_of_atoms():
    g = grid()
    F = band_field(g, 0, 3)
    t1 = N.mixed_norm(F.data, g, 1, 2)
    est = N.n_k_upper(F, 0)
    assert est.bound == N.UPPER and 0 < est.value <= t1 * (1 + 1e-12)


def test_pw_atom_normalization():
    g = grid()
    cover = cap_cover(0, g.n)
    cap = cover.caps[0]
    f = wave(g, (1, 0, 0), 1.0)
    v = null_frame_transform(f, np.array(cap.center)).mixed_norm(2, math.inf)
    assert N.pw_estimate(f.with_data(f.data / v), cap, 8).value <= 1 + 1e-12


def test_crux_zero_for_disjoint_time_support():
    g = grid()
    cover = cap_cover(1, g.n)
    a = cover.caps[0]
    b = max(cover.caps, key=lambda c: cap_distance(a, c))
    f, h = band_field(g, 0, 1), band_field(g, 0, 2)
    mask = (np.arange(g.t_samples) < g.t_samples // 2)[:, None, None, None]
    out = N.crux_ratio(f.with_data(f.data * mask), h.with_data(h.data * ~mask), 0, 0, a, b, count=4)
    assert out["ratio"].value == 0 and out["ratio"].bound == N.INDICATIVE


def test_crux_rejects_close_caps():
    g = grid()
    cover = cap_cover(1, g.n)
    f = band_field(g, 0, 1)
    with pytest.raises(ContractError):
        N.crux_ratio(f, f, 0, 0, cover.caps[0], cover.caps[0], count=2)


def test_decay_scan_trilinear_scaling():
    g = GridSpec(16, 8 * math.pi, 16, 8 * math.pi / 16, True)
    kw = dict(ds=(0,), k3s=(0,), seeds=(0,))
    a = N.nullform_decay_scan(g, **kw)
    b = N.nullform_decay_scan(g, amplitude=2.0, **kw)
    assert b.raw[(0, 0)][0] == pytest.approx(8 * a.raw[(0, 0)][0], rel=1e-10)
    assert a.label == "upper-bound decay"


def test_frequency_envelope_flags_uncovered_mass():
    g = GridSpec(16)
    x, y, z = (np.broadcast_to(c, g.shape) for c in g.coords())
    assert N.frequency_envelope(np.sin(x), 0.1, g).flags == ()
    hi = np.cos(7 * x) * np.cos(7 * y) * np.cos(7 * z)
    assert "out_of_band_mass" in N.frequency_envelope(hi, 0.1, g).flags
