import numpy as np
import pytest

from wmh2.gauge import (GaugeFrame, chi_divergence, coulomb_phase, dynamic_separation, gauge_change_diagnostic,
                        gauge_invariance_error, twist, untwist)
from wmh2.solver import DerivedFrame, derived_frame, initial_data
from wmh2.spectral.grid import ContractError, GridSpec
from wmh2.synth import random_spatial


def frame(g, seed):
    return DerivedFrame(random_spatial(g, seed, band=3, real=True, lead=(2, 4)) + 0.2, g)


def test_twist_round_trip_and_unitarity():
    g = GridSpec(16)
    fr = frame(g, 0)
    gf = twist(fr, coulomb_phase(fr))
    assert np.abs(untwist(gf).phi - fr.phi).max() < 1e-13
    err = gauge_invariance_error(fr, gf)
    assert max(err.values()) < 1e-12


def test_complex_phase_rejected():
    g = GridSpec(8)
    fr = frame(g, 1)
    with pytest.raises(ContractError):
        twist(fr, 1j * np.ones(g.shape))


def test_chi_divergence_free_for_any_psi():
    g = GridSpec(16)
    psi = random_spatial(g, 5, band=4, lead=(4,))
    ds = dynamic_separation(GaugeFrame(np.zeros(g.shape), psi, g))
    assert np.abs(chi_divergence(ds, g)).max() < 1e-12
    assert np.abs(ds.reconstruct()[1:] - psi[1:]).max() < 1e-12


def test_coulomb_condition():
    # the twisted connection is divergence free
    g = GridSpec(16)
    fr = frame(g, 2)
    Phi = coulomb_phase(fr)
    from wmh2.spectral.calculus import Calculus

    cal = Calculus(g, time=None)
    a = [fr.phi[0, k] - cal.dx(Phi, k) for k in (1, 2, 3)]
    div = sum(cal.dx(a[k - 1], k) for k in (1, 2, 3))
    assert np.abs(div).max() < 1e-12


def test_gauge_change_header_names_omissions():
    g = GridSpec(16, 16.0)
    s = initial_data(g, 0.01)
    fr = derived_frame(s)
    win = g.with_time(8, 0.05, False)
    phi1 = np.repeat(fr.phi[0, 1:, None], 8, axis=1)
    psi = np.repeat(twist(fr, coulomb_phase(fr)).psi[1][None], 8, axis=0)
    d = gauge_change_diagnostic(phi1, psi, win, "bounded", ks=[0])
    assert "omitted" in d["header"]
    assert d["rows"][0]["ratio"] >= 0
