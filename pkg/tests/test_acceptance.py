"""Acceptance criteria 1-10, one pass/fail line each (see the terminal summary)."""
import math
import time

import numpy as np
import pytest

from wmh2 import harness as H
from wmh2.config import RunConfig
from wmh2.norms import bernstein_stability, nullform_decay_scan
from wmh2.solver import BumpSpec, geodesic_order, initial_data, run
from wmh2.spectral.calculus import FLIPPED
from wmh2.spectral.grid import GridSpec

SEEDS = range(5)


def _by_name(checks):
    return {c.name: c for c in checks}


@pytest.fixture(scope="module")
def verify_grid():
    return GridSpec(32, 2 * math.pi, 32, 2 * math.pi / 32, True)


@pytest.fixture(scope="module")
def standard(tmp_path_factory):
    # n = 64, L = 16, dt = 0.01, T = 1, epsilon = 0.01
    cfg = RunConfig()
    rec, checks = H.run_simulation(cfg, tmp_path_factory.mktemp("std"))
    return cfg, rec, _by_name(checks)


def test_c01_identities(verify_grid, acceptance):
    t0 = time.perf_counter()
    c = _by_name(H.identity_checks(verify_grid, SEEDS))
    dt = time.perf_counter() - t0
    worst = max(c["full_nullform_identity"].value, c["special_identity"].value)
    ok = acceptance(1, "null-form identities", worst < 1e-10 and dt < 60,
                    f"max residual {worst:.2e} (< 1e-10), {dt:.1f} s (< 60 s)")
    assert ok


def test_c02_multiplier_algebra(verify_grid, acceptance):
    c = H.multiplier_algebra(verify_grid)
    worst = max(x.value for x in c)
    ok = acceptance(2, "multiplier algebra", worst < 1e-12, f"max {worst:.2e} (< 1e-12)")
    assert ok


def test_c03_chi_divergence(verify_grid, acceptance):
    v = _by_name(H.gauge_checks(verify_grid, SEEDS))["chi_divergence"].value
    ok = acceptance(3, "div chi", v < 1e-12, f"{v:.2e} (< 1e-12)")
    assert ok


def test_c04_gauge_unitarity(verify_grid, acceptance):
    c = _by_name(H.gauge_checks(verify_grid, SEEDS))
    worst = max(c[k].value for k in ("twist_round_trip", "gauge_modulus", "gauge_bracket"))
    ok = acceptance(4, "gauge unitarity", worst < 1e-12, f"max {worst:.2e} (< 1e-12)")
    assert ok


def test_c05_energy_and_geodesic(standard, acceptance):
    _, _, checks = standard
    drift = checks["energy_drift"].value
    order = geodesic_order(GridSpec(8))["order"]
    ok = acceptance(5, "energy drift and geodesic order", drift < 1e-8 and 3.7 <= order <= 4.3,
                    f"drift {drift:.2e} (< 1e-8), order {order:.3f} (in [3.7, 4.3])")
    assert ok


def test_c06_constraint_ladder(acceptance):
    s = initial_data(GridSpec(64, 16.0), 0.01).with_dealias(False)
    a, b = H.constraint_ladder(s, 0.48, (0.03, 0.015), 2)
    keys = ("eq1", "eq3", "eq4", "twisted_div", "twisted_curl")
    drops = {k: a[k] / b[k] for k in keys}
    eq2 = max(a["eq2_spatial_max"], b["eq2_spatial_max"])
    ok = eq2 < 1e-10 and min(drops.values()) >= 8
    acceptance(6, "div-curl constraints", ok,
               f"eq2 spatial {eq2:.2e} (< 1e-10), drops " + ", ".join(f"{k} {v:.1f}x" for k, v in drops.items())
               + " (>= 8x)")
    assert ok


def test_c07_assembly_ladder(acceptance):
    base = BumpSpec()
    bump = BumpSpec(3.2, base.sharpness, tuple(tuple(0.6 * c for c in o) for o in base.offsets), base.weights)
    s = initial_data(GridSpec(64, 16.0), 0.1, bump).with_dealias(False)
    a, b = H.assembly_ladder(s, (0.03, 0.015), 2)
    drop = a["relative"] / b["relative"]
    split = max(a["split"], b["split"])
    ok = drop >= 8 and split < 1e-10
    acceptance(7, "I + II + III assembly", ok,
               f"residual {a['relative']:.2e} -> {b['relative']:.2e} ({drop:.1f}x, >= 8x), split {split:.2e} (< 1e-10)")
    assert ok


def test_c08_envelopes(standard, acceptance):
    from wmh2.gauge import coulomb_phase, twist

    cfg, rec, _ = standard
    fr = rec.window_frame()
    envs = H.envelope_series(twist(fr, coulomb_phase(fr)), cfg.sigma)
    viol = max(e.two_sided_violation() for e in envs)
    growth = H.envelope_growth(envs)
    ok = viol <= 1e-14 and growth <= 2.0
    acceptance(8, "frequency envelopes", ok, f"two-sided violation {viol:.2e} (<= 0), sup growth {growth:.4f} (<= 2)")
    assert ok


def test_c09_bernstein_and_decay(acceptance):
    bs = bernstein_stability(0, (32, 64))
    g = GridSpec(32, 8 * math.pi, 32, 8 * math.pi / 32, True)
    sc = nullform_decay_scan(g, 0, (0, 1, 2), (-2, -1, 0), (0,))
    ok = bs["spread"] <= 0.3 and sc.delta1 > 0 and sc.delta2 > 0
    acceptance(9, "Bernstein stability and decay", ok,
               f"Bernstein spread {bs['spread']:.4f} (<= 0.3), {sc.label} delta1 {sc.delta1:.3f} (> 0), "
               f"delta2 {sc.delta2:.3f} (> 0)")
    assert ok


def test_c10_determinism_and_control(verify_grid, acceptance):
    cfg = RunConfig(seeds=2)
    v1 = [c.value for c in H.run_verify(cfg)]
    v2 = [c.value for c in H.run_verify(cfg)]
    s = initial_data(GridSpec(16, 8.0), 0.01, BumpSpec(2.0))
    r1 = run(s, 0.2, 0.02, 5, diagnostics=False).states[-1]
    r2 = run(s, 0.2, 0.02, 5, diagnostics=False).states[-1]
    same = v1 == v2 and all(np.array_equal(a, b) for a, b in zip(r1.arrays(), r2.arrays()))
    flipped = _by_name(H.identity_checks(verify_grid, SEEDS, FLIPPED))
    control = not (flipped["full_nullform_identity"].passed and flipped["special_identity"].passed)
    ok = same and control
    acceptance(10, "determinism and flipped control", ok,
               f"bit-identical {same}, flipped full {flipped['full_nullform_identity'].value:.2e} / special "
               f"{flipped['special_identity'].value:.2e} fail criterion 1: {control}")
    assert ok
