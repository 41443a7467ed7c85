import numpy as np
import pytest

from wmh2.solver import (BumpSpec, cfl_limit, constant_map, derived_frame, div_curl_residual,
                         frame_time_derivative, geodesic_order, geodesic_state, hdot_half, initial_data, run,
                         step, wave_rhs)
from wmh2.spectral.dump import read_dump, write_dump
from wmh2.spectral.grid import ContractError, GridSpec, SpacetimeField


def test_geodesic_step_residual():
    g = GridSpec(8)
    s = geodesic_state(g, 1.5)
    xtt, ytt = wave_rhs(s)
    assert np.abs(xtt).max() == 0
    assert np.abs(ytt - 1.5 ** 2).max() < 1e-12


def test_geodesic_order():
    r = geodesic_order(GridSpec(8))
    assert 3.7 <= r["order"] <= 4.3


def test_constant_map_stays_put():
    s = constant_map(GridSpec(8), 0.3, 2.0)
    out = step(s, 0.1)
    assert np.array_equal(out.x, s.x) and np.array_equal(out.y, s.y)


def test_initial_data_hits_epsilon():
    g = GridSpec(32, 16.0)
    s = initial_data(g, 0.02)
    assert hdot_half(derived_frame(s)) == pytest.approx(0.02, rel=1e-10)
    with pytest.raises(ContractError):
        initial_data(g, 0.0)
    with pytest.raises(ContractError):
        initial_data(GridSpec(16, 5.0), 0.01, BumpSpec())


def test_cfl_rejected():
    g = GridSpec(16, 16.0)
    with pytest.raises(ContractError, match="stability"):
        run(constant_map(g), 1.0, 2 * cfl_limit(g, 0.5), c_cfl=0.5)


def test_constraints_on_data():
    s = initial_data(GridSpec(32, 16.0), 0.05)
    rep = div_curl_residual(derived_frame(s), frame_time_derivative(s))
    assert rep.relative["eq2_spatial"] < 1e-12


def test_dealias_flag_survives_steps():
    s = constant_map(GridSpec(8)).with_dealias(False)
    assert step(s, 0.1).dealias is False


def test_dump_round_trip(tmp_path):
    g = GridSpec(8, 3.0, 2, 0.5, True)
    f = SpacetimeField(np.arange(2 * 512).reshape(g.st_shape) * (1 + 2j), g)
    back = read_dump(write_dump(tmp_path / "a.wmh2", f))
    assert np.array_equal(back.data, f.data) and back.grid == g
