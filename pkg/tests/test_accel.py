import math

import numpy as np
import pytest

from wmh2 import _accel, _kernels_py

compiled = pytest.importorskip("wmh2._kernels")


@pytest.fixture
def src():
    rng = np.random.default_rng(1)
    return rng.standard_normal((9, 300)) + 1j * rng.standard_normal((9, 300))


@pytest.mark.parametrize("p,q", [(2, 2), (4, 4), (3, 6), (math.inf, 2), (2, math.inf), (math.inf, math.inf), (1, 2)])
def test_mixed_norm_backends_agree(src, p, q):
    a = _kernels_py.mixed_norm(src, p, q, 0.1, 0.01)
    b = compiled.mixed_norm(src, p, q, 0.1, 0.01)
    assert b == pytest.approx(a, rel=1e-13)


@pytest.mark.parametrize("periodic", [True, False])
def test_gather_backends_agree(src, periodic):
    a = np.linspace(-1, 9, 13)
    b = np.random.default_rng(2).uniform(-3, 3, src.shape[1])
    assert np.abs(_kernels_py.null_frame_gather(src, a, b, periodic)
                  - compiled.null_frame_gather(src, a, b, periodic)).max() < 1e-13


def test_gather_exact_on_cubics():
    t = np.arange(12.0)
    src = (t ** 3 - 2 * t)[:, None] * np.ones((1, 4)) + 0j
    a = np.array([5.0])
    b = np.array([0.25, 0.5, -0.75, 1.5])
    pos = a[:, None] - b[None]
    for mod in (_kernels_py, compiled):
        assert np.abs(mod.null_frame_gather(src, a, b, False) - (pos ** 3 - 2 * pos)).max() < 1e-11


def test_wave_products_agree():
    rng = np.random.default_rng(3)
    f = [rng.standard_normal((4, 4, 4)) for _ in range(2)]
    g = [rng.standard_normal((3, 4, 4, 4)) for _ in range(2)]
    for x, y in zip(_kernels_py.wave_products(*f, *g), compiled.wave_products(*f, *g)):
        assert np.abs(x - y).max() < 1e-14


def test_backend_selected():
    assert _accel.BACKEND in ("cython", "python")
