import math

import numpy as np

from wmh2.nullforms import (full_nullform_identity, q0_form, special_identity, trilinear_nullform)
from wmh2.spectral.calculus import FLIPPED
from wmh2.spectral.grid import GridSpec, SpacetimeField
from wmh2.synth import trig_triple

G = GridSpec(16, 2 * math.pi, 16, 2 * math.pi / 16, True)


def wave(m, w):
    x = G.coords()
    t = G.times()[:, None, None, None]
    return SpacetimeField(np.exp(1j * (w * t + m[0] * x[0] + m[1] * x[1] + m[2] * x[2])) + 0j, G)


def test_q0_vanishes_on_parallel_null_waves():
    f, h = wave((1, 0, 0), -1.0), wave((2, 0, 0), -2.0)
    assert np.abs(q0_form(f, h).data).max() < 1e-12
    assert np.abs(q0_form(f, wave((0, 1, 0), -1.0)).data).max() > 0.5


def test_identities_hold():
    f, g, h = trig_triple(G, 4, band=2, tband=2)
    assert full_nullform_identity(f, g, h).residual < 1e-10
    assert special_identity(f, g, h).residual < 1e-10


def test_flipped_metric_breaks_identity():
    f, g, h = trig_triple(G, 4, band=2, tband=2)
    assert full_nullform_identity(f, g, h, metric=FLIPPED).residual > 1e-3


def test_trilinear_homogeneous():
    f, g, h = trig_triple(G, 7, band=2, tband=2)
    a = trilinear_nullform(f, g, h).data
    b = trilinear_nullform(f.with_data(2 * f.data), g.with_data(2 * g.data), h.with_data(2 * h.data)).data
    assert np.abs(b - 8 * a).max() <= 1e-12 * np.abs(b).max()


def test_zero_inputs_pass():
    z = SpacetimeField(np.zeros(G.st_shape, complex), G)
    assert full_nullform_identity(z, z, z).residual == 0
