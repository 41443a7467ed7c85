"""Fourier calculus, dyadic and modulation projections, caps and null frames on the periodic box."""
from .calculus import FLIPPED, MINKOWSKI, Calculus, fd_derivative
from .caps import Cap, CapCover, cap_cover, cap_distance, cap_project, cap_symbol, sphere_sequence
from .dump import read_dump, write_dump
from .grid import ContractError, GridSpec, ScalarField3, SpacetimeField, fft3, fft4, ifft3, ifft4
from .multipliers import (
    BUMP_ID,
    box_operator,
    chi,
    inv_grad,
    inv_lap_partial,
    laplacian,
    lp_project,
    lp_symbol,
    lp_symbol_tilde,
    modulation,
    modulation_below,
    modulation_project,
    modulation_range,
    modulation_symbol,
    partial,
    riesz_spatial,
    riesz_time,
    sobolev_norm,
    taper,
    time_derivative,
    window_weights,
)
from .nullframe import NullFrameField, null_frame_inverse, null_frame_transform
