r"""Coulomb gauge, twisted frame fields and dynamic separation.

The complex frame field is :math:`\phi_\alpha = \phi^1_\alpha - i\phi^2_\alpha`
(the orientation of the frame :math:`\{y\partial_x, -y\partial_y\}`).  With it the
connection is :math:`\partial - i\phi^1`, the Coulomb phase is
:math:`\Phi = \Delta^{-1}\partial_k\phi^1_k` and :math:`\psi_\alpha = e^{-i\Phi}\phi_\alpha`
satisfies

.. math::
    \partial_\alpha\psi_\beta - \partial_\beta\psi_\alpha = i\psi_\beta a_\alpha - i\psi_\alpha a_\beta,
    \qquad \partial^\nu\psi_\nu = i\psi^\nu a_\nu,

where :math:`a_\nu = \Delta^{-1}\partial_j(\psi^1_\nu\psi^2_j - \psi^2_\nu\psi^1_j) + \bar a_\nu`.
On the torus :math:`\bar a_\nu` is the spatial mean of :math:`\phi^1_\nu`; it is
kept as a separate term (``torus=False`` drops it).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .solver import DerivedFrame, ResidualReport, _rel
from .spectral.calculus import MINKOWSKI, Calculus
from .spectral.grid import ContractError, GridSpec


@dataclass(frozen=True, eq=False)
class GaugeFrame:
    """``Phi`` (real) and ``psi[alpha]`` (complex); optional leading time axis on both."""

    Phi: np.ndarray
    psi: np.ndarray
    grid: GridSpec

    @property
    def windowed(self) -> bool:
        return self.psi.ndim == 5


@dataclass(frozen=True, eq=False)
class DynSep:
    Psi: np.ndarray
    chi: np.ndarray        # (4, ...)
    R_Psi: np.ndarray      # R_nu Psi, (4, ...)

    def reconstruct(self) -> np.ndarray:
        return -self.R_Psi + self.chi


def complex_frame(frame: DerivedFrame) -> np.ndarray:
    """``phi_alpha = phi1_alpha - i phi2_alpha``, shape ``(4, ...)``."""
    return frame.phi[0] - 1j * frame.phi[1]


def calculus_for(grid: GridSpec, windowed: bool, metric=MINKOWSKI) -> Calculus:
    if not windowed:
        return Calculus(grid, time=None, metric=metric)
    return Calculus(grid, time="spectral" if grid.time_periodic else "fd", metric=metric)


def coulomb_phase(frame) -> np.ndarray:
    """``Phi = Delta^{-1} sum_k d_k phi1_k`` (mean zero, real)."""
    if isinstance(frame, DerivedFrame):
        phi1, grid = frame.phi[0, 1:], frame.grid
    else:
        phi1, grid = frame
    cal = Calculus(grid, time=None)
    div = cal.dx(phi1[0], 1) + cal.dx(phi1[1], 2) + cal.dx(phi1[2], 3)
    return np.real(cal.inv_lap(div))


def twist(frame: DerivedFrame, Phi: np.ndarray) -> GaugeFrame:
    Phi = np.asarray(Phi)
    if np.iscomplexobj(Phi):
        if np.abs(Phi.imag).max() > 1e-12:
            raise ContractError("Phi must be real")
        Phi = Phi.real
    return GaugeFrame(Phi, np.exp(-1j * Phi) * complex_frame(frame), frame.grid)


def untwist(gauge: GaugeFrame) -> DerivedFrame:
    phi = np.exp(1j * gauge.Phi) * gauge.psi
    return DerivedFrame(np.stack([phi.real, -phi.imag]), gauge.grid)


def bracket(psi, nu: int, j: int):
    """``psi1_nu psi2_j - psi2_nu psi1_j = Im(conj(psi_nu) psi_j)``."""
    return (np.conj(psi[nu]) * psi[j]).imag


def connection(gauge: GaugeFrame, torus: bool = True):
    """``a_nu`` for nu = 0..3 (list), and the mean part separately."""
    psi = gauge.psi
    cal = Calculus(gauge.grid, time=None)
    mean = [np.zeros(())] * 4
    if torus:
        phi1 = (np.exp(1j * gauge.Phi) * psi).real
        mean = [phi1[nu].mean(axis=(-3, -2, -1), keepdims=True) for nu in range(4)]
    a = []
    for nu in range(4):
        acc = sum(cal.inv_lap_partial(bracket(psi, nu, j), j) for j in (1, 2, 3))
        a.append(np.real(acc) + mean[nu])
    return a, mean


def _derivs(gauge: GaugeFrame, dpsi=None):
    """``D[beta][alpha] = d_beta psi_alpha`` and an interior-slice selector."""
    psi = gauge.psi
    cal = calculus_for(gauge.grid, gauge.windowed)
    if gauge.windowed:
        cut = slice(None) if gauge.grid.time_periodic else slice(2, psi.shape[1] - 2)
        D = [[cal.d(psi[al], be)[cut] for al in range(4)] for be in range(4)]
        return D, cut, True
    D = [[None] * 4] + [[cal.dx(psi[al], be) for al in range(4)] for be in (1, 2, 3)]
    if dpsi is not None:
        D[0] = [dpsi[al] for al in range(4)]
    return D, slice(None), dpsi is not None


def time_derivative_psi(gauge: GaugeFrame, frame: DerivedFrame, frame_dt: DerivedFrame):
    """Chain-rule ``d_t psi`` for a single slice given ``d_t phi``."""
    dphi = frame_dt.phi[0] - 1j * frame_dt.phi[1]
    cal = Calculus(gauge.grid, time=None)
    dPhi = np.real(cal.inv_lap(sum(cal.dx(frame_dt.phi[0, k], k) for k in (1, 2, 3))))
    return np.exp(-1j * gauge.Phi) * dphi - 1j * dPhi * gauge.psi, dPhi


def twisted_div_curl_residual(gauge: GaugeFrame, dpsi=None, torus: bool = True) -> ResidualReport:
    """Residuals of the twisted curl and divergence equations.

    Windowed gauges differentiate in time (spectrally when periodic, else with
    fourth-order differences on interior slices); single slices need ``dpsi``
    for any block involving ``t``.
    """
    D, cut, have_t = _derivs(gauge, dpsi)
    a, _ = connection(gauge, torus)
    psi = gauge.psi[:, cut]
    a = [x[cut] if np.ndim(x) == psi.ndim - 1 else x for x in a]
    eta = MINKOWSKI
    pairs = [(al, be) for al in range(4) for be in range(al + 1, 4) if have_t or al > 0]
    rel, ab = {}, {}

    def curl_block(sel):
        res, terms = [], []
        for al, be in sel:
            lhs_a, lhs_b = D[al][be], D[be][al]
            rhs = 1j * psi[be] * a[al] - 1j * psi[al] * a[be]
            res.append(lhs_a - lhs_b - rhs)
            terms += [lhs_a, lhs_b, rhs]
        return _rel(res, terms)

    rel["curl"], ab["curl"] = curl_block(pairs)
    rel["curl_spatial"], ab["curl_spatial"] = curl_block([p for p in pairs if p[0] > 0])
    if have_t:
        div = sum(eta[nu] * D[nu][nu] for nu in range(4))
        rhs = 1j * sum(eta[nu] * psi[nu] * a[nu] for nu in range(4))
        rel["div"], ab["div"] = _rel([div - rhs], [D[nu][nu] for nu in range(4)] + [rhs])
    return ResidualReport(rel, ab)


def dynamic_separation(gauge: GaugeFrame, dpsi=None) -> DynSep:
    """``Psi = sum_k R_k psi_k`` and ``chi_nu = psi_nu + R_nu Psi``.

    The ``nu = 0`` Riesz transform uses ``dpsi`` (the time derivative of the
    spatial components) when given, spectral time on periodic windows, or
    fourth-order differences on recorded windows.
    """
    psi = gauge.psi
    cal = calculus_for(gauge.grid, gauge.windowed)
    Psi = sum(cal.riesz(psi[k], k) for k in (1, 2, 3))
    R = [None] * 4
    for nu in (1, 2, 3):
        R[nu] = cal.riesz(Psi, nu)
    if dpsi is not None:
        dPsi = sum(cal.riesz(dpsi[k], k) for k in (1, 2, 3))
        R[0] = cal.inv_grad(dPsi)
    elif gauge.windowed:
        R[0] = cal.riesz(Psi, 0)
    else:
        R[0] = np.full_like(Psi, np.nan)
    R = np.stack(R)
    return DynSep(Psi, psi + R, R)


def chi_divergence(ds: DynSep, grid: GridSpec) -> np.ndarray:
    cal = Calculus(grid, time=None)
    return sum(cal.dx(ds.chi[j], j) for j in (1, 2, 3))


def elliptic_formula(gauge: GaugeFrame, torus: bool = True) -> np.ndarray:
    """``chi~_nu = i sum_i d_i Delta^{-1}(psi_nu a_i - psi_i a_nu)`` (+ mean of ``psi_nu`` on the torus)."""
    psi = gauge.psi
    a, _ = connection(gauge, torus)
    cal = Calculus(gauge.grid, time=None)
    out = []
    for nu in range(4):
        acc = sum(cal.inv_lap_partial(psi[nu] * a[i] - psi[i] * a[nu], i) for i in (1, 2, 3))
        val = 1j * acc
        if torus:
            val = val + psi[nu].mean(axis=(-3, -2, -1), keepdims=True)
        out.append(val)
    return np.stack(out)


def gauge_invariance_error(frame: DerivedFrame, gauge: GaugeFrame) -> dict:
    """Pointwise ``|psi| - |phi|`` and ``Im(psi_k conj psi_nu) - Im(phi_k conj phi_nu)``."""
    phi = complex_frame(frame)
    mag = float(np.abs(np.abs(gauge.psi) - np.abs(phi)).max())
    im = 0.0
    for k in range(4):
        for nu in range(4):
            d = (gauge.psi[k] * np.conj(gauge.psi[nu])).imag - (phi[k] * np.conj(phi[nu])).imag
            im = max(im, float(np.abs(d).max()))
    # the real-component form of the same quantity
    br = 0.0
    for k in range(4):
        for nu in range(4):
            lhs = frame.phi[0, k] * frame.phi[1, nu] - frame.phi[1, k] * frame.phi[0, nu]
            br = max(br, float(np.abs(lhs - (phi[k] * np.conj(phi[nu])).imag).max()))
    return {"modulus": mag, "imag": im, "bracket": br}


# ---------------------------------------------------------- gauge change

PHASE_CHOICES = {
    "exp": lambda u: np.exp(1j * u),
    "sin": np.sin,
    "bounded": lambda u: np.cos(u) / (1.0 + 0.25 * np.sin(u) ** 2),
}


def gauge_change_diagnostic(phi1_spatial, psi, grid: GridSpec, f_choice: str = "exp",
                            sigma: float = 0.1, mu: float = 0.01, ks=None):
    """Per-band ratio ``|| P_k(f(Delta^{-1} d_j phi_j) psi) ||_diag / c_k``.

    ``phi1_spatial`` is ``(3, t, n, n, n)`` and ``psi`` a ``(t, n, n, n)`` window.
    The diagnostic norm is the computable part of ``S[k]`` (energy,
    Strichartz and X components); the envelope ``c_k`` is built from the same
    diagnostic norm of ``P_k psi``.  Atomic PW/NFA pieces are not included.
    """
    from .norms import diag_envelope, s_k_diagnostic_value

    if f_choice not in PHASE_CHOICES:
        raise ValueError(f"f_choice must be one of {sorted(PHASE_CHOICES)}")
    f = PHASE_CHOICES[f_choice]
    cal = Calculus(grid, time=None)
    u = np.real(sum(cal.inv_lap_partial(phi1_spatial[j], j + 1) for j in range(3)))
    field = f(u) * psi
    lo, hi = grid.k_range()
    ks = list(range(lo, hi + 1)) if ks is None else list(ks)
    env = diag_envelope(psi, grid, sigma, mu, ks)
    rows = []
    for k in ks:
        num = s_k_diagnostic_value(field, grid, k, mu)
        ck = env[k]
        rows.append({"k": k, "c_k": ck, "norm": num, "ratio": (num / ck) if ck > 0 else 0.0})
    return {
        "header": "S[k] diagnostic subset: energy + Strichartz + X^{-1/2,1/2,inf}; PW/NFA atoms omitted",
        "f": f_choice,
        "rows": rows,
        "max_ratio": max((r["ratio"] for r in rows), default=0.0),
    }
