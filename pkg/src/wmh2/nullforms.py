r"""Trilinear null forms, the two exact identities and the I + II + III split.

Raising uses the calculus metric (``d^0 = d_0``, ``d^j = -d_j`` by default)
while ``box`` is always ``d_t^2 - Delta``.  Flipping the metric therefore
breaks the identities, which is the negative control.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gauge import GaugeFrame, DynSep, bracket, calculus_for, complex_frame
from .solver import DerivedFrame, _norm, _rel
from .spectral.calculus import MINKOWSKI, Calculus
from .spectral.grid import ContractError, GridSpec, SpacetimeField, fft3, ifft3

IDENTITY_TOL = 1e-10


def _inputs(fields, grid, metric, periodic_only=False):
    datas = []
    for f in fields:
        if isinstance(f, SpacetimeField):
            grid = f.grid if grid is None else grid
            datas.append(f.data)
        else:
            datas.append(np.asarray(f))
    if grid is None:
        raise TypeError("bare arrays need an explicit grid")
    if periodic_only and not grid.time_periodic:
        raise ContractError("exact identity checks need time-periodic fields")
    wrap = isinstance(fields[0], SpacetimeField)
    cal = calculus_for(grid, True, metric)
    return datas, grid, cal, (lambda d: SpacetimeField(d, grid)) if wrap else (lambda d: d)


def _ilp_sum(cal: Calculus, xs):
    """``sum_j Delta^{-1} d_j xs[j-1]`` with a single inverse transform."""
    acc = 0
    for j, x in enumerate(xs, start=1):
        acc = acc + fft3(x) * (-cal._ik[j - 1] * cal._k2inv)
    return ifft3(acc)


def q0_form(f, g, grid: GridSpec | None = None, metric=MINKOWSKI):
    """``Q_0(f, g) = d_nu f d^nu g``."""
    (a, b), grid, cal, wrap = _inputs((f, g), grid, metric)
    return wrap(cal.dot(cal.grad4(a), cal.grad4(b)))


def qnuj_form(f, g, nu: int, j: int, grid: GridSpec | None = None, metric=MINKOWSKI):
    """``Q_{nu j}(f, g) = d_j f d_nu g - d_nu f d_j g``."""
    (a, b), grid, cal, wrap = _inputs((f, g), grid, metric)
    return wrap(cal.d(a, j) * cal.d(b, nu) - cal.d(a, nu) * cal.d(b, j))


def _trilinear(cal, f, g, h):
    Rf = [cal.riesz(f, nu) for nu in range(4)]
    Rg = [cal.riesz(g, nu) for nu in range(4)]
    dh = [cal.up(h, nu) for nu in range(4)]
    return sum(_ilp_sum(cal, [Rf[nu] * Rg[j] - Rf[j] * Rg[nu] for j in (1, 2, 3)]) * dh[nu]
               for nu in range(4))


def trilinear_nullform(f, g, h, grid: GridSpec | None = None, metric=MINKOWSKI):
    """``sum_j (Delta^{-1} d_j [R_nu f R_j g - R_j f R_nu g]) d^nu h``; the outer factor is not inside the inverse."""
    (a, b, c), grid, cal, wrap = _inputs((f, g, h), grid, metric)
    return wrap(_trilinear(cal, a, b, c))


@dataclass
class IdentityCheck:
    residual: float        # relative, or absolute when both sides vanish
    absolute: float
    lhs_norm: float
    rhs_norm: float
    term_scale: float
    relative: bool

    def __float__(self):
        return self.residual


def _check(lhs, rhs_terms, signs) -> IdentityCheck:
    rhs = sum(s * t for s, t in zip(signs, rhs_terms))
    ab = _norm(lhs - rhs)
    ln, rn = _norm(lhs), _norm(rhs)
    scale = sum(_norm(t) for t in rhs_terms) + ln
    den = max(ln, rn)
    if den > 1e-12 * max(scale, 1e-300):
        return IdentityCheck(ab / den, ab, ln, rn, scale, True)
    # both sides vanish: report the residual against the size of the pieces
    return IdentityCheck(ab / scale if scale > 0 else 0.0, ab, ln, rn, scale, False)


def full_nullform_identity(f, g, h, grid: GridSpec | None = None, metric=MINKOWSKI) -> IdentityCheck:
    (f, g, h), grid, cal, _ = _inputs((f, g, h), grid, metric, periodic_only=True)
    lhs = 2 * _trilinear(cal, f, g, h)
    F, G = cal.inv_grad(f), cal.inv_grad(g)
    A = _ilp_sum(cal, [F * cal.riesz(g, j) for j in (1, 2, 3)])
    bh = cal.box(h)
    terms = [cal.box(A * h), cal.box(A) * h, A * bh, F * cal.box(G * h), F * cal.box(G) * h, F * G * bh]
    return _check(lhs, terms, (1, -1, -1, -1, 1, 1))


def special_identity(f, g, h, grid: GridSpec | None = None, metric=MINKOWSKI) -> IdentityCheck:
    (f, g, h), grid, cal, _ = _inputs((f, g, h), grid, metric, periodic_only=True)
    Rf = [cal.riesz(f, nu) for nu in range(4)]
    Rg = [cal.riesz(g, nu) for nu in range(4)]
    dh = [cal.up(h, nu) for nu in range(4)]
    lhs = 2 * sum(_ilp_sum(cal, [Rf[j] * Rg[nu] - Rf[nu] * Rg[j] for j in (1, 2, 3)]) * dh[nu]
                  for nu in range(4))
    G = cal.inv_grad(g)
    B = _ilp_sum(cal, [Rf[j] * G for j in (1, 2, 3)])
    last = 2 * G * sum(Rf[nu] * dh[nu] for nu in range(4))
    terms = [cal.box(B * h), B * cal.box(h), cal.box(B) * h, last]
    return _check(lhs, terms, (1, -1, -1, -1))


def fullnullform_identity_residual(f, g, h, grid: GridSpec | None = None, metric=MINKOWSKI) -> float:
    return full_nullform_identity(f, g, h, grid, metric).residual


def special_identity_residual(f, g, h, grid: GridSpec | None = None, metric=MINKOWSKI) -> float:
    return special_identity(f, g, h, grid, metric).residual


# ------------------------------------------------------------ I + II + III

def cubic_bracket(frame: DerivedFrame) -> np.ndarray:
    r"""``C_alpha = phi1_alpha (phi1.phi1 + phi2.phi2) + 2i phi1^nu (phi1_nu phi2_alpha - phi1_alpha phi2_nu)``

    in the components of the complex field ``phi = phi1 - i phi2`` (so the
    second component here is ``-phi2``).
    """
    eta = MINKOWSKI
    p1 = frame.phi[0]
    p2 = -frame.phi[1]
    s11 = sum(eta[n] * p1[n] * p1[n] for n in range(4))
    s22 = sum(eta[n] * p2[n] * p2[n] for n in range(4))
    s12 = sum(eta[n] * p1[n] * p2[n] for n in range(4))
    return np.stack([p1[a] * (s11 + s22) + 2j * (s11 * p2[a] - p1[a] * s12) for a in range(4)])


@dataclass
class Assembly:
    I: np.ndarray            # (4, ...)
    II: np.ndarray           # derived-sign main part
    II_mean: np.ndarray      # torus zero-mode part of the connection
    III: np.ndarray
    box_psi: np.ndarray
    box_Phi: np.ndarray
    box_Phi_sub: np.ndarray
    relative: float          # || box psi - (I + II + II_mean + III) || over term norms
    relative_flipped: float  # same with the sign of II reversed
    per_alpha: list
    box_Phi_gap: float       # direct vs substituted box Phi, relative

    @property
    def total(self):
        return self.I + self.II + self.II_mean + self.III


def assemble_I_II_III(gauge: GaugeFrame, frame: DerivedFrame, box_phi_path: str = "direct",
                      torus: bool = True) -> Assembly:
    """Assemble the three pieces of ``box psi_alpha`` over a window.

    ``II`` is ``2i a~^nu (d_nu psi_alpha + i d_nu Phi psi_alpha)`` with
    ``a~_nu = Delta^{-1} d_j (psi1_nu psi2_j - psi2_nu psi1_j)``; the reversed bracket
    order gives the opposite sign and is reported as ``relative_flipped``.
    """
    if not gauge.windowed:
        raise ContractError("assemble_I_II_III needs a time window")
    grid = gauge.grid
    cal = calculus_for(grid, True)
    nt = gauge.psi.shape[1]
    cut = slice(None) if grid.time_periodic else slice(2, nt - 2)
    eta = MINKOWSKI
    psi, Phi = gauge.psi, gauge.Phi

    dPhi = [cal.d(Phi, nu) for nu in range(4)]
    box_Phi = cal.box(Phi)
    # substituted path: box phi_k = 2i phi1^b d_b phi_k + C_k
    phi = complex_frame(frame)
    C = cubic_bracket(frame)
    p1 = frame.phi[0]
    box_phik = []
    for k in (1, 2, 3):
        adv = sum(eta[b] * p1[b] * cal.d(phi[k], b) for b in range(4))
        box_phik.append(np.real(2j * adv + C[k]))
    box_Phi_sub = np.real(_ilp_sum(cal, box_phik))
    bP = box_Phi if box_phi_path == "direct" else box_Phi_sub

    at = [np.real(sum(cal.inv_lap_partial(bracket(psi, nu, j), j) for j in (1, 2, 3))) for nu in range(4)]
    if torus:
        phi1 = (np.exp(1j * Phi) * psi).real
        abar = [phi1[nu].mean(axis=(-3, -2, -1), keepdims=True) for nu in range(4)]
    else:
        abar = [0.0] * 4
    grad_Phi_sq = sum(eta[nu] * dPhi[nu] ** 2 for nu in range(4))

    I, II, IIm, III, box_psi = [], [], [], [], []
    for al in range(4):
        cov = [cal.d(psi[al], nu) + 1j * dPhi[nu] * psi[al] for nu in range(4)]
        I.append((-1j * bP - grad_Phi_sq) * psi[al])
        II.append(2j * sum(eta[nu] * at[nu] * cov[nu] for nu in range(4)))
        IIm.append(2j * sum(eta[nu] * abar[nu] * cov[nu] for nu in range(4)))
        III.append(np.exp(-1j * Phi) * C[al])
        box_psi.append(cal.box(psi[al]))
    I, II, IIm, III, box_psi = (np.stack(x)[:, cut] for x in (I, II, IIm, III, box_psi))

    def rel(sign):
        res, terms, per = [], [], []
        for al in range(4):
            r = box_psi[al] - (I[al] + sign * II[al] + IIm[al] + III[al])
            ts = [box_psi[al], I[al], II[al], IIm[al], III[al]]
            res.append(r)
            terms += ts
            per.append(_rel([r], ts)[0])
        return _rel(res, terms)[0], per

    relative, per = rel(1.0)
    flipped, _ = rel(-1.0)
    gap = _rel([box_Phi[cut] - box_Phi_sub[cut]], [box_Phi[cut], box_Phi_sub[cut]])[0]
    return Assembly(I, II, IIm, III, box_psi, box_Phi[cut], box_Phi_sub[cut], relative, flipped, per, gap)


# ---------------------------------------------------- dynamic separation of II

@dataclass
class IISplit:
    direct: np.ndarray
    main: np.ndarray
    err_mixed: np.ndarray    # one dynamic, one elliptic factor
    err_elliptic: np.ndarray  # both elliptic

    @property
    def residual(self) -> float:
        d = _norm(self.direct)
        r = _norm(self.direct - (self.main + self.err_mixed + self.err_elliptic))
        return r / d if d > 0 else r


def _bracket_term(cal, u, v, dh):
    """``sum_j (Delta^{-1} d_j [u_j v_nu - v_j u_nu]) d^nu h`` for real 4-lists ``u, v``."""
    return sum(_ilp_sum(cal, [u[j] * v[nu] - v[j] * u[nu] for j in (1, 2, 3)]) * dh[nu] for nu in range(4))


def nullform_substitution(gauge: GaugeFrame, ds: DynSep, alpha: int) -> IISplit:
    """Split the first term of II (reversed bracket order) by ``psi^a = -R Psi^a + chi^a``."""
    cal = calculus_for(gauge.grid, gauge.windowed)
    psi = gauge.psi
    dh = [cal.up(psi[alpha], nu) for nu in range(4)]
    p1, p2 = [psi[nu].real for nu in range(4)], [psi[nu].imag for nu in range(4)]
    D1 = [-ds.R_Psi[nu].real for nu in range(4)]
    D2 = [-ds.R_Psi[nu].imag for nu in range(4)]
    X1 = [ds.chi[nu].real for nu in range(4)]
    X2 = [ds.chi[nu].imag for nu in range(4)]
    direct = _bracket_term(cal, p1, p2, dh)
    main = _bracket_term(cal, D1, D2, dh)
    mixed = _bracket_term(cal, D1, X2, dh) + _bracket_term(cal, X1, D2, dh)
    ell = _bracket_term(cal, X1, X2, dh)
    return IISplit(direct, main, mixed, ell)
