r"""Method-of-lines evolution of wave maps into the hyperbolic plane.

The map :math:`(x, y)` with :math:`y > 0` obeys

.. math::
    \Box x = \tfrac{2}{y}\,\partial_\nu x\,\partial^\nu y, \qquad
    \Box y = -\tfrac{1}{y}\left(\partial_\nu x\,\partial^\nu x - \partial_\nu y\,\partial^\nu y\right),

integrated with classical RK4 and spectral derivatives on the periodic box.
The quadratic forms are dealiased with the 2/3 rule before division by ``y``.
From a state we derive the frame fields :math:`\phi^1_\alpha = \partial_\alpha x/y`,
:math:`\phi^2_\alpha = \partial_\alpha y/y` and test the first-order system they obey.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.fft as sfft
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from . import _accel
from .spectral.calculus import Calculus
from .spectral.grid import ContractError, GridSpec, SpacetimeField
from .spectral.multipliers import sobolev_norm

BLOWUP_THRESHOLD = 1e-3
GROWTH_LIMIT = 10.0


class BlowUpError(RuntimeError):
    def __init__(self, msg, state=None, dump=None):
        super().__init__(msg)
        self.state = state
        self.dump = dump


class InstabilityError(RuntimeError):
    def __init__(self, msg, state=None):
        super().__init__(msg)
        self.state = state


@dataclass(frozen=True, eq=False)
class WaveMapState:
    x: np.ndarray
    y: np.ndarray
    xt: np.ndarray
    yt: np.ndarray
    grid: GridSpec
    t: float = 0.0
    dealias: bool = True   # 2/3 rule on the quadratic products

    def arrays(self):
        return self.x, self.y, self.xt, self.yt

    def replace(self, x, y, xt, yt, t) -> "WaveMapState":
        return WaveMapState(x, y, xt, yt, self.grid, t, self.dealias)

    def with_dealias(self, on: bool) -> "WaveMapState":
        return WaveMapState(self.x, self.y, self.xt, self.yt, self.grid, self.t, bool(on))


def constant_map(grid: GridSpec, x0: float = 0.0, y0: float = 1.0) -> WaveMapState:
    z = np.zeros(grid.shape)
    return WaveMapState(z + x0, z + y0, z.copy(), z.copy(), grid, 0.0)


def geodesic_state(grid: GridSpec, rate: float) -> WaveMapState:
    """``x = 0``, ``y = e^{rate t}``: spatially constant, solves ``y'' = (y')^2 / y``."""
    z = np.zeros(grid.shape)
    return WaveMapState(z.copy(), z + 1.0, z.copy(), z + rate, grid, 0.0)


def geodesic_order(grid: GridSpec, rate: float = 2.0, T: float = 1.0, dts=(0.1, 0.05, 0.025)) -> dict:
    """Errors against ``e^{rate T}`` on a dt ladder and the fitted temporal order."""
    errs = []
    for dt in dts:
        rec = run(geodesic_state(grid, rate), T, dt, stride=int(round(T / dt)), diagnostics=False)
        errs.append(float(np.abs(rec.states[-1].y - math.exp(rate * T)).max()))
    order = np.polyfit(np.log(dts), np.log(errs), 1)[0]
    return {"dts": tuple(dts), "errors": errs, "order": float(order)}


# ---------------------------------------------------------------- real FFTs

class _RealSpectral:
    _cache: dict = {}

    def __new__(cls, grid: GridSpec):
        key = (grid.n, float(grid.length))
        obj = cls._cache.get(key)
        if obj is None:
            obj = super().__new__(cls)
            obj._setup(grid)
            cls._cache[key] = obj
        return obj

    def _setup(self, grid):
        n, L = grid.n, grid.length
        m = sfft.fftfreq(n, 1.0 / n)
        mz = sfft.rfftfreq(n, 1.0 / n)
        k = 2 * math.pi * m / L
        kz = 2 * math.pi * mz / L
        kd = k.copy()
        kd[n // 2] = 0.0
        kzd = kz.copy()
        kzd[-1] = 0.0
        self.shape = grid.shape
        self.ik = (1j * kd[:, None, None], 1j * kd[None, :, None], 1j * kzd[None, None, :])
        # Laplacian as the square of the Nyquist-free gradient, so the discrete chain rule closes
        self.k2 = kd[:, None, None] ** 2 + kd[None, :, None] ** 2 + kzd[None, None, :] ** 2
        cut = n / 3.0
        self.dealias = ((np.abs(m)[:, None, None] < cut) & (np.abs(m)[None, :, None] < cut)
                        & (mz[None, None, :] < cut)).astype(float)

    def fwd(self, a):
        return sfft.rfftn(a)

    def inv(self, c):
        return sfft.irfftn(c, s=self.shape)

    def grad(self, c):
        return np.stack([self.inv(c * ik) for ik in self.ik])

    def lap(self, c):
        return self.inv(-self.k2 * c)

    def filt(self, a):
        return self.inv(self.fwd(a) * self.dealias)


def wave_rhs(state: WaveMapState):
    """Second time derivatives ``(x_tt, y_tt)``."""
    y = state.y
    if not np.all(y > 0):
        raise BlowUpError(f"y left the half-plane: min y = {float(y.min()):.3e}", state)
    sp = _RealSpectral(state.grid)
    cx, cy = sp.fwd(state.x), sp.fwd(state.y)
    gx, gy = sp.grad(cx), sp.grad(cy)
    qxy, qd = _accel.wave_products(state.xt, state.yt, gx, gy)
    if state.dealias:
        qxy, qd = sp.filt(qxy), sp.filt(qd)
    xtt = sp.lap(cx) + 2.0 * qxy / y
    ytt = sp.lap(cy) - qd / y
    return xtt, ytt


def cfl_limit(grid: GridSpec, c_cfl: float) -> float:
    return c_cfl * grid.length / (grid.n * math.pi)


def step(state: WaveMapState, dt: float) -> WaveMapState:
    """One classical RK4 step of the first-order system."""
    x, y, xt, yt = state.arrays()

    def f(s):
        a, b = wave_rhs(s)
        return s.xt, s.yt, a, b

    def add(s, k, h):
        return s.replace(s.x + h * k[0], s.y + h * k[1], s.xt + h * k[2], s.yt + h * k[3], s.t + h)

    k1 = f(state)
    k2 = f(add(state, k1, dt / 2))
    k3 = f(add(state, k2, dt / 2))
    k4 = f(add(state, k3, dt))
    w = dt / 6.0
    new = [u + w * (a + 2 * b + 2 * c + d) for u, a, b, c, d in zip((x, y, xt, yt), k1, k2, k3, k4)]
    return state.replace(*new, state.t + dt)


# ------------------------------------------------------------------ frames

@dataclass(frozen=True, eq=False)
class DerivedFrame:
    """``phi[a-1, alpha]`` for a in {1, 2}, alpha in 0..3; optional leading time axis."""

    phi: np.ndarray
    grid: GridSpec

    @property
    def windowed(self) -> bool:
        return self.phi.ndim == 6

    def component(self, a: int, alpha: int) -> np.ndarray:
        return self.phi[a - 1, alpha]


def _spectral(grid: GridSpec) -> Calculus:
    return Calculus(grid, time=None)


def derived_frame(state: WaveMapState) -> DerivedFrame:
    y = state.y
    if not np.all(y > 0):
        raise BlowUpError("derived frame needs y > 0", state)
    sp = _RealSpectral(state.grid)
    gx = sp.grad(sp.fwd(state.x))
    gl = sp.grad(sp.fwd(np.log(y)))
    phi = np.empty((2, 4) + state.grid.shape)
    phi[0, 0] = state.xt / y
    phi[1, 0] = state.yt / y
    phi[0, 1:] = gx / y
    phi[1, 1:] = gl
    return DerivedFrame(phi, state.grid)


def frame_time_derivative(state: WaveMapState) -> DerivedFrame:
    """``d_t phi`` by the chain rule, with ``x_tt, y_tt`` from :func:`wave_rhs`."""
    x, y, xt, yt = state.arrays()
    xtt, ytt = wave_rhs(state)
    sp = _RealSpectral(state.grid)
    gx = sp.grad(sp.fwd(x))
    gxt = sp.grad(sp.fwd(xt))
    d = np.empty((2, 4) + state.grid.shape)
    d[0, 0] = xtt / y - xt * yt / y ** 2
    d[1, 0] = ytt / y - (yt / y) ** 2
    d[0, 1:] = gxt / y - gx * (yt / y ** 2)
    d[1, 1:] = sp.grad(sp.fwd(yt / y))
    return DerivedFrame(d, state.grid)


@dataclass
class ResidualReport:
    relative: dict
    absolute: dict

    def __getitem__(self, key):
        return self.relative[key]

    def max(self) -> float:
        return max(self.relative.values()) if self.relative else 0.0


def _norm(a) -> float:
    return math.sqrt(float(np.sum(np.abs(a) ** 2)))


def _rel(res, terms):
    """Residual norm relative to the summed norms of the individual terms."""
    r = math.sqrt(sum(_norm(a) ** 2 for a in res))
    s = sum(_norm(a) for a in terms)
    return (0.0 if s == 0.0 else r / s), r


def _frame_derivs(frame: DerivedFrame, frame_dt: DerivedFrame | None):
    """``D[a][beta][alpha] = d_beta phi^a_alpha`` plus the interior slice selector."""
    phi = frame.phi
    if frame.windowed:
        cal = Calculus(frame.grid, time="fd")
        cut = slice(2, phi.shape[2] - 2)
        D = [[[cal.d(phi[a, al], be)[cut] for al in range(4)] for be in range(4)] for a in range(2)]
        P = phi[:, :, cut]
    else:
        cal = _spectral(frame.grid)
        D = [[[None] * 4 for _ in range(4)] for _ in range(2)]
        for a in range(2):
            for al in range(4):
                for be in range(1, 4):
                    D[a][be][al] = np.real(cal.dx(phi[a, al], be))
                D[a][0][al] = None if frame_dt is None else frame_dt.phi[a, al]
        P = phi
    return D, P


def div_curl_residual(frame: DerivedFrame, frame_dt: DerivedFrame | None = None) -> ResidualReport:
    """L2 residuals of the first-order system satisfied by the frame fields.

    Each residual is normalised by the sum of the norms of the terms it is built
    from, so cancellation between large linear terms does not hide errors.

    With :math:`\\phi^2 = \\partial y / y` the system reads

    * curl 1: ``d_b phi1_a - d_a phi1_b = phi1_b phi2_a - phi1_a phi2_b``
    * curl 2: ``d_b phi2_a - d_a phi2_b = 0``
    * div 1:  ``d^a phi1_a = phi1 . phi2``
    * div 2:  ``d^a phi2_a = -phi1 . phi1``

    Windowed frames use fourth-order time differences (interior slices only);
    single-slice frames take ``d_t phi`` from ``frame_dt`` and otherwise report
    spatial blocks only.
    """
    D, P = _frame_derivs(frame, frame_dt)
    have_t = D[0][0][0] is not None
    eta = (1.0, -1.0, -1.0, -1.0)
    pairs = [(a, b) for a in range(4) for b in range(a + 1, 4) if have_t or a > 0]
    rel, ab = {}, {}

    t1 = [D[0][b][a] for a, b in pairs] + [D[0][a][b] for a, b in pairs]
    rhs1 = [P[0, b] * P[1, a] - P[0, a] * P[1, b] for a, b in pairs]
    res1 = [D[0][b][a] - D[0][a][b] - r for (a, b), r in zip(pairs, rhs1)]
    rel["eq1"], ab["eq1"] = _rel(res1, t1 + rhs1)
    t2 = [D[1][b][a] for a, b in pairs] + [D[1][a][b] for a, b in pairs]
    rel["eq2"], ab["eq2"] = _rel([D[1][b][a] - D[1][a][b] for a, b in pairs], t2)
    sp = [(a, b) for a, b in pairs if a > 0]
    rel["eq2_spatial"], ab["eq2_spatial"] = _rel(
        [D[1][b][a] - D[1][a][b] for a, b in sp],
        [D[1][b][a] for a, b in sp] + [D[1][a][b] for a, b in sp])
    if have_t:
        d12 = sum(eta[a] * P[0, a] * P[1, a] for a in range(4))
        d11 = sum(eta[a] * P[0, a] * P[0, a] for a in range(4))
        res3 = sum(eta[a] * D[0][a][a] for a in range(4)) - d12
        res4 = sum(eta[a] * D[1][a][a] for a in range(4)) + d11
        rel["eq3"], ab["eq3"] = _rel([res3], [D[0][a][a] for a in range(4)] + [d12])
        rel["eq4"], ab["eq4"] = _rel([res4], [D[1][a][a] for a in range(4)] + [d11])
    return ResidualReport(rel, ab)


# -------------------------------------------------------------- functionals

def energy(frame: DerivedFrame) -> float:
    """``int sum_{a,alpha} (phi^a_alpha)^2 dx``"""
    return float(np.sum(frame.phi ** 2)) * frame.grid.cell


def hdot_half(f, grid: GridSpec | None = None) -> float:
    """Homogeneous H^{1/2} norm of a field, or the l2 sum over the eight frame fields."""
    if isinstance(f, DerivedFrame):
        comps = f.phi.reshape((8,) + f.phi.shape[2:])
        return math.sqrt(sum(sobolev_norm(c, f.grid, 0.5) ** 2 for c in comps))
    if hasattr(f, "grid") and hasattr(f, "data"):
        return sobolev_norm(f.data, f.grid, 0.5)
    if grid is None:
        raise TypeError("bare arrays need a grid")
    return sobolev_norm(np.asarray(f), grid, 0.5)


# ----------------------------------------------------------- initial data

@dataclass(frozen=True)
class BumpSpec:
    """Smooth compactly supported profile ``exp(-c r^2/(1-r^2))`` of radius ``radius``.

    The four data components use the same profile with small centre offsets so
    that the gradients of ``x`` and ``y`` are not parallel.
    """

    radius: float = 2.5
    sharpness: float = 8.0
    offsets: tuple = ((0.5, 0.0, 0.0), (0.0, 0.5, 0.0), (0.0, 0.0, 0.5), (-0.3, -0.3, 0.0))
    weights: tuple = (1.0, 0.5, 0.5)   # A : B : C

    @property
    def support_radius(self) -> float:
        return self.radius + max(math.sqrt(sum(c * c for c in o)) for o in self.offsets)

    def profile(self, grid: GridSpec, which: int) -> np.ndarray:
        c = grid.length / 2
        x1, x2, x3 = grid.coords()
        o = self.offsets[which]
        r2 = ((x1 - c - o[0]) ** 2 + (x2 - c - o[1]) ** 2 + (x3 - c - o[2]) ** 2) / self.radius ** 2
        out = np.zeros(grid.shape)
        inside = r2 < 1
        out[inside] = np.exp(-self.sharpness * r2[inside] / (1 - r2[inside]))
        return out


def _data_from_scale(grid, bump: BumpSpec, s: float) -> WaveMapState:
    A, B, C = (s * w for w in bump.weights)
    return WaveMapState(A * bump.profile(grid, 0), 1.0 + B * bump.profile(grid, 1),
                        C * bump.profile(grid, 2), C * bump.profile(grid, 3), grid, 0.0)


def initial_data(grid: GridSpec, epsilon: float, bump: BumpSpec = BumpSpec()) -> WaveMapState:
    """Bump data rescaled so the H^{1/2} norm of the frame equals ``epsilon``."""
    if not epsilon > 0:
        raise ContractError(f"epsilon must be positive to be reachable, got {epsilon!r}")
    if bump.support_radius >= grid.length / 2:
        raise ContractError("bump support does not fit strictly inside the box")
    s_max = 0.5 / bump.weights[1] if bump.weights[1] > 0 else 1.0

    def norm(s):
        return hdot_half(derived_frame(_data_from_scale(grid, bump, s)))

    top = norm(s_max * (1 - 1e-12))
    if top < epsilon:
        raise ContractError(f"epsilon={epsilon:g} unreachable: largest admissible amplitude gives {top:g}")
    s = brentq(lambda s: norm(s) - epsilon, 0.0, s_max * (1 - 1e-12), xtol=1e-15, rtol=1e-13)
    return _data_from_scale(grid, bump, s)


# ------------------------------------------------------------------- runs

DIAG_COLUMNS = ("t", "energy", "hdot_half", "min_y", "res_eq1", "res_eq2", "res_eq2_spatial", "res_eq3", "res_eq4")


@dataclass
class RunRecord:
    grid: GridSpec
    dt: float
    stride: int
    states: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    def window_grid(self) -> GridSpec:
        return self.grid.with_time(len(self.states), self.dt * self.stride, False)

    def stack(self, fn) -> np.ndarray:
        return np.stack([fn(s) for s in self.states])

    def field(self, fn) -> SpacetimeField:
        return SpacetimeField(self.stack(fn).astype(complex), self.window_grid())

    def window_frame(self) -> DerivedFrame:
        phi = np.stack([derived_frame(s).phi for s in self.states], axis=2)
        return DerivedFrame(phi, self.window_grid())


def snapshot_diagnostics(state: WaveMapState) -> dict:
    fr = derived_frame(state)
    rep = div_curl_residual(fr, frame_time_derivative(state))
    row = {"t": state.t, "energy": energy(fr), "hdot_half": hdot_half(fr), "min_y": float(state.y.min())}
    for k in ("eq1", "eq2", "eq2_spatial", "eq3", "eq4"):
        row["res_" + k] = rep.relative.get(k, 0.0)
    return row


def _dump_state(state: WaveMapState, dump_dir) -> Path | None:
    if dump_dir is None:
        return None
    from .spectral.dump import write_dump

    dump_dir = Path(dump_dir)
    dump_dir.mkdir(parents=True, exist_ok=True)
    g = state.grid.with_time(4, 1.0, False)
    path = dump_dir / f"blowup_t{state.t:.6f}.wmh2"
    write_dump(path, SpacetimeField(np.stack(state.arrays()).astype(complex), g))
    return path


def run(state: WaveMapState, T: float, dt: float, stride: int = 1, c_cfl: float | None = None,
        diagnostics: bool = True, dump_dir=None) -> RunRecord:
    """Integrate to ``t0 + T``; snapshots every ``stride`` steps (``dt < 0`` runs backwards)."""
    if c_cfl is not None and abs(dt) > cfl_limit(state.grid, c_cfl) * (1 + 1e-12):
        raise ContractError(f"|dt|={abs(dt):g} exceeds the stability bound {cfl_limit(state.grid, c_cfl):g}")
    steps = T / abs(dt)
    nsteps = int(round(steps))
    if abs(steps - nsteps) > 1e-9 * max(1.0, steps):
        raise ContractError(f"T={T:g} is not a whole number of steps of {abs(dt):g}")
    if nsteps % stride:
        raise ContractError(f"{nsteps} steps is not a multiple of stride {stride}")
    rec = RunRecord(state.grid, dt, stride)
    e0 = None
    cur = state
    for i in range(nsteps + 1):
        if i:
            cur = step(cur, dt)
        ymin = float(cur.y.min())
        if not ymin > BLOWUP_THRESHOLD:
            raise BlowUpError(f"min y = {ymin:.3e} below {BLOWUP_THRESHOLD:g} at t = {cur.t:.6f}",
                              cur, _dump_state(cur, dump_dir))
        if i % stride == 0:
            rec.states.append(cur)
            if diagnostics:
                row = snapshot_diagnostics(cur)
                rec.diagnostics.append(row)
                e = row["energy"]
                if e0 is None:
                    e0 = e
                elif e0 > 0 and e > GROWTH_LIMIT * e0:
                    raise InstabilityError(f"energy grew {e / e0:.2f}x by t = {cur.t:.6f}", cur)
    return rec


# ---------------------------------------------------------- reconstruction

@dataclass
class Reconstruction:
    x: np.ndarray
    y: np.ndarray
    error_x: float
    error_y: float

    @property
    def error(self) -> float:
        return max(self.error_x, self.error_y)


def reconstruct_map(record: RunRecord, base: int = 0) -> Reconstruction:
    """Integrate ``x_t = y phi1_0``, ``y_t = y phi2_0`` from the snapshot ``base``.

    ``y`` is the exponential of the integrated ``phi2_0``; both time integrals
    use not-a-knot cubic splines through the snapshots.
    """
    states = record.states[base:]
    t = np.array([s.t for s in states])
    shape = states[0].x.shape
    if len(states) < 2:
        return Reconstruction(states[0].x[None].copy(), states[0].y[None].copy(), 0.0, 0.0)
    p1 = np.stack([(s.xt / s.y).ravel() for s in states])
    p2 = np.stack([(s.yt / s.y).ravel() for s in states])
    sgn = 1.0 if t[-1] >= t[0] else -1.0
    tt = sgn * (t - t[0])
    kind = "not-a-knot" if len(t) >= 4 else "natural"
    logy = CubicSpline(tt, p2, axis=0, bc_type=kind).antiderivative()(tt) * sgn
    y = states[0].y.ravel()[None] * np.exp(logy)
    x = states[0].x.ravel()[None] + sgn * CubicSpline(tt, y * p1, axis=0, bc_type=kind).antiderivative()(tt)
    xs = np.stack([s.x.ravel() for s in states])
    ys = np.stack([s.y.ravel() for s in states])
    return Reconstruction(x.reshape((-1,) + shape), y.reshape((-1,) + shape),
                          float(np.abs(x - xs).max()), float(np.abs(y - ys).max()))
