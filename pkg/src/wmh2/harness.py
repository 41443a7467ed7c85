"""Orchestration behind the CLI: verification checks, runs, analysis and scans."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__, _accel
from .config import RunConfig
from .spectral import multipliers as mp
from .spectral.calculus import FLIPPED, MINKOWSKI
from .spectral.grid import GridSpec, SpacetimeField

ALGEBRA_TOL = 1e-12


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tol: float
    passed: bool

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name:<28s} {self.value:.3e}  (tol {self.tol:.1e})"


def _check(name, value, tol) -> Check:
    v = float(value)
    return Check(name, v, tol, bool(v < tol))


# ------------------------------------------------------------ verification

def multiplier_algebra(grid: GridSpec, seed=0) -> list[Check]:
    from .synth import random_spatial

    cal_grid = grid.spatial()
    # per-axis band n/8 keeps |xi| inside the bands the partition covers
    f = random_spatial(cal_grid, seed, band=cal_grid.n // 8)
    scale = float(np.abs(f).max())
    lo, hi = cal_grid.k_range()
    pu = sum(mp.lp_project(f, k, cal_grid) for k in range(lo, hi + 1)) - f
    rr = sum(mp.riesz_spatial(mp.riesz_spatial(f, j, grid=cal_grid), j, grid=cal_grid) for j in (1, 2, 3)) + f
    dd = sum(mp.partial(mp.inv_lap_partial(f, j, grid=cal_grid), j, grid=cal_grid) for j in (1, 2, 3)) - f
    l2 = mp.l2_norm(f, cal_grid)
    pv = abs(l2 - mp.l2_norm_fourier(f, cal_grid)) / l2
    return [
        _check("partition_of_unity", np.abs(pu).max() / scale, ALGEBRA_TOL),
        _check("riesz_square_sum", np.abs(rr).max() / scale, ALGEBRA_TOL),
        _check("div_inv_lap_grad", np.abs(dd).max() / scale, ALGEBRA_TOL),
        _check("parseval", pv, ALGEBRA_TOL),
    ]


def identity_checks(grid: GridSpec, seeds, metric=MINKOWSKI) -> list[Check]:
    from .nullforms import IDENTITY_TOL, full_nullform_identity, special_identity
    from .synth import trig_triple

    # widest bands whose cubic products stay alias free
    band = max(1, min(4, (grid.n // 2 - 1) // 3))
    tband = max(1, min(4, (grid.t_samples // 2 - 1) // 3))
    full, spec = 0.0, 0.0
    for s in seeds:
        f, g, h = trig_triple(grid, s, band, tband)
        full = max(full, full_nullform_identity(f, g, h, metric=metric).residual)
        spec = max(spec, special_identity(f, g, h, metric=metric).residual)
    return [_check("full_nullform_identity", full, IDENTITY_TOL), _check("special_identity", spec, IDENTITY_TOL)]


def _random_frame(grid: GridSpec, seed):
    from .solver import DerivedFrame
    from .synth import random_spatial

    phi = random_spatial(grid.spatial(), seed, band=grid.n // 4 - 1, real=True, lead=(2, 4))
    return DerivedFrame(phi + 0.3, grid.spatial())


def gauge_checks(grid: GridSpec, seeds) -> list[Check]:
    from .gauge import (GaugeFrame, chi_divergence, coulomb_phase, dynamic_separation, gauge_invariance_error,
                        twist, untwist)
    from .synth import random_spatial

    sp = grid.spatial()
    chi = trip = mod = im = 0.0
    for s in seeds:
        psi = random_spatial(sp, 100 + s, band=sp.n // 4 - 1, lead=(4,))
        ds = dynamic_separation(GaugeFrame(np.zeros(sp.shape), psi, sp))
        chi = max(chi, float(np.abs(chi_divergence(ds, sp)).max()) / float(np.abs(psi).max()))
        fr = _random_frame(grid, 200 + s)
        gf = twist(fr, coulomb_phase(fr))
        back = untwist(gf)
        trip = max(trip, float(np.abs(back.phi - fr.phi).max()) / float(np.abs(fr.phi).max()))
        err = gauge_invariance_error(fr, gf)
        mod = max(mod, err["modulus"])
        im = max(im, err["imag"], err["bracket"])
    return [
        _check("chi_divergence", chi, ALGEBRA_TOL),
        _check("twist_round_trip", trip, ALGEBRA_TOL),
        _check("gauge_modulus", mod, ALGEBRA_TOL),
        _check("gauge_bracket", im, ALGEBRA_TOL),
    ]


def verification_grid(cfg: RunConfig) -> GridSpec:
    nt = cfg.verify_t_samples
    return GridSpec(cfg.verify_n, 2 * math.pi, nt, 2 * math.pi / nt, True)


def run_verify(cfg: RunConfig) -> list[Check]:
    g = verification_grid(cfg)
    seeds = [cfg.seed + i for i in range(cfg.seeds)]
    metric = FLIPPED if cfg.flip_signature else MINKOWSKI
    return multiplier_algebra(g, cfg.seed) + identity_checks(g, seeds, metric) + gauge_checks(g, seeds)


# ------------------------------------------------------------------ runs

def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([_cell(x) for x in r])


def _cell(x):
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, (np.floating,)):
        return repr(float(x))
    return x


def run_simulation(cfg: RunConfig, out: Path) -> tuple[object, list[Check]]:
    from .solver import DIAG_COLUMNS, constant_map, initial_data, run
    from .spectral.dump import write_dump

    g = cfg.grid()
    T = cfg.horizon()
    nsteps = int(round(T / cfg.dt))
    nsteps -= nsteps % cfg.stride
    if nsteps <= 0:
        raise ValueError(f"horizon {T:g} shorter than one stride of {cfg.stride} steps")
    state = constant_map(g) if cfg.epsilon == 0 else initial_data(g, cfg.epsilon, cfg.bump())
    rec = run(state.with_dealias(cfg.dealias), nsteps * cfg.dt, cfg.dt, cfg.stride, cfg.c_cfl)
    snap = out / "snapshots"
    snap.mkdir(parents=True, exist_ok=True)
    g4 = g.with_time(4, 1.0, False)
    for i, s in enumerate(rec.states):
        write_dump(snap / f"snap_{i:04d}.wmh2", SpacetimeField(np.stack(s.arrays()).astype(complex), g4))
    _write_csv(out / "diagnostics.csv", DIAG_COLUMNS, [[r[c] for c in DIAG_COLUMNS] for r in rec.diagnostics])
    e = [r["energy"] for r in rec.diagnostics]
    drift = max(abs(x - e[0]) for x in e) / e[0] if e[0] > 0 else max(abs(x) for x in e)
    return rec, [_check("energy_drift", drift, 1e-8)]


def load_run(run_dir: Path, cfg: RunConfig):
    from .solver import RunRecord, WaveMapState
    from .spectral.dump import read_dump

    files = sorted((Path(run_dir) / "snapshots").glob("snap_*.wmh2"))
    if not files:
        raise FileNotFoundError(f"no snapshots under {run_dir}")
    with open(Path(run_dir) / "diagnostics.csv") as fh:
        times = [float(r["t"]) for r in csv.DictReader(fh)]
    rec = RunRecord(None, cfg.dt, cfg.stride)
    for f, t in zip(files, times):
        d = read_dump(f)
        g = d.grid.spatial()
        x, y, xt, yt = (d.data[i].real.copy() for i in range(4))
        rec.states.append(WaveMapState(x, y, xt, yt, g, t))
    rec.grid = rec.states[0].grid
    return rec


def envelope_series(gauge, sigma: float):
    """Envelopes of every snapshot of a windowed gauge frame."""
    from .norms import band_norms, envelope_from_bands

    g = gauge.grid.spatial()
    envs = []
    for i in range(gauge.psi.shape[1]):
        ks, b = band_norms(gauge.psi[:, i], g)
        envs.append(envelope_from_bands(ks, b, sigma))
    return envs


def envelope_growth(envs) -> float:
    c0 = envs[0].values
    worst = 0.0
    for e in envs:
        r = np.divide(e.values, c0, out=np.zeros_like(c0), where=c0 > 0)
        worst = max(worst, float(r.max()))
    return worst


def run_analysis(cfg: RunConfig, run_dir: Path, out: Path) -> list[Check]:
    from .gauge import coulomb_phase, gauge_change_diagnostic, twist
    from .norms import s_k_diagnostic

    rec = load_run(run_dir, cfg)
    fr = rec.window_frame()
    gf = twist(fr, coulomb_phase(fr))
    envs = envelope_series(gf, cfg.sigma)
    rows = []
    for t, e in zip(rec.times, envs):
        for k, c, b in zip(e.ks, e.values, e.band_norms):
            rows.append((float(t), k, float(b), float(c), float(c / envs[0][k]) if envs[0][k] > 0 else 0.0))
    _write_csv(out / "envelopes.csv", ("t", "k", "band_norm", "c_k", "ratio_to_t0"), rows)
    viol = max(e.two_sided_violation() for e in envs)
    growth = envelope_growth(envs)

    wg = fr.grid
    lo, hi = wg.k_range()
    nrows = []
    for alpha in range(4):
        f = SpacetimeField(gf.psi[alpha], wg)
        for k in range(lo, hi + 1):
            rep = s_k_diagnostic(f, k, cfg.mu, project=True)
            nrows += [(alpha,) + r for r in rep.rows()]
    _write_csv(out / "norms.csv", ("alpha", "k", "component", "value", "bound"), nrows)

    grows = []
    for choice in ("exp", "bounded"):
        d = gauge_change_diagnostic(fr.phi[0, 1:], gf.psi[1], wg, choice, cfg.sigma, cfg.mu)
        grows += [(choice, r["k"], r["c_k"], r["norm"], r["ratio"]) for r in d["rows"]]
    _write_csv(out / "gauge_change.csv", ("f", "k", "c_k", "norm", "ratio"), grows)
    (out / "gauge_change_header.txt").write_text(d["header"] + "\n")
    return [_check("envelope_two_sided", viol, 1e-14), Check("envelope_growth", growth, 2.0, growth <= 2.0)]


def run_scan(cfg: RunConfig, out: Path) -> list[Check]:
    from .norms import bernstein_stability, crux_ratio, nullform_decay_scan
    from .spectral.caps import cap_cover, cap_distance, cap_project
    from .synth import band_field

    nt = cfg.scan_t_samples
    g = GridSpec(cfg.scan_n, cfg.scan_length, nt, cfg.scan_length / nt, True)
    seeds = [cfg.seed + i for i in range(cfg.scan_seeds)]
    sc = nullform_decay_scan(g, cfg.scan_k2, cfg.scan_ds, cfg.scan_k3s, seeds, kind=cfg.scan_inputs)
    rows = [(d, k3, s, float(v)) for (d, k3), vs in sorted(sc.raw.items()) for s, v in zip(seeds, vs)]
    _write_csv(out / "decay.csv", ("k2_minus_k1", "k3", "seed", "n0_upper_ratio"), rows)

    bs = bernstein_stability(cfg.seed, cfg.bernstein_ns)
    _write_csv(out / "bernstein.csv", ("n", "max_ratio"), sorted(bs["max"].items()))

    # crux example: two band-0 fields localised to well separated level-1 caps
    cover = cap_cover(1, g.n)
    a = cover.caps[0]
    b = max(cover.caps, key=lambda c: cap_distance(a, c))
    phi = cap_project(band_field(g, 0, cfg.seed, near_cone=0.5), 0, a, "+", cover=cover)
    psi = cap_project(band_field(g, 0, cfg.seed + 1, near_cone=0.5), 0, b, "+", cover=cover)
    cr = crux_ratio(phi, psi, 0, 0, a, b, cfg.mu, count=min(cfg.omega_samples, 16))
    _write_csv(out / "crux.csv", ("quantity", "value", "bound"),
               [("ratio", cr["ratio"].value, cr["ratio"].bound),
                ("ratio_single_omega", cr["ratio_single_omega"].value, cr["ratio_single_omega"].bound),
                ("dist", cr["dist"], "exact"), ("prefactor", cr["prefactor"], "exact")])

    summary = [
        f"label: {sc.label}",
        f"delta1 = {sc.delta1:.4f}",
        f"delta2 = {sc.delta2:.4f}",
        f"const = {sc.const:.4f}",
        f"r2 = {sc.r2:.4f}",
        f"inputs = {cfg.scan_inputs}",
        f"bernstein_max = {', '.join(f'n={n}: {v:.6f}' for n, v in sorted(bs['max'].items()))}",
        f"bernstein_spread = {bs['spread']:.4f}",
        f"crux_ratio = {cr['ratio'].value:.6g} ({cr['ratio'].bound})",
    ]
    (out / "summary.txt").write_text("\n".join(summary) + "\n")
    return [
        Check("bernstein_spread", bs["spread"], 0.3, bs["spread"] <= 0.3),
        Check("decay_delta1_positive", sc.delta1, 0.0, sc.delta1 > 0),
        Check("decay_delta2_positive", sc.delta2, 0.0, sc.delta2 > 0),
    ]


# -------------------------------------------------------------- manifest

def manifest_entry(command: str, cfg: RunConfig, checks) -> dict:
    return {
        "command": command,
        "config": asdict(cfg),
        "version": __version__,
        "backend": _accel.BACKEND,
        "bump": mp.BUMP_ID,
        "signature": "(-,+,+,+)" if cfg.flip_signature else "(+,-,-,-)",
        "zero_mode": "singular multipliers map the zero mode to 0",
        "checks": {c.name: {"value": c.value, "tol": c.tol, "pass": c.passed} for c in checks},
        "pass": all(c.passed for c in checks),
    }


def append_manifest(out: Path, entry: dict) -> Path:
    p = out / "manifest.jsonl"
    with open(p, "a") as fh:
        fh.write(json.dumps(entry, sort_keys=True, default=list) + "\n")
    return p


# --------------------------------------------------------------- ladders

def _window(state, T, dt, stride):
    from .gauge import coulomb_phase, twist
    from .solver import run

    rec = run(state, T, dt, stride, diagnostics=False)
    fr = rec.window_frame()
    return rec, fr, twist(fr, coulomb_phase(fr))


def constraint_ladder(state, T: float, dts, stride: int = 2) -> list[dict]:
    """Frame and twisted div-curl residuals over a fixed window ``[0, T]`` for each ``dt``."""
    from .gauge import twisted_div_curl_residual
    from .solver import derived_frame, div_curl_residual, frame_time_derivative

    out = []
    for dt in dts:
        rec, fr, gf = _window(state, T, dt, stride)
        row = dict(div_curl_residual(fr).relative)
        tw = twisted_div_curl_residual(gf)
        row["twisted_curl"] = tw.relative["curl"]
        row["twisted_div"] = tw.relative["div"]
        row["eq2_spatial_max"] = max(div_curl_residual(derived_frame(s), frame_time_derivative(s)).relative["eq2_spatial"]
                                     for s in rec.states)
        out.append(row)
    return out


def assembly_ladder(state, dts, stride: int = 2, snapshots: int = 9) -> list[dict]:
    """Residual of the assembled I + II + III and the bilinear split of II for each ``dt``.

    Each level records ``snapshots`` slices, so the window shrinks with ``dt``
    (a fixed window at n = 64 does not fit in a few GB).
    """
    from .gauge import dynamic_separation
    from .nullforms import assemble_I_II_III, nullform_substitution

    out = []
    for dt in dts:
        _, fr, gf = _window(state, dt * stride * (snapshots - 1), dt, stride)
        asm = assemble_I_II_III(gf, fr)
        ds = dynamic_separation(gf)
        split = max(nullform_substitution(gf, ds, a).residual for a in range(4))
        out.append({"relative": asm.relative, "relative_flipped": asm.relative_flipped, "split": split,
                    "box_Phi_gap": asm.box_Phi_gap})
    return out
