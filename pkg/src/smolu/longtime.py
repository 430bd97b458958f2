"""Long-time behaviour: steady versus tumbling classification, strobe maps,
condition checks for the small-parameter regime, and parameter sweeps.
"""
from __future__ import annotations

import csv
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .dynamics import (
    FlowParams,
    InitialData,
    SimConfig,
    evolve,
    rhs,
    rotate_frame,
    simulate,
)
from .equilibria import DissipativityBound
from .errors import StepFailure
from .spectral import TWO_PI, KernelSpec, SpectralField, h1_norm, l2_norm

log = logging.getLogger(__name__)

TOL_S = 1e-7
TOL_VAR = 1e-3
TOL_ORBIT = 1e-8


# -- strobe map ---------------------------------------------------------------

def stroboscopic_map(f0: SpectralField, flow: FlowParams, kernel: KernelSpec,
                     T: float | None = None, dt: float = 1e-3,
                     turn: float = np.pi) -> SpectralField:
    """Evolve for ``T`` (default ``pi/|omega|``) and undo the frame rotation.

    The frame turns by ``turn`` (half a revolution unless told otherwise) per
    strobe interval, in the sense of the vorticity.  At the default interval
    this is exactly the rigid rotation ``omega * T``.
    """
    if flow.omega == 0:
        raise ValueError("strobe map needs nonzero vorticity")
    if T is None:
        T = np.pi / abs(flow.omega)
    fT = evolve(f0, flow, kernel, T, dt)
    return rotate_frame(fT, np.sign(flow.omega) * turn)


def strobe_residual(f: SpectralField, flow: FlowParams, kernel: KernelSpec,
                    T: float | None = None, dt: float = 1e-3, turn: float = np.pi) -> float:
    return l2_norm(stroboscopic_map(f, flow, kernel, T, dt, turn) - f)


def refine_period(f: SpectralField, flow: FlowParams, kernel: KernelSpec, T0: float,
                  dt: float = 1e-3, iters: int = 3, tol: float = 1e-13) -> float:
    """Gauss-Newton correction of the strobe interval for a state near an orbit.

    Minimizes ``||P_T(f) - f||`` over ``T``; the derivative of the strobe
    image in ``T`` is the rotated right-hand side at the end point.
    """
    T_nom = np.pi / abs(flow.omega)
    lo, hi = 0.5 * T_nom, 2.0 * T_nom
    T = T0
    for _ in range(iters):
        fT = evolve(f, flow, kernel, T, dt)
        phi = np.sign(flow.omega) * np.pi
        e = rotate_frame(fT, phi) - f
        ft = rotate_frame(rhs(fT, flow, kernel), phi)
        den = np.sum(np.abs(ft.coeffs) ** 2)
        if den == 0:
            break
        delta = -float(np.real(np.vdot(ft.coeffs, e.coeffs))) / den
        T = float(np.clip(T + delta, lo, hi))
        if abs(delta) < tol * T:
            break
    return T


class TumblingSearch(NamedTuple):
    orbit: SpectralField
    residual: float
    period: float
    iterations: int
    converged: bool


def _newton_polish(f: SpectralField, flow: FlowParams, kernel: KernelSpec, T: float,
                   dt: float, modes: int = 16, iters: int = 3) -> SpectralField:
    """Newton on the leading modes with a finite-difference Jacobian."""
    N = f.n_modes
    m = min(modes, N)

    def pack(g):
        h = g.coeffs[N + 1:N + 1 + m]
        return np.concatenate([h.real, h.imag])

    def unpack(g, x):
        c = g.coeffs.copy()
        h = x[:m] + 1j * x[m:]
        c[N + 1:N + 1 + m] = h
        c[N - m:N] = np.conj(h[::-1])
        return SpectralField(c)

    def G(g):
        return pack(stroboscopic_map(g, flow, kernel, T, dt) - g)

    for _ in range(iters):
        x = pack(f)
        r = G(f)
        eps = 1e-7
        J = np.empty((r.size, x.size))
        for j in range(x.size):
            xp = x.copy()
            xp[j] += eps
            J[:, j] = (G(unpack(f, xp)) - r) / eps
        dx, *_ = np.linalg.lstsq(J, -r, rcond=None)
        f = unpack(f, x + dx)
    return f


def find_tumbling(flow: FlowParams, kernel: KernelSpec, init: SpectralField,
                  max_iters: int = 200, tol_orbit: float = TOL_ORBIT, dt: float = 1e-3,
                  refine: bool = True, refine_every: int = 5,
                  newton_fallback: bool = False) -> TumblingSearch:
    """Picard iteration of the strobe map from ``init``.

    With ``refine`` the strobe interval is re-estimated every few iterations
    so that orbits whose period drifts away from ``pi/|omega|`` are found.
    """
    if flow.omega == 0:
        raise ValueError("tumbling search needs nonzero vorticity")
    T = np.pi / abs(flow.omega)
    f = init
    res = np.inf
    it = 0
    for it in range(1, max_iters + 1):
        if refine and it % refine_every == 1:
            T = refine_period(f, flow, kernel, T, dt)
        fn = stroboscopic_map(f, flow, kernel, T, dt)
        res = l2_norm(fn - f)
        f = fn
        if not np.isfinite(res):
            break
        if res < tol_orbit:
            return TumblingSearch(f, res, T, it, True)
    if newton_fallback and np.isfinite(res):
        f = _newton_polish(f, flow, kernel, T, dt)
        res = strobe_residual(f, flow, kernel, T, dt)
        return TumblingSearch(f, res, T, it, res < tol_orbit)
    return TumblingSearch(f, res, T, it, False)


# -- classification -----------------------------------------------------------

@dataclass
class ClassificationResult:
    kind: str
    residual_steady: float
    residual_strobe: float
    time_variation: float
    t_end: float
    period: float | None = None
    rigid_rotation: bool = False
    residual_half: float = float("nan")
    residual_at_nominal: float = float("nan")
    energy_monotone: bool | None = None
    message: str = ""
    state: SpectralField | None = field(default=None, repr=False, compare=False)

    def summary(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "state"}
        return d


def _energy_monotone(traj, slack: float = 1e-10) -> bool | None:
    E = [r.energy for r in traj]
    if any(e is None for e in E):
        return None
    return bool(np.all(np.diff(E) <= slack))


def classify(cfg: SimConfig, tol_s: float = TOL_S, tol_var: float = TOL_VAR,
             max_iters: int = 200, refine: bool = True) -> ClassificationResult:
    """Run ``cfg`` to ``t_end`` and decide between steady and tumbling."""
    flow, kernel, dt = cfg.flow, cfg.kernel, cfg.dt
    nan = float("nan")
    try:
        traj = simulate(cfg)
    except StepFailure as exc:
        return ClassificationResult("Unresolved", nan, nan, nan, cfg.t_end, message=str(exc))
    if traj.aborted:
        return ClassificationResult("Unresolved", nan, nan, nan, cfg.t_end, message=traj.message)
    f = traj.final.field
    mono = _energy_monotone(traj) if flow.is_gradient else None
    r_steady = l2_norm(rhs(f, flow, kernel))
    if r_steady < tol_s:
        return ClassificationResult("Steady", r_steady, nan, 0.0, cfg.t_end,
                                    energy_monotone=mono, state=f)
    if flow.omega == 0:
        return ClassificationResult("Unresolved", r_steady, nan, nan, cfg.t_end,
                                    energy_monotone=mono,
                                    message="not steady and no rotation to strobe", state=f)
    try:
        search = find_tumbling(flow, kernel, f, max_iters=max_iters, tol_orbit=min(tol_s, TOL_ORBIT),
                               dt=dt, refine=refine)
    except StepFailure as exc:
        return ClassificationResult("Unresolved", r_steady, nan, nan, cfg.t_end, message=str(exc))
    orbit, T = search.orbit, search.period
    r_steady = l2_norm(rhs(orbit, flow, kernel))
    variation = l2_norm(evolve(orbit, flow, kernel, T / 2.0, dt) - orbit)
    r_half = strobe_residual(orbit, flow, kernel, T / 2.0, dt, turn=np.pi / 2.0)
    r_nom = strobe_residual(orbit, flow, kernel, None, dt)
    ok = search.residual < tol_s and variation > tol_var and r_steady > tol_var
    return ClassificationResult(
        "Tumbling" if ok else "Unresolved",
        r_steady, search.residual, variation, cfg.t_end,
        period=T if ok else None,
        rigid_rotation=bool(ok and r_half < tol_s),
        residual_half=r_half, residual_at_nominal=r_nom,
        message="" if ok else f"strobe search stopped after {search.iterations} iterations",
        state=orbit,
    )


# -- small-parameter conditions -----------------------------------------------

@dataclass(frozen=True)
class ConditionReport:
    b: float
    s: float
    M: float
    Nk: float
    C_gn: float
    epsilon: float
    Cbar: float
    R1: float
    R2: float
    condl2_margin: float
    condh1_margin: float

    @property
    def holds(self) -> bool:
        return self.condl2_margin > 0 and self.condh1_margin > 0


def smallness_conditions(b: float, s: float, kernel: KernelSpec | None = None,
                        C_gn: float = 1.0, epsilon: float = 0.01) -> ConditionReport:
    """Margins of the two smallness inequalities (positive means satisfied).

    Only the shape of ``kernel`` is used; its own concentration is ignored in
    favour of ``b``.
    """
    shape = kernel if kernel is not None else KernelSpec.maier_saupe(1.0)
    k0, k1 = shape.sup_derivative(0), shape.sup_derivative(1)
    k2, k4 = shape.sup_derivative(2), shape.sup_derivative(4)
    M = 2.0 * s
    Cbar = DissipativityBound(M, k2, b, C_gn, epsilon).Cbar
    R1 = Cbar + 1.0 / np.pi + epsilon
    R2 = epsilon + (2.0 * s + b * k2) * (8.0 * Cbar + 6.0 / np.pi)
    root = np.sqrt(TWO_PI)
    l2_rhs = s + b * root * R1 * k1 + 0.5 * b * k2
    h1_rhs = 7.0 * s + 0.5 * b * k4 + 1.5 * b * k2 + b * root * k0 * (R2 + Cbar + 1.0 / np.pi)
    return ConditionReport(b, s, M, k2, C_gn, epsilon, Cbar, R1, R2, 1.0 - l2_rhs, 1.0 - h1_rhs)


def max_b_for_conditions(s: float, kernel: KernelSpec | None = None, C_gn: float = 1.0,
                         epsilon: float = 0.01, tol: float = 1e-12) -> float:
    """Largest ``b`` at which both inequalities hold (0 if none)."""
    if not smallness_conditions(0.0, s, kernel, C_gn, epsilon).holds:
        return 0.0
    lo, hi = 0.0, 1.0
    while smallness_conditions(hi, s, kernel, C_gn, epsilon).holds:
        lo, hi = hi, 2.0 * hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if smallness_conditions(mid, s, kernel, C_gn, epsilon).holds:
            lo = mid
        else:
            hi = mid
    return lo


# -- contraction and dissipativity --------------------------------------------

class ContractionResult(NamedTuple):
    rate: float
    times: np.ndarray
    gaps: np.ndarray


def fit_rate(times, gaps, floor: float = 1e-13) -> float:
    """Log-linear slope over the final half of the samples above ``floor``."""
    times, gaps = np.asarray(times), np.asarray(gaps)
    keep = gaps > floor
    t, g = times[keep], gaps[keep]
    if t.size < 2:
        return float("nan")
    half = t >= t[0] + 0.5 * (t[-1] - t[0])
    if half.sum() < 2:
        half = np.ones_like(t, dtype=bool)
    return float(np.polyfit(t[half], np.log(g[half]), 1)[0])


def contraction_test(cfg: SimConfig, seed1: int, seed2: int,
                     init1: InitialData | None = None, init2: InitialData | None = None,
                     floor: float = 1e-13) -> ContractionResult:
    """H1 distance between two solutions and its fitted exponential rate."""
    a = init1 or replace(cfg.initial, seed=seed1)
    b = init2 or replace(cfg.initial, seed=seed2)
    ta = simulate(cfg.with_(initial=a))
    tb = simulate(cfg.with_(initial=b))
    n = min(len(ta), len(tb))
    times = ta.times[:n]
    gaps = np.array([h1_norm(ta[i].field - tb[i].field) for i in range(n)])
    return ContractionResult(fit_rate(times, gaps, floor), times, gaps)


def fejer_initial(N: int, target_h1: float, center: float = 0.0) -> SpectralField:
    """Positive mass-one blend of the isotropic state and a Fejer kernel.

    The weight is solved in closed form so the H1 norm equals ``target_h1``.
    """
    n = np.arange(N + 1)
    bump = (1.0 - n / (N + 1.0)) / TWO_PI * np.exp(-1j * n * center)
    base = SpectralField.isotropic(N)
    extra = SpectralField.from_half(np.concatenate([[0.0], bump[1:]]))
    h0sq = h1_norm(base) ** 2
    hxsq = h1_norm(extra) ** 2
    if target_h1**2 < h0sq:
        raise ValueError(f"H1 target {target_h1} below the isotropic value {np.sqrt(h0sq):.4g}")
    w = np.sqrt((target_h1**2 - h0sq) / hxsq)
    if w >= 1.0:
        raise ValueError(f"H1 target {target_h1} not reachable with N={N}")
    return base + w * extra


@dataclass
class DissipativityReport:
    scales: list
    sup_l2: list
    sup_h1: list
    B: float
    spread: float
    max_envelope_violation: float
    bound_shared: bool
    envelope_ok: bool
    B_min: float = float("nan")
    B_theory: float = float("nan")


def dissipativity_probe(kernel: KernelSpec, flow: FlowParams, init_scales=(1.0, 10.0, 100.0),
                        t_window=(100.0, 200.0), n_modes: int = 128, dt: float = 1e-3,
                        record_every: int = 50, rel_tol: float = 0.05) -> DissipativityReport:
    """Late-window norm bounds for data of very different H1 size.

    ``B`` is the late-window supremum of ``||f||^2`` over all runs, and the
    transient is checked against ``||f(0)||^2 exp(-t/2) + B``.
    """
    t0, t1 = t_window
    runs = []
    for scale in init_scales:
        cfg = SimConfig(kernel=kernel, flow=flow, n_modes=n_modes, dt=dt, t_end=t1,
                        record_every=record_every)
        traj = simulate(cfg, f0=fejer_initial(n_modes, scale))
        if traj.aborted:
            raise StepFailure(traj.message, traj.final.t)
        runs.append(traj)
    sup_l2, sup_h1 = [], []
    for traj in runs:
        late = [r for r in traj if r.t >= t0 - 1e-9]
        sup_l2.append(max(r.l2 for r in late))
        sup_h1.append(max(r.h1 for r in late))
    B = max(sup_l2) ** 2
    # smallest constant that would make the envelope hold on every run
    B_min = -np.inf
    for traj in runs:
        l2sq0 = traj[0].l2 ** 2
        for r in traj:
            B_min = max(B_min, r.l2**2 - l2sq0 * np.exp(-r.t / 2.0))
    worst = B_min - B
    spread = max(sup_h1) / min(sup_h1) - 1.0
    bound = DissipativityBound(2.0 * flow.s, kernel.sup_derivative(2), kernel.b)
    return DissipativityReport(list(init_scales), sup_l2, sup_h1, B, spread, float(worst),
                               bool(spread < rel_tol), bool(worst <= 1e-12), float(B_min),
                               float(bound.Cbar + 1.0 / np.pi))


# -- sweeps -------------------------------------------------------------------

@dataclass
class SweepCell:
    b: float
    s: float
    omega: float
    result: ClassificationResult
    seed: int


SWEEP_HEADER = ["b", "s", "omega", "kind", "period", "residual_steady", "residual_strobe",
                "time_variation", "seed"]


def _cell_config(template: SimConfig, b: float, s: float, omega: float, seed: int) -> SimConfig:
    kernel = replace(template.kernel, b=float(b))
    flow = FlowParams(float(omega), float(s), template.flow.alpha)
    return template.with_(kernel=kernel, flow=flow, initial=replace(template.initial, seed=seed))


def _run_cell(args) -> SweepCell:
    template, b, s, omega, seed, kw = args
    try:
        res = classify(_cell_config(template, b, s, omega, seed), **kw)
    except Exception as exc:  # one bad cell must not stop the sweep
        nan = float("nan")
        res = ClassificationResult("Unresolved", nan, nan, nan, template.t_end, message=repr(exc))
    res.state = None
    return SweepCell(float(b), float(s), float(omega), res, seed)


def sweep_threads() -> int:
    try:
        return max(1, int(os.environ.get("SMOLU_THREADS", "1")))
    except ValueError:
        return 1


def sweep(b_grid, s_grid, omega_grid, cfg_template: SimConfig, seed: int = 0,
          threads: int | None = None, **classify_kw) -> list:
    """Classify every grid cell; output order follows the grids, not completion."""
    b_grid, s_grid, omega_grid = list(b_grid), list(s_grid), list(omega_grid)
    if not (b_grid and s_grid and omega_grid):
        raise ValueError("sweep grids must be nonempty")
    jobs = [(cfg_template, b, s, w, seed, classify_kw)
            for b in b_grid for s in s_grid for w in omega_grid]
    threads = sweep_threads() if threads is None else max(1, threads)
    if threads == 1 or len(jobs) == 1:
        return [_run_cell(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(threads, len(jobs))) as pool:
        return list(pool.map(_run_cell, jobs))


def sweep_summary(cells) -> dict:
    counts = {"Steady": 0, "Tumbling": 0, "Unresolved": 0}
    for c in cells:
        counts[c.result.kind] = counts.get(c.result.kind, 0) + 1
    return {"cells": len(cells), "counts": counts}


def _fmt(x) -> str:
    return "" if x is None else f"{x:.17g}"


def write_sweep_csv(cells, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_HEADER)
        for c in cells:
            r = c.result
            w.writerow([_fmt(c.b), _fmt(c.s), _fmt(c.omega), r.kind, _fmt(r.period),
                        _fmt(r.residual_steady), _fmt(r.residual_strobe),
                        _fmt(r.time_variation), c.seed])


def write_sweep_json(cells, path) -> None:
    with open(path, "w") as fh:
        json.dump(sweep_summary(cells), fh, indent=2)
