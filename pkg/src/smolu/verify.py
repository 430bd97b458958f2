"""Self-checks bundled with the command line ``verify`` subcommand."""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dynamics import (
    FlowParams,
    InitialData,
    ModeState,
    SimConfig,
    evolve,
    fourier_perturbation,
    make_rng,
    rhs,
    rotate_frame,
    simulate,
    simulate_even,
)
from .equilibria import (
    NematicState,
    energy_dissipation,
    nematic_field,
    order_params,
    solve_r,
)
from .linear import (
    assemble,
    cokernel_vector,
    matrix_solve,
    nonresonance,
    project_off,
    range_test,
    solve_representation,
    spectrum,
    field_to_vec,
    vec_to_field,
)
from .spectral import (
    TWO_PI,
    KernelSpec,
    SpectralField,
    d_theta,
    l2_norm,
    multiply,
    random_field,
)

B_VALUES = (4.5, 5.0, 6.0, 8.0, 12.0)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def check_moments() -> tuple[bool, str]:
    worst = 0.0
    for b in B_VALUES:
        g = nematic_field(NematicState.from_b(b), 32)
        worst = max(worst, abs(order_params(g).y[1] - (1.0 - 4.0 / b)))
    return worst < 1e-8, f"max |moment - (1 - 4/b)| = {worst:.3g}"


def check_threshold() -> tuple[bool, str]:
    r4 = solve_r(4.0)
    r_near = solve_r(4.001)
    return r4 is None and r_near < 0.1, f"r(4) = {r4}, r(4.001) = {r_near:.4g}"


def check_kernel_spectrum() -> tuple[bool, str]:
    rep = spectrum(assemble(NematicState.from_b(6.0), 64))
    n_small = int(np.sum(np.abs(rep.eigenvalues) < 1e-7))
    ok = n_small == 1 and rep.kernel_angle < 1e-6 and rep.max_imag < 1e-8
    return ok, f"small eigenvalues {n_small}, angle {rep.kernel_angle:.3g}, max imag {rep.max_imag:.3g}"


def check_isotropic_mode2() -> tuple[bool, str]:
    worst = 0.0
    for b in (2.0, 4.0, 6.0):
        iso = SpectralField.isotropic(16)
        m = assemble(iso, 16, KernelSpec.maier_saupe(b))
        # cos 2theta and sin 2theta are basis entries 2 and 3
        for j in (2, 3):
            worst = max(worst, abs(m.entries[j, j] - (b - 4.0)),
                        float(np.max(np.abs(np.delete(m.entries[:, j], j)))))
    return worst < 1e-10, f"max deviation from b - 4 = {worst:.3g}"


def check_representation(n_rhs: int = 20, seed: int = 7) -> tuple[bool, str]:
    g = NematicState.from_b(6.0)
    m = assemble(g, 64)
    u = cokernel_vector(m)
    dg = field_to_vec(d_theta(m.g)).real
    rng = make_rng(seed)
    worst = 0.0
    decay = np.exp(-0.3 * np.repeat(np.arange(1, 65), 2))
    for _ in range(n_rhs):
        v = project_off(rng.standard_normal(128) * decay, u)
        f = vec_to_field(v)
        h_rep = field_to_vec(solve_representation(f, g).h).real
        h_mat = field_to_vec(matrix_solve(m, f)).real
        worst = max(worst, np.linalg.norm(project_off(h_rep - h_mat, dg)))
    reject = abs(range_test(vec_to_field(u), g))
    return worst < 1e-7 and reject > 1e-3, f"max difference {worst:.3g}, co-kernel integral {reject:.3g}"


def check_nonresonance() -> tuple[bool, str]:
    vals = [nonresonance(b)[0] for b in B_VALUES]
    return min(vals) > 0, f"min Z - 2pi = {min(vals):.6g}"


def _even_init(y1: float, y2: float, N: int = 64) -> SpectralField:
    return SpectralField.from_modes(N, {0: 1.0 / TWO_PI, 2: y1 / TWO_PI, 4: y2 / TWO_PI})


def check_energy_decay(t_end: float = 100.0, record_every: int = 5) -> tuple[bool, str]:
    kernel = KernelSpec.maier_saupe(6.0)
    cfg = SimConfig(kernel=kernel, t_end=t_end, record_every=record_every)
    h = cfg.dt * record_every
    worst_mono, worst_rate = -np.inf, 0.0
    for f0 in (_even_init(0.1, 0.0), _even_init(0.0, 0.05)):
        traj = simulate(cfg, f0=f0)
        E = np.array([r.energy for r in traj])
        worst_mono = max(worst_mono, float(np.max(np.diff(E))))
        for j in range(2, len(E) - 2):
            dE = (E[j - 2] - 8 * E[j - 1] + 8 * E[j + 1] - E[j + 2]) / (12 * h)
            worst_rate = max(worst_rate, abs(dE - energy_dissipation(traj[j].field, kernel)))
    tol = max(1e-6, 10 * cfg.dt**2)
    ok = worst_mono <= 1e-10 and worst_rate <= tol
    return ok, f"max energy increase {worst_mono:.3g}, max rate mismatch {worst_rate:.3g}"


def check_cross_integrator() -> tuple[bool, str]:
    b, N, dt = 6.0, 64, 1e-3
    f0 = _even_init(0.1, 0.02, N)
    cfg = SimConfig(kernel=KernelSpec.maier_saupe(b), n_modes=N, dt=dt, t_end=5.0, record_every=100)
    traj = simulate(cfg, f0=f0)
    times, Y = simulate_even(ModeState.from_field(f0, N // 2), b, dt, 5.0, record_every=100)
    worst = 0.0
    for rec, y in zip(traj, Y):
        ys = np.array([TWO_PI * rec.field[2 * k].real for k in range(1, 9)])
        worst = max(worst, float(np.max(np.abs(ys - y[:8]))))
    return worst < 1e-8, f"max |y_k difference| = {worst:.3g}"


def check_mass_conservation() -> tuple[bool, str]:
    f0 = InitialData.fourier(3)
    cfg = SimConfig(flow=FlowParams(1.0, 0.3, 0.4), t_end=2.0, initial=f0)
    traj = simulate(cfg)
    worst = max(abs(r.mass - 1.0) for r in traj)
    return worst < 1e-12, f"max |mass - 1| = {worst:.3g}"


def check_rotating_frame() -> tuple[bool, str]:
    kernel = KernelSpec.maier_saupe(6.0)
    f0 = fourier_perturbation(64, 5, 0.05, 0.7)
    a = evolve(f0, FlowParams(1.0, 0.0), kernel, 2.0)
    b = rotate_frame(evolve(f0, FlowParams(0.0, 0.0), kernel, 2.0), -2.0)
    d = l2_norm(a - b)
    return d < 1e-8, f"L2 difference {d:.3g}"


def check_nematic_stationary() -> tuple[bool, str]:
    worst = 0.0
    for b in B_VALUES:
        g = nematic_field(NematicState.from_b(b), 64)
        worst = max(worst, l2_norm(rhs(g, FlowParams(), KernelSpec.maier_saupe(b))))
    return worst < 1e-10, f"max ||rhs(g)|| = {worst:.3g}"


def check_dealiasing() -> tuple[bool, str]:
    rng = make_rng(11)
    f = random_field(rng, 24)
    g = random_field(rng, 24)
    fg = multiply(f, g)
    exact = np.convolve(f.coeffs, g.coeffs)[24:24 + 49]
    d = float(np.max(np.abs(fg.coeffs - exact)))
    return d < 1e-12, f"max coefficient error {d:.3g}"


CHECKS: list[tuple[str, Callable[[], tuple[bool, str]]]] = [
    ("moment identity", check_moments),
    ("nematic threshold", check_threshold),
    ("kernel and real spectrum", check_kernel_spectrum),
    ("isotropic mode-2 eigenvalue", check_isotropic_mode2),
    ("representation vs matrix solve", check_representation),
    ("non-resonance", check_nonresonance),
    ("energy decay", check_energy_decay),
    ("spectral vs mode ODE", check_cross_integrator),
    ("mass conservation", check_mass_conservation),
    ("rotating frame equivalence", check_rotating_frame),
    ("nematic states are stationary", check_nematic_stationary),
    ("dealiased product is exact", check_dealiasing),
]


def run_all(progress: Callable[[CheckResult], None] | None = None) -> list[CheckResult]:
    out = []
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:
            ok, detail = False, f"raised {exc!r}"
        res = CheckResult(name, bool(ok), detail, time.perf_counter() - t0)
        out.append(res)
        if progress:
            progress(res)
    return out
