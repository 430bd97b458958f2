"""Time integration of the angular Smoluchowski equation under imposed flow.

The reduced equation is

    f_t + d_theta[(omega + s cos(2 theta + alpha)) f + d_theta(Kf) f] = f_theta_theta

Diffusion is treated exactly by an integrating factor and everything else
explicitly with classical RK4 (Lawson's scheme).  The even-mode ODE system for
the Maier-Saupe kernel is integrated separately and serves as a cross-check.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import fft as sfft

from .equilibria import GradientPotential, NematicState, energy, nematic_field, order_params
from .errors import StepFailure
from .spectral import (
    TWO_PI,
    KernelSpec,
    SpectralField,
    grid_values,
    h1_norm,
    l2_norm,
    padded_size,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FlowParams:
    omega: float = 0.0
    s: float = 0.0
    alpha: float = 0.0

    def __post_init__(self):
        if self.s < 0:
            raise ValueError("strain amplitude s must be nonnegative")
        object.__setattr__(self, "alpha", float(self.alpha) % TWO_PI)

    def V(self, theta):
        return self.omega + self.s * np.cos(2.0 * np.asarray(theta) + self.alpha)

    @property
    def is_gradient(self) -> bool:
        return self.omega == 0.0

    def canonical(self) -> "FlowParams":
        return FlowParams(self.omega, self.s, 0.0)


@dataclass(frozen=True)
class VelocityGradient:
    u11: float = 0.0
    u12: float = 0.0
    u21: float = 0.0
    u22: float = 0.0


def flow_from_gradient(u: VelocityGradient) -> FlowParams:
    """Write the projected drift as ``omega + s cos(2 theta + alpha)``."""
    # V = -u11 cs - u12 sin^2 + u21 cos^2 + u22 cs
    #   = (u21 - u12)/2 + (u21 + u12)/2 cos 2t + (u22 - u11)/2 sin 2t
    omega = 0.5 * (u.u21 - u.u12)
    A = 0.5 * (u.u21 + u.u12)
    B = 0.5 * (u.u22 - u.u11)
    s = float(np.hypot(A, B))
    # A cos 2t + B sin 2t = s cos(2t + alpha) with cos a = A/s, sin a = -B/s
    alpha = float(np.arctan2(-B, A)) if s > 0 else 0.0
    return FlowParams(omega, s, alpha)


def rotate_frame(f: SpectralField, phi: float) -> SpectralField:
    """``theta -> f(theta + phi)``."""
    return SpectralField(f.coeffs * np.exp(1j * f.wavenumbers * phi))


class _Propagator:
    """Precomputed multipliers for one (N, flow, kernel, dt) on full coefficient arrays.

    When the kernel has few cosine modes the flux ``(V + d Kf) f`` is a short
    banded convolution of coefficient vectors, which equals the dealiased
    product exactly; wider kernels go through a padded FFT.
    """

    BANDED_MAX = 16

    def __init__(self, N: int, flow: FlowParams, kernel: KernelSpec, dt: float | None = None):
        self.N = N
        self.n = np.arange(-N, N + 1)
        self.in_ = 1j * self.n
        self.dk = self.in_ * TWO_PI * kernel.b * kernel.khat(N)[np.abs(self.n)]
        self.lin = -(self.n.astype(float) ** 2)
        nz = np.nonzero(kernel.khat(N))[0]
        D = max(2, int(nz.max()) if nz.size else 0)
        self.banded = D <= self.BANDED_MAX and D < N
        if self.banded:
            self.D = D
            a = np.zeros(2 * D + 1, dtype=complex)
            a[D] = flow.omega
            a[D + 2] += 0.5 * flow.s * np.exp(1j * flow.alpha)
            a[D - 2] += 0.5 * flow.s * np.exp(-1j * flow.alpha)
            self.Va = a
        else:
            self.M = padded_size(N)
            theta = TWO_PI * np.arange(self.M) / self.M
            self.V = flow.V(theta)
            self._buf = np.zeros((2, self.M // 2 + 1), dtype=complex)
        self.dt = dt
        if dt is not None:
            self.E = np.exp(self.lin * dt)
            self.E2 = np.exp(self.lin * dt / 2.0)

    def nonlinear(self, c: np.ndarray) -> np.ndarray:
        """``-d_theta[(V + d_theta Kf) f]`` for symmetric coefficients ``c``."""
        N = self.N
        if self.banded:
            D = self.D
            a = self.Va + (self.dk[N - D:N + D + 1] * c[N - D:N + D + 1])
            flux = np.convolve(c, a, "same")
        else:
            M = self.M
            buf = self._buf
            buf[0, :N + 1] = c[N:]
            buf[1, :N + 1] = self.dk[N:] * c[N:]
            grids = sfft.irfft(buf, n=M, axis=-1)
            # irfft carries 1/M and rfft needs 1/M, so one factor M remains
            half = sfft.rfft(grids[0] * (self.V + M * grids[1]))[:N + 1]
            flux = np.concatenate([np.conj(half[:0:-1]), half])
        out = -self.in_ * flux
        out[N] = 0.0
        return out

    def full(self, c: np.ndarray) -> np.ndarray:
        return self.lin * c + self.nonlinear(c)

    def step(self, c: np.ndarray) -> np.ndarray:
        # overflow is detected by the callers through non-finite coefficients
        dt, E, E2, nl = self.dt, self.E, self.E2, self.nonlinear
        with np.errstate(over="ignore", invalid="ignore"):
            a = nl(c)
            Ec = E2 * c
            b = nl(Ec + E2 * (0.5 * dt) * a)
            c3 = nl(Ec + (0.5 * dt) * b)
            d = nl(E * c + (dt * E2) * c3)
            return E * c + (dt / 6.0) * (E * a + 2.0 * E2 * (b + c3) + d)


def _symmetrize(c: np.ndarray) -> SpectralField:
    return SpectralField(0.5 * (c + np.conj(c[::-1])))


def rhs(f: SpectralField, flow: FlowParams, k: KernelSpec) -> SpectralField:
    """Time derivative ``f_tt - d(Vf) - d((d Kf) f)`` of the reduced equation."""
    p = _Propagator(f.n_modes, flow, k)
    return _symmetrize(p.full(f.coeffs))


def step(f: SpectralField, flow: FlowParams, kernel: KernelSpec, dt: float,
         t: float = 0.0) -> SpectralField:
    if dt <= 0:
        raise ValueError("dt must be positive")
    c = _Propagator(f.n_modes, flow, kernel, dt).step(f.coeffs)
    if not np.all(np.isfinite(c)):
        raise StepFailure("non-finite coefficients", t + dt)
    return _symmetrize(c)


# -- initial data ---------------------------------------------------------

@dataclass(frozen=True)
class InitialData:
    """Named initial conditions.

    kind is one of ``isotropic``, ``nematic``, ``fourier``, ``even``, ``coeffs``.
    ``even`` keeps only ``cos(2k theta)`` modes, the symmetry class preserved
    by the flow-free equation.
    """

    kind: str = "fourier"
    sign: int = 1
    seed: int = 0
    amplitude: float = 0.05
    decay: float = 0.7
    coeffs: tuple = ()

    @classmethod
    def isotropic(cls):
        return cls(kind="isotropic")

    @classmethod
    def nematic(cls, sign: int = 1):
        return cls(kind="nematic", sign=sign)

    @classmethod
    def fourier(cls, seed: int, amplitude: float = 0.05, decay: float = 0.7):
        return cls(kind="fourier", seed=seed, amplitude=amplitude, decay=decay)

    @classmethod
    def even(cls, seed: int, amplitude: float = 0.05, decay: float = 0.7):
        return cls(kind="even", seed=seed, amplitude=amplitude, decay=decay)

    @classmethod
    def explicit(cls, f: SpectralField):
        return cls(kind="coeffs", coeffs=tuple(complex(x) for x in f.half))


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator so streams agree across platforms."""
    return np.random.Generator(np.random.Philox(int(seed) & (2**64 - 1)))


def fourier_perturbation(N: int, seed: int, amplitude: float, decay: float) -> SpectralField:
    rng = make_rng(seed)
    half = np.zeros(N + 1, dtype=complex)
    half[0] = 1.0 / TWO_PI
    n = np.arange(1, N // 2 + 1)
    phases = rng.uniform(0.0, TWO_PI, size=n.size)
    half[1:N // 2 + 1] = amplitude * decay**n * np.exp(1j * phases)
    f = SpectralField.from_half(half)
    fmin = grid_values(f).min()
    if fmin <= 0:
        a = -fmin + 0.1 / TWO_PI
        f = (f + a) / (1.0 + TWO_PI * a)
    return f


def even_perturbation(N: int, seed: int, amplitude: float, decay: float) -> SpectralField:
    """Cosine series in ``2k theta`` with seeded signs, made positive as above."""
    rng = make_rng(seed)
    half = np.zeros(N + 1, dtype=complex)
    half[0] = 1.0 / TWO_PI
    n = np.arange(2, N // 2 + 1, 2)
    signs = rng.choice([-1.0, 1.0], size=n.size)
    half[n] = amplitude * decay**n * signs
    f = SpectralField.from_half(half)
    fmin = grid_values(f).min()
    if fmin <= 0:
        a = -fmin + 0.1 / TWO_PI
        f = (f + a) / (1.0 + TWO_PI * a)
    return f


def initial_field(init: InitialData, N: int, kernel: KernelSpec) -> SpectralField:
    if init.kind == "isotropic":
        return SpectralField.isotropic(N)
    if init.kind == "nematic":
        return nematic_field(NematicState.from_b(kernel.b, init.sign), N)
    if init.kind == "fourier":
        return fourier_perturbation(N, init.seed, init.amplitude, init.decay)
    if init.kind == "even":
        return even_perturbation(N, init.seed, init.amplitude, init.decay)
    if init.kind == "coeffs":
        half = np.zeros(N + 1, dtype=complex)
        c = np.asarray(init.coeffs, dtype=complex)[:N + 1]
        half[:c.size] = c
        return SpectralField.from_half(half)
    raise ValueError(f"unknown initial data kind {init.kind!r}")


# -- simulation driver ----------------------------------------------------

@dataclass(frozen=True)
class SimConfig:
    kernel: KernelSpec = field(default_factory=lambda: KernelSpec.maier_saupe(6.0))
    flow: FlowParams = field(default_factory=FlowParams)
    n_modes: int = 64
    dt: float = 1e-3
    t_end: float = 10.0
    record_every: int = 100
    initial: InitialData = field(default_factory=InitialData)

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if self.n_modes < 2:
            raise ValueError("n_modes must be at least 2")
        if self.record_every < 1:
            raise ValueError("record_every must be a positive integer")

    def with_(self, **kw) -> "SimConfig":
        return replace(self, **kw)


@dataclass(frozen=True)
class TrajectoryRecord:
    t: float
    field: SpectralField
    y: np.ndarray
    s: np.ndarray
    energy: float | None
    l2: float
    h1: float
    min_f: float

    @property
    def mass(self) -> float:
        return self.field.mass


@dataclass
class Trajectory:
    """Records in the caller's frame; the integration ran shifted by ``frame_shift``."""

    records: list
    frame_shift: float = 0.0
    aborted: bool = False
    message: str = ""

    def __len__(self):
        return len(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def __iter__(self):
        return iter(self.records)

    @property
    def final(self) -> TrajectoryRecord:
        return self.records[-1]

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])


def make_record(t: float, f: SpectralField, kernel: KernelSpec,
                W: GradientPotential | None) -> TrajectoryRecord:
    op = order_params(f)
    vals = grid_values(f)
    fmin = float(vals.min())
    E = None
    if W is not None and fmin > -1e-8:
        E = energy(f, kernel, W)
    return TrajectoryRecord(t, f, op.y, op.s, E, l2_norm(f), h1_norm(f), fmin)


def simulate(cfg: SimConfig, f0: SpectralField | None = None,
             negativity_limit: float = -1e-6) -> Trajectory:
    """Integrate ``cfg`` and record every ``record_every`` steps and at ``t_end``."""
    N = cfg.n_modes
    if f0 is None:
        f0 = initial_field(cfg.initial, N, cfg.kernel)
    f0 = f0.truncate(N)
    if abs(f0.mass - 1.0) > 1e-10:
        raise ValueError(f"initial mass {f0.mass} is not 1")
    if grid_values(f0).min() <= 0 and cfg.initial.kind != "coeffs":
        raise ValueError("initial density must be strictly positive")

    flow = cfg.flow
    shift = -flow.alpha / 2.0
    W = GradientPotential.for_strain(flow.s, N, flow.alpha) if flow.is_gradient else None
    prop = _Propagator(N, flow.canonical(), cfg.kernel, cfg.dt)

    n_steps = int(np.ceil(cfg.t_end / cfg.dt - 1e-9))
    dt_last = cfg.t_end - (n_steps - 1) * cfg.dt
    c = rotate_frame(f0, shift).coeffs
    records = [make_record(0.0, f0, cfg.kernel, W)]
    traj = Trajectory(records, frame_shift=shift)
    for i in range(1, n_steps + 1):
        if i == n_steps and abs(dt_last - cfg.dt) > 1e-14:
            c = _Propagator(N, flow.canonical(), cfg.kernel, dt_last).step(c)
            t = cfg.t_end
        else:
            c = prop.step(c)
            t = i * cfg.dt
        if not np.isfinite(c[N + 1:]).all():
            traj.aborted = True
            traj.message = f"non-finite coefficients at t={t:.6g}"
            log.warning(traj.message)
            break
        if i % cfg.record_every and i != n_steps:
            continue
        f = rotate_frame(_symmetrize(c), -shift)
        rec = make_record(t, f, cfg.kernel, W)
        records.append(rec)
        if rec.min_f < negativity_limit:
            traj.aborted = True
            traj.message = f"density minimum {rec.min_f:.3g} at t={t:.6g}"
            log.warning(traj.message)
            break
    return traj


def evolve(f: SpectralField, flow: FlowParams, kernel: KernelSpec, t: float,
           dt: float = 1e-3) -> SpectralField:
    """Solution at time ``t`` from ``f`` without recording (fast path)."""
    N = f.n_modes
    shift = -flow.alpha / 2.0
    n_steps = max(1, int(round(t / dt)))
    h = t / n_steps
    prop = _Propagator(N, flow.canonical(), kernel, h)
    c = rotate_frame(f, shift).coeffs
    for _ in range(n_steps):
        c = prop.step(c)
    if not np.all(np.isfinite(c)):
        raise StepFailure("non-finite coefficients", t)
    return rotate_frame(_symmetrize(c), -shift)


# -- even-mode ODE system (Maier-Saupe) ------------------------------------

@dataclass(frozen=True)
class ModeState:
    y: np.ndarray

    @property
    def K_trunc(self) -> int:
        return self.y.size

    @classmethod
    def from_field(cls, f: SpectralField, K: int) -> "ModeState":
        y = np.array([TWO_PI * f[2 * k].real for k in range(1, K + 1)])
        return cls(y)

    def to_field(self, N: int) -> SpectralField:
        half = np.zeros(N + 1, dtype=complex)
        half[0] = 1.0 / TWO_PI
        for k, yk in enumerate(self.y, start=1):
            if 2 * k <= N:
                half[2 * k] = yk / TWO_PI
        return SpectralField.from_half(half)


def mode_ode_rhs(y: np.ndarray, b: float) -> np.ndarray:
    """``y_k' = -4k^2 y_k + b k y_1 (y_{k-1} - y_{k+1})`` with ``y_0 = 1``, ``y_{K+1} = 0``."""
    y = np.asarray(y, dtype=float)
    K = y.size
    k = np.arange(1, K + 1)
    ext = np.concatenate([[1.0], y, [0.0]])
    return -4.0 * k**2 * y + b * k * y[0] * (ext[:-2] - ext[2:])


def simulate_even(y0, b: float, dt: float, t_end: float, K: int | None = None,
                  record_every: int = 1):
    """Classical RK4 on the truncated mode system.

    Returns ``(times, Y)`` with ``Y[j]`` the mode vector at ``times[j]``.  The
    requested ``dt`` is subdivided when ``4 K^2 dt`` would leave the RK4
    stability interval.
    """
    y = np.array(y0.y if isinstance(y0, ModeState) else y0, dtype=float)
    if K is not None:
        y = np.concatenate([y, np.zeros(max(0, K - y.size))])[:K]
    K = y.size
    n_out = int(np.ceil(t_end / dt - 1e-9))
    h_out = t_end / n_out
    sub = max(1, int(np.ceil(4.0 * K**2 * h_out / 2.0)))
    h = h_out / sub
    times = [0.0]
    Y = [y.copy()]
    for i in range(1, n_out + 1):
        for _ in range(sub):
            k1 = mode_ode_rhs(y, b)
            k2 = mode_ode_rhs(y + 0.5 * h * k1, b)
            k3 = mode_ode_rhs(y + 0.5 * h * k2, b)
            k4 = mode_ode_rhs(y + h * k3, b)
            y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise StepFailure("non-finite mode amplitudes", i * h_out)
        if i % record_every == 0 or i == n_out:
            times.append(i * h_out)
            Y.append(y.copy())
    return np.array(times), np.array(Y)


# -- CSV --------------------------------------------------------------------

TRAJECTORY_HEADER = ["t", "y1", "s1", "y2", "s2", "y3", "s3", "y4", "s4",
                     "l2", "h1", "energy", "min_f", "mass"]


def trajectory_rows(traj: Trajectory):
    for r in traj:
        row = [r.t]
        for k in range(4):
            row += [r.y[k], r.s[k]]
        row += [r.l2, r.h1]
        cells = [f"{x:.17g}" for x in row]
        cells.append("" if r.energy is None else f"{r.energy:.17g}")
        cells.append(f"{r.min_f:.17g}")
        cells.append(f"{r.mass:.17g}")
        yield cells


def write_trajectory_csv(traj: Trajectory, path) -> None:
    import csv
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRAJECTORY_HEADER)
        w.writerows(trajectory_rows(traj))
