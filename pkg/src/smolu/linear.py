"""Linearization of the flow-free equation about a nematic state.

The operator is

    Lt h = h'' - d_theta[ d_theta(Kg) h + d_theta(Kh) g ]

acting on mean-zero fields.  Matrices use the real basis
``cos(theta), sin(theta), ..., cos(N theta), sin(N theta)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .equilibria import NematicState, h_quad, nematic_field
from .errors import NotInRangeError, SingularSystemError
from .spectral import (
    TWO_PI,
    GridField,
    KernelSpec,
    SpectralField,
    analyze,
    antiderivative,
    convolve,
    d_theta,
    grid_values,
    multiply,
)

TOL_KERNEL = 1e-7
TOL_NONRESONANCE = 1e-10


def field_to_vec(f: SpectralField) -> np.ndarray:
    """Trig-basis coefficients ``(a_1, b_1, ..., a_N, b_N)``; mode 0 is dropped."""
    N = f.n_modes
    c = f.coeffs[N + 1:]
    cm = f.coeffs[:N][::-1]
    v = np.empty(2 * N, dtype=complex)
    v[0::2] = c + cm
    v[1::2] = 1j * (c - cm)
    if np.all(np.abs(v.imag) <= 1e-14 * max(1.0, np.max(np.abs(v)))):
        return v.real.copy()
    return v


def vec_to_field(v: np.ndarray, mean: complex = 0.0) -> SpectralField:
    v = np.asarray(v)
    N = v.size // 2
    a, bb = v[0::2], v[1::2]
    c = np.zeros(2 * N + 1, dtype=complex)
    c[N + 1:] = 0.5 * (a - 1j * bb)
    c[:N] = (0.5 * (a + 1j * bb))[::-1]
    c[N] = mean
    return SpectralField(c)


def apply_operator(h: SpectralField, g: SpectralField, kernel: KernelSpec) -> SpectralField:
    """Evaluate the linearized operator with dealiased products."""
    flux = multiply(d_theta(convolve(kernel, g)), h) + multiply(d_theta(convolve(kernel, h)), g)
    return d_theta(d_theta(h)) - d_theta(flux)


@dataclass(frozen=True)
class OperatorMatrix:
    entries: np.ndarray
    b: float
    r: float
    g: SpectralField
    kernel: KernelSpec
    state: NematicState | None = None

    @property
    def N(self) -> int:
        return self.entries.shape[0] // 2

    def apply(self, h: SpectralField) -> SpectralField:
        return vec_to_field(self.entries @ field_to_vec(h.truncate(self.N)))


def _factored_entries(g: NematicState, N: int, kernel: KernelSpec) -> np.ndarray:
    """``B @ A`` with ``A = 1/g - K`` and ``B = d_theta g d_theta`` projected separately.

    Both factors are symmetric and ``-B`` is positive definite on mean-zero
    fields, so the product has a real spectrum for every truncation.
    """
    M = max(16 * N, 1024)
    theta = TWO_PI * np.arange(M) / M
    gv = g(theta)
    inv = g.Z * np.exp(-g.sign * g.r * np.cos(2.0 * theta))
    n = 2 * N
    A = np.empty((n, n))
    B = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        h = vec_to_field(e)
        Ah = analyze(GridField(grid_values(h, M) * inv), N) - convolve(kernel, h)
        A[:, j] = field_to_vec(Ah).real
        Bh = d_theta(analyze(GridField(gv * grid_values(d_theta(h), M)), N))
        B[:, j] = field_to_vec(Bh).real
    return B @ A


def assemble(g: NematicState | SpectralField, N: int, kernel: KernelSpec | None = None,
             form: str = "direct") -> OperatorMatrix:
    """Matrix of the linearized operator on the first ``N`` trig modes.

    ``form="direct"`` applies the operator to each basis function with
    dealiased products (column ``j`` is the image of basis function ``j``).
    ``form="factored"`` discretizes the two symmetric factors separately; it
    agrees with the direct form up to truncation error and keeps the
    spectrum real near the cutoff, where the direct form can produce
    spurious complex pairs for strongly peaked states.
    """
    if isinstance(g, NematicState):
        state = g
        gf = nematic_field(g, N)
        b, r = g.b, g.r
    else:
        state = None
        gf = g.truncate(N)
        if kernel is None:
            raise ValueError("kernel is required when g is a plain field")
        b, r = kernel.b, float("nan")
    if kernel is None:
        kernel = KernelSpec.maier_saupe(b)
    if form == "factored":
        if state is None:
            raise ValueError("the factored form needs a closed-form nematic state")
        return OperatorMatrix(_factored_entries(state, N, kernel), b, r, gf, kernel, state)
    if form != "direct":
        raise ValueError(f"unknown form {form!r}")
    A = np.empty((2 * N, 2 * N))
    for j in range(2 * N):
        e = np.zeros(2 * N)
        e[j] = 1.0
        A[:, j] = field_to_vec(apply_operator(vec_to_field(e), gf, kernel)).real
    return OperatorMatrix(A, b, r, gf, kernel, state)


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    max_imag: float
    kernel_dim: int
    kernel_angle: float
    tol_kernel: float
    kernel_vector: np.ndarray | None = None

    @property
    def nonzero_negative(self) -> bool:
        """Whether every eigenvalue outside the kernel has negative real part."""
        lam = self.eigenvalues
        rest = lam[np.abs(lam) >= self.tol_kernel]
        return bool(np.all(rest.real < 0))


def _angle(u: np.ndarray, v: np.ndarray) -> float:
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    p = abs(np.dot(u, v))
    perp = np.linalg.norm(v - np.dot(u, v) * u)
    return float(np.arctan2(perp, p))


def _blocks(A: np.ndarray):
    """Index sets of the cosine and sine blocks when the matrix decouples them."""
    idx_c = np.arange(0, A.shape[0], 2)
    idx_s = np.arange(1, A.shape[0], 2)
    off = max(np.max(np.abs(A[np.ix_(idx_c, idx_s)])), np.max(np.abs(A[np.ix_(idx_s, idx_c)])))
    if off <= 1e-12 * np.max(np.abs(A)):
        return [idx_c, idx_s]
    return None


def spectrum(m: OperatorMatrix, tol_kernel: float | None = None) -> SpectrumReport:
    """Dense eigen-decomposition with kernel diagnostics.

    ``tol_kernel`` defaults to ``1e-7`` times the largest eigenvalue modulus.
    For an even base state the matrix splits into cosine and sine blocks,
    which are diagonalized separately.
    """
    A = m.entries
    n = A.shape[0]
    vals = np.empty(n, dtype=complex)
    vecs = np.zeros((n, n), dtype=complex)
    blocks = _blocks(A) or [np.arange(n)]
    pos = 0
    try:
        for idx in blocks:
            w, V = np.linalg.eig(A[np.ix_(idx, idx)])
            k = idx.size
            vals[pos:pos + k] = w
            vecs[np.ix_(idx, np.arange(pos, pos + k))] = V
            pos += k
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"eigensolver failed: {exc}") from exc
    order = np.argsort(-vals.real)
    vals, vecs = vals[order], vecs[:, order]
    if tol_kernel is None:
        tol_kernel = TOL_KERNEL * float(np.max(np.abs(vals)))
    ker = np.nonzero(np.abs(vals) < tol_kernel)[0]
    angle = float("nan")
    kvec = None
    if ker.size:
        v = vecs[:, ker[np.argmin(np.abs(vals[ker]))]]
        v = v * np.exp(-1j * np.angle(v[np.argmax(np.abs(v))]))
        kvec = v.real
        dg = field_to_vec(d_theta(m.g)).real
        if np.linalg.norm(dg) > 0:
            angle = _angle(dg, kvec)
    return SpectrumReport(vals, float(np.max(np.abs(vals.imag))), int(ker.size), angle,
                          float(tol_kernel), kvec)


def singular_values(m: OperatorMatrix) -> np.ndarray:
    return np.linalg.svd(m.entries, compute_uv=False)


def cokernel_vector(m: OperatorMatrix) -> np.ndarray:
    """Unit left singular vector of the smallest singular value."""
    U, _, _ = np.linalg.svd(m.entries)
    return U[:, -1]


def _inverse_weight(g: NematicState, M: int):
    theta = TWO_PI * np.arange(M) / M
    return theta, g(theta), g.Z * np.exp(-g.sign * g.r * np.cos(2.0 * theta))


def _check_mean_zero(f: SpectralField):
    if abs(f.mass) > 1e-10 * max(1.0, float(np.max(np.abs(f.coeffs)))) * TWO_PI:
        raise NotInRangeError(f"right-hand side has nonzero mean ({f.mass:.3g})")


def range_test(f: SpectralField, g: NematicState, M: int | None = None) -> float:
    """``int F(theta) (1/g - <1/g>) dtheta`` with ``F`` the antiderivative from 0.

    Zero exactly when ``f`` lies in the range of the operator.
    """
    _check_mean_zero(f)
    M = M or max(8 * f.n_modes, 1024)
    _, _, inv = _inverse_weight(g, M)
    F = grid_values(antiderivative(f), M)
    return float(np.sum(F * (inv - inv.mean())) * TWO_PI / M)


@dataclass(frozen=True)
class RepresentationSolution:
    h: SpectralField
    c1: float
    c2: float
    c_h: float
    s_h: float


def solve_representation(f: SpectralField, g: NematicState, s_h: float = 0.0,
                         M: int | None = None, range_tol: float = 1e-8) -> RepresentationSolution:
    """Solve ``Lt h = f`` (Maier-Saupe) through the explicit quadrature formula.

    The sine moment ``int h sin 2theta`` is free along the kernel and is set
    to ``s_h``.
    """
    N = f.n_modes
    b = g.b
    if g.r == 0.0 or b <= 4.0:
        raise SingularSystemError("representation formula needs a nematic state (b > 4)")
    rt = range_test(f, g)
    if abs(rt) > range_tol:
        raise NotInRangeError(f"compatibility integral {rt:.3g} exceeds {range_tol:g}")
    M = M or max(16 * N, 2048)
    theta, gv, inv = _inverse_weight(g, M)
    w = TWO_PI / M
    cos2, sin2 = np.cos(2.0 * theta), np.sin(2.0 * theta)

    F = grid_values(antiderivative(f), M)
    c1 = -np.sum(F * inv) / np.sum(inv)
    q = (F + c1) * inv
    Phi = grid_values(antiderivative(analyze(GridField(q), M // 2 - 1)), M)

    cg = w * np.sum(gv * cos2)
    I0 = w * np.sum(gv * Phi)
    Ic = w * np.sum(gv * cos2 * Phi)
    divisor = 2.0 - b / 2.0 + (b / 2.0) * cg**2
    if abs(divisor) < 1e-12:
        raise SingularSystemError(f"divisor {divisor:.3g} vanishes")
    c_h = (Ic - cg * I0) / divisor
    c2 = -(b / 2.0) * c_h * cg - I0
    hv = (b / 2.0) * c_h * gv * cos2 + (b / 2.0) * s_h * gv * sin2 + gv * Phi + c2 * gv
    h = analyze(GridField(hv), N)
    return RepresentationSolution(h, float(c1), float(c2), float(c_h), float(s_h))


def project_off(v: np.ndarray, direction: np.ndarray) -> np.ndarray:
    d = direction / np.linalg.norm(direction)
    return v - np.dot(d, v) * d


def matrix_solve(m: OperatorMatrix, f: SpectralField) -> SpectralField:
    """Minimum-norm least-squares solution of the truncated system."""
    x, *_ = np.linalg.lstsq(m.entries, field_to_vec(f.truncate(m.N)).real, rcond=None)
    return vec_to_field(x)


def shifted_matrix(m: OperatorMatrix, k: int, omega: float) -> np.ndarray:
    return 2j * omega * k * np.eye(m.entries.shape[0]) + m.entries


def shifted_solve(m: OperatorMatrix, k: int, omega: float, f: SpectralField) -> SpectralField:
    """Solve ``(2 i omega k + Lt) h = f``; the result is in general complex-valued."""
    if k == 0 or omega == 0:
        raise ValueError("shift must be nonzero (k != 0 and omega != 0)")
    A = shifted_matrix(m, k, omega)
    rhs = field_to_vec(f.truncate(m.N)).astype(complex)
    try:
        x = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from exc
    return vec_to_field(x)


def resolvent_norm(m: OperatorMatrix, k: int, omega: float) -> float:
    """Spectral norm of ``(2 i omega k + Lt)^-1`` in the trig coefficient basis."""
    s = np.linalg.svd(shifted_matrix(m, k, omega), compute_uv=False)
    return float(1.0 / s[-1])


def nonresonance(b: float, tol: float = TOL_NONRESONANCE) -> tuple[float, bool]:
    """``(Z(b) - 2 pi, |Z(b) - 2 pi| > tol)``."""
    if b < 4.0:
        raise ValueError("non-resonance is only defined on the nematic branch b >= 4")
    st = NematicState.from_b(b)
    Z, _ = h_quad(st.r)
    d = Z - TWO_PI
    return float(d), bool(abs(d) > tol)
