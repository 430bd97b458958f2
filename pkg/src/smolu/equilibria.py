"""Steady states of the flow-free Maier-Saupe equation and the gradient energy.

The nematic equilibria are ``g = exp(sign * r * cos 2theta) / Z`` where ``r``
solves ``h'(r) / h(r) = 2 r / b`` with ``h(x) = int exp(x cos 2theta)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BracketError, EntropyDomainError
from .spectral import (
    TWO_PI,
    GridField,
    KernelSpec,
    SpectralField,
    analyze,
    convolve,
    d_theta,
    grid_values,
)

H_QUAD_POINTS = 1024
_THETA_H = TWO_PI * np.arange(H_QUAD_POINTS) / H_QUAD_POINTS
_COS2_H = np.cos(2.0 * _THETA_H)

R_BRACKET = (1e-8, 50.0)


def h_quad(x: float, points: int = H_QUAD_POINTS) -> tuple[float, float]:
    """``(h(x), h'(x))`` by the periodic trapezoid rule."""
    if points == H_QUAD_POINTS:
        c2 = _COS2_H
    else:
        c2 = np.cos(2.0 * TWO_PI * np.arange(points) / points)
    w = TWO_PI / points
    # factor out exp(|x|) so large arguments stay finite in the ratio
    e = np.exp(x * c2 - abs(x))
    scale = np.exp(abs(x))
    return float(w * e.sum() * scale), float(w * (c2 * e).sum() * scale)


def _ratio(x: float) -> tuple[float, float]:
    """``h'/h`` and its derivative ``<cos^2> - <cos>^2`` under the weight."""
    e = np.exp(x * _COS2_H - abs(x))
    s0 = e.sum()
    m1 = (_COS2_H * e).sum() / s0
    m2 = (_COS2_H**2 * e).sum() / s0
    return float(m1), float(m2 - m1 * m1)


def solve_r(b: float, bracket: tuple[float, float] = R_BRACKET,
            bisect_width: float = 1e-6, tol: float = 1e-12) -> float | None:
    """Positive root of ``h'(r)/h(r) = 2r/b``, or ``None`` when ``b <= 4``.

    At ``b = 4`` the nematic branch meets the isotropic state (``r = 0``).
    """
    if b <= 0:
        raise ValueError("b must be positive")
    if b <= 4.0:
        return None

    def F(r):
        return _ratio(r)[0] - 2.0 * r / b

    lo, hi = bracket
    flo, fhi = F(lo), F(hi)
    if not (flo > 0 > fhi):
        raise BracketError(f"no sign change for b={b} on [{lo}, {hi}]: F={flo:.3g}, {fhi:.3g}")
    while hi - lo > bisect_width:
        mid = 0.5 * (lo + hi)
        if F(mid) > 0:
            lo = mid
        else:
            hi = mid
    r = 0.5 * (lo + hi)
    for _ in range(50):
        m1, var = _ratio(r)
        res = m1 - 2.0 * r / b
        if abs(res) < tol:
            break
        r_new = r - res / (var - 2.0 / b)
        if not lo - bisect_width <= r_new <= hi + bisect_width:
            break
        r = r_new
    if abs(F(r)) >= tol:
        raise BracketError(f"Newton polish stalled at r={r}, residual {F(r):.3g}")
    return r


@dataclass(frozen=True)
class NematicState:
    b: float
    r: float
    Z: float
    sign: int = 1

    @classmethod
    def from_b(cls, b: float, sign: int = 1) -> "NematicState":
        r = solve_r(b)
        if r is None:
            r = 0.0
        Z, _ = h_quad(r)
        return cls(b=float(b), r=r, Z=Z, sign=1 if sign >= 0 else -1)

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        return np.exp(self.sign * self.r * np.cos(2.0 * theta)) / self.Z

    @property
    def relation_residual(self) -> float:
        if self.r == 0.0:
            return 0.0
        return _ratio(self.r)[0] - 2.0 * self.r / self.b


def nematic_field(state: NematicState, N: int) -> SpectralField:
    M = max(8 * N, 256)
    theta = TWO_PI * np.arange(M) / M
    return analyze(GridField(state(theta)), N)


@dataclass(frozen=True)
class GradientPotential:
    """Periodic ``W`` with ``V = dW/dtheta``."""

    W: SpectralField

    @classmethod
    def for_strain(cls, s: float, N: int, alpha: float = 0.0) -> "GradientPotential":
        # V = s cos(2 theta + alpha)  =>  W = (s/2) sin(2 theta + alpha)
        c2 = s / 2.0 * np.exp(1j * alpha) / 2j
        return cls(SpectralField.from_modes(N, {2: c2}))

    @classmethod
    def zero(cls, N: int) -> "GradientPotential":
        return cls(SpectralField.zeros(N))

    @property
    def V(self) -> SpectralField:
        return d_theta(self.W)


def _density_on_grid(f: SpectralField, M: int, strict: bool) -> np.ndarray:
    vals = grid_values(f, M)
    lo = vals.min()
    if lo < -1e-8 or (strict and lo <= 0.0):
        raise EntropyDomainError(f"density minimum {lo:.3g} outside the entropy domain")
    return np.clip(vals, 0.0, None)


def energy(f: SpectralField, k: KernelSpec, W: GradientPotential | None = None,
           M: int | None = None) -> float:
    """``int f log f - 1/2 int Kf f - int W f`` by grid quadrature."""
    N = f.n_modes
    M = M or max(8 * N, 16)
    fv = _density_on_grid(f, M, strict=False)
    with np.errstate(divide="ignore", invalid="ignore"):
        ent = np.where(fv > 0, fv * np.log(np.where(fv > 0, fv, 1.0)), 0.0)
    kf = grid_values(convolve(k, f), M)
    integrand = ent - 0.5 * kf * fv
    if W is not None:
        integrand = integrand - grid_values(W.W.truncate(N), M) * fv
    return float(integrand.sum() * TWO_PI / M)


def energy_dissipation(f: SpectralField, k: KernelSpec, W: GradientPotential | None = None,
                       M: int | None = None) -> float:
    """``-int |d_theta(log f - Kf - W)|^2 f``; zero at equilibria."""
    N = f.n_modes
    M = M or max(8 * N, 16)
    fv = _density_on_grid(f, M, strict=True)
    df = grid_values(d_theta(f), M)
    mu_x = df / fv - grid_values(d_theta(convolve(k, f)), M)
    if W is not None:
        mu_x = mu_x - grid_values(W.V.truncate(N), M)
    return float(-(mu_x**2 * fv).sum() * TWO_PI / M)


@dataclass(frozen=True)
class OrderParams:
    y: np.ndarray
    s: np.ndarray
    director_angle: float
    director_defined: bool


def order_params(f: SpectralField, K: int = 4) -> OrderParams:
    """``y_k = int cos(2k theta) f`` and ``s_k = int sin(2k theta) f``."""
    y = np.zeros(K)
    s = np.zeros(K)
    for k in range(1, K + 1):
        cp, cm = f[2 * k], f[-2 * k]
        y[k - 1] = (np.pi * (cp + cm)).real
        s[k - 1] = (1j * np.pi * (cp - cm)).real
    defined = bool(np.hypot(y[0], s[0]) > 1e-14)
    angle = 0.5 * float(np.arctan2(s[0], y[0])) if defined else 0.0
    if angle <= -np.pi / 2:
        angle += np.pi
    return OrderParams(y, s, angle, defined)


@dataclass(frozen=True)
class DissipativityBound:
    M: float
    Nk: float
    b: float
    C_gn: float = 1.0
    epsilon: float = 0.0

    @property
    def Cbar(self) -> float:
        M, bN, C = self.M, self.b * self.Nk, self.C_gn
        return 4.0 * ((M + bN) / 2.0 * (1.0 / TWO_PI + C * 2.0 ** (1.0 / 3.0))
                      + (M * C / 2.0 ** (2.0 / 3.0)) ** 2
                      + (bN * C / 2.0 ** (2.0 / 3.0)) ** 2)

    def l2_bound(self, l2_sq0: float, t: float) -> float:
        """Upper bound on ``||f(t)||_2^2``."""
        return l2_sq0 * np.exp(-t / 2.0) + self.Cbar + 1.0 / np.pi

    def h1_bound(self, dl2_sq0: float, l2_sq0: float, t: float) -> float:
        """Upper bound on ``||d_theta f(t)||_2^2``."""
        MN = self.M + self.b * self.Nk
        return ((dl2_sq0 + l2_sq0 * 6.0 * MN) * np.exp(-t / 4.0)
                + MN * (8.0 * self.Cbar + 6.0 / np.pi))
