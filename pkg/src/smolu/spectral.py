"""Truncated Fourier fields on the circle [0, 2*pi).

A :class:`SpectralField` stores the coefficients ``c_n`` for ``n = -N..N`` of
a real periodic function ``f(theta) = sum_n c_n exp(i n theta)``.  Grid
transforms go through the real FFT; products are dealiased by zero padding.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import fft as sfft

from .errors import AliasingError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Real periodic field as symmetric Fourier coefficients, index ``n + N``."""

    coeffs: np.ndarray

    def __eq__(self, other):
        return isinstance(other, SpectralField) and np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2 != 1:
            raise ValueError("coefficient array must have odd length 2N+1")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def n_modes(self) -> int:
        return (self.coeffs.size - 1) // 2

    @property
    def wavenumbers(self) -> np.ndarray:
        N = self.n_modes
        return np.arange(-N, N + 1)

    def __getitem__(self, n: int) -> complex:
        N = self.n_modes
        if abs(n) > N:
            return 0j
        return self.coeffs[n + N]

    @property
    def half(self) -> np.ndarray:
        """Coefficients ``c_0..c_N`` (rfft ordering, unscaled)."""
        return self.coeffs[self.n_modes:].copy()

    @classmethod
    def from_half(cls, half) -> "SpectralField":
        half = np.asarray(half, dtype=complex)
        full = np.concatenate([np.conj(half[:0:-1]), half])
        full[half.size - 1] = half[0].real
        return cls(full)

    @classmethod
    def zeros(cls, N: int) -> "SpectralField":
        return cls(np.zeros(2 * N + 1, dtype=complex))

    @classmethod
    def isotropic(cls, N: int) -> "SpectralField":
        c = np.zeros(2 * N + 1, dtype=complex)
        c[N] = 1.0 / TWO_PI
        return cls(c)

    @classmethod
    def from_modes(cls, N: int, modes: dict) -> "SpectralField":
        """Build from ``{n: c_n}`` for ``n >= 0``; negative modes are conjugated."""
        half = np.zeros(N + 1, dtype=complex)
        for n, val in modes.items():
            if n < 0 or n > N:
                raise ValueError(f"mode {n} outside 0..{N}")
            half[n] = val
        return cls.from_half(half)

    def is_real(self, tol: float = 1e-13) -> bool:
        c = self.coeffs
        scale = max(1.0, float(np.max(np.abs(c))))
        return bool(np.max(np.abs(c - np.conj(c[::-1]))) <= tol * scale)

    @property
    def mass(self) -> float:
        return float(TWO_PI * self.coeffs[self.n_modes].real)

    def truncate(self, N: int) -> "SpectralField":
        """Re-truncate (or zero-pad) to ``N`` modes."""
        M = self.n_modes
        if N <= M:
            return SpectralField(self.coeffs[M - N:M + N + 1])
        c = np.zeros(2 * N + 1, dtype=complex)
        c[N - M:N + M + 1] = self.coeffs
        return SpectralField(c)

    def __add__(self, other):
        if isinstance(other, SpectralField):
            return SpectralField(self.coeffs + other.coeffs)
        c = self.coeffs.copy()
        c[self.n_modes] += other
        return SpectralField(c)

    def __sub__(self, other):
        if isinstance(other, SpectralField):
            return SpectralField(self.coeffs - other.coeffs)
        return self + (-other)

    def __neg__(self):
        return SpectralField(-self.coeffs)

    def __mul__(self, scalar):
        if isinstance(scalar, SpectralField):
            return multiply(self, scalar)
        return SpectralField(self.coeffs * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return SpectralField(self.coeffs / scalar)


@dataclass(frozen=True)
class GridField:
    samples: np.ndarray

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def theta(self) -> np.ndarray:
        M = self.samples.size
        return TWO_PI * np.arange(M) / M


@dataclass(frozen=True)
class KernelSpec:
    """Even interaction kernel ``k`` with concentration ``b``.

    ``cosine_coeffs[m]`` is the weight of ``2 cos(m theta)`` for ``m >= 1`` and
    the constant for ``m = 0``, so these are exactly the complex-exponential
    coefficients of ``k``.
    """

    b: float
    cosine_coeffs: tuple = field(default=(0.0, 0.0, 0.25))
    variant: str = "CosineSeries"

    def __post_init__(self):
        if self.b < 0:
            raise ValueError("concentration b must be nonnegative")
        object.__setattr__(self, "cosine_coeffs", tuple(float(x) for x in self.cosine_coeffs))

    @classmethod
    def maier_saupe(cls, b: float) -> "KernelSpec":
        return cls(b=float(b), cosine_coeffs=(0.0, 0.0, 0.25), variant="MaierSaupe")

    @property
    def is_maier_saupe(self) -> bool:
        k = self.cosine_coeffs
        return len(k) >= 3 and k[2] == 0.25 and all(x == 0 for i, x in enumerate(k) if i != 2)

    def khat(self, N: int) -> np.ndarray:
        """Exponential coefficients ``k_hat_|n|`` for ``n = 0..N``."""
        out = np.zeros(N + 1)
        m = min(N + 1, len(self.cosine_coeffs))
        out[:m] = self.cosine_coeffs[:m]
        return out

    def __call__(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        k = self.cosine_coeffs
        val = np.full_like(theta, k[0])
        for m in range(1, len(k)):
            val = val + 2.0 * k[m] * np.cos(m * theta)
        return val

    def sup_derivative(self, order: int) -> float:
        """Upper bound ``sum_m 2|k_m| m^order`` on ``sup |d^order k|``."""
        k = np.asarray(self.cosine_coeffs)
        m = np.arange(k.size, dtype=float)
        tot = 2.0 * np.sum(np.abs(k[1:]) * m[1:] ** order)
        return float(tot + (abs(k[0]) if order == 0 else 0.0))


def padded_size(N: int) -> int:
    """Even FFT length >= 3N+1, enough to dealias a quadratic product."""
    M = sfft.next_fast_len(3 * N + 2, real=True)
    return M + (M % 2)


def _half_to_grid(half: np.ndarray, M: int) -> np.ndarray:
    buf = np.zeros(half.shape[:-1] + (M // 2 + 1,), dtype=complex)
    buf[..., :half.shape[-1]] = half
    return sfft.irfft(buf, n=M, axis=-1) * M


def _grid_to_half(samples: np.ndarray, N: int) -> np.ndarray:
    M = samples.shape[-1]
    return sfft.rfft(samples, axis=-1)[..., :N + 1] / M


def synthesize(f: SpectralField, M: int) -> GridField:
    N = f.n_modes
    if M < 2 * N + 1:
        raise AliasingError(f"grid of {M} points aliases a field with N={N}")
    if not f.is_real(1e-12):
        raise ValueError("field coefficients are not conjugate symmetric")
    return GridField(_half_to_grid(f.half, M))


def analyze(g: GridField, N: int) -> SpectralField:
    M = g.samples.size
    if M < 2 * N + 1:
        raise AliasingError(f"cannot resolve N={N} modes from {M} samples")
    half = sfft.rfft(g.samples)[:N + 1] / M
    return SpectralField.from_half(half)


def grid_values(f: SpectralField, M: int | None = None) -> np.ndarray:
    """Samples of ``f`` on ``M`` points (default ``8N``) as a plain array."""
    N = f.n_modes
    if M is None:
        M = max(8 * N, 16)
    return synthesize(f, M).samples


def d_theta(f: SpectralField) -> SpectralField:
    return SpectralField(1j * f.wavenumbers * f.coeffs)


def convolve(k: KernelSpec, f: SpectralField) -> SpectralField:
    N = f.n_modes
    kh = k.khat(N)
    mult = TWO_PI * k.b * kh[np.abs(f.wavenumbers)]
    return SpectralField(mult * f.coeffs)


def multiply(f: SpectralField, g: SpectralField) -> SpectralField:
    if f.n_modes != g.n_modes:
        raise ValueError("truncations differ")
    N = f.n_modes
    M = padded_size(N)
    grids = _half_to_grid(np.stack([f.half, g.half]), M)
    return SpectralField.from_half(_grid_to_half(grids[0] * grids[1], N))


def antiderivative(f: SpectralField) -> SpectralField:
    """Periodic part of ``F(theta) = int_0^theta f``; requires zero mean.

    The returned field ``F`` satisfies ``F(0) = 0``.
    """
    n = f.wavenumbers
    c = np.zeros_like(f.coeffs)
    nz = n != 0
    c[nz] = f.coeffs[nz] / (1j * n[nz])
    c[f.n_modes] = -np.sum(c[nz])
    return SpectralField(c)


def l2_norm(f: SpectralField) -> float:
    return float(np.sqrt(TWO_PI * np.sum(np.abs(f.coeffs) ** 2)))


def h1_norm(f: SpectralField) -> float:
    n = f.wavenumbers
    return float(np.sqrt(TWO_PI * np.sum((1.0 + n**2) * np.abs(f.coeffs) ** 2)))


def norms(f: SpectralField) -> tuple[float, float, float, float]:
    """``(l1, l2, h1, linf)``; the first and last are grid estimates on 8N points."""
    vals = grid_values(f)
    M = vals.size
    l1 = float(np.sum(np.abs(vals)) * TWO_PI / M)
    linf = float(np.max(np.abs(vals)))
    return l1, l2_norm(f), h1_norm(f), linf


def random_field(rng: np.random.Generator, N: int, bandwidth: int | None = None,
                 scale: float = 1.0) -> SpectralField:
    """Random real field with modes up to ``bandwidth`` (default ``N``)."""
    K = N if bandwidth is None else bandwidth
    half = np.zeros(N + 1, dtype=complex)
    half[:K + 1] = scale * (rng.standard_normal(K + 1) + 1j * rng.standard_normal(K + 1))
    half[0] = half[0].real
    return SpectralField.from_half(half)


def write_spectral_csv(f: SpectralField, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "re", "im"])
        for n, c in zip(f.wavenumbers, f.coeffs):
            w.writerow([int(n), f"{c.real:.17g}", f"{c.imag:.17g}"])


def read_spectral_csv(path) -> SpectralField:
    with open(Path(path), newline="") as fh:
        rows = list(csv.DictReader(fh))
    ns = np.array([int(r["n"]) for r in rows])
    N = int(np.max(np.abs(ns)))
    c = np.zeros(2 * N + 1, dtype=complex)
    for n, r in zip(ns, rows):
        c[n + N] = complex(float(r["re"]), float(r["im"]))
    return SpectralField(c)


def write_grid_csv(f: SpectralField, path, M: int | None = None) -> None:
    g = synthesize(f, M if M is not None else max(8 * f.n_modes, 16))
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta", "f"])
        for th, v in zip(g.theta, g.samples):
            w.writerow([f"{th:.17g}", f"{v:.17g}"])
