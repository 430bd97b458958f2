import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from smolu.dynamics import make_rng
from smolu.errors import AliasingError
from smolu.spectral import (
    TWO_PI,
    GridField,
    KernelSpec,
    SpectralField,
    analyze,
    antiderivative,
    convolve,
    d_theta,
    grid_values,
    h1_norm,
    l2_norm,
    multiply,
    norms,
    random_field,
    read_spectral_csv,
    synthesize,
    write_grid_csv,
    write_spectral_csv,
)

seeds = st.integers(min_value=0, max_value=2**32)


def cos_mode(N, m, amp=1.0):
    return SpectralField.from_modes(N, {m: amp / 2})


def brute_convolution(f, g):
    N = f.n_modes
    out = np.zeros(2 * N + 1, dtype=complex)
    for n in range(-N, N + 1):
        for m in range(-N, N + 1):
            if abs(n - m) <= N:
                out[n + N] += f[m] * g[n - m]
    return out


def test_isotropic_synthesizes_to_constant():
    vals = synthesize(SpectralField.isotropic(3), 8).samples
    assert np.allclose(vals, 1 / TWO_PI, atol=1e-15)


def test_single_mode_synthesizes_to_cosine():
    g = synthesize(cos_mode(3, 1), 8)
    assert np.allclose(g.samples, np.cos(g.theta), atol=1e-15)


def test_synthesis_refuses_coarse_grid():
    with pytest.raises(AliasingError):
        synthesize(SpectralField.isotropic(8), 16)


def test_analyze_refuses_too_many_modes():
    with pytest.raises(AliasingError):
        analyze(GridField(np.ones(10)), 5)


def test_analyze_constant_and_cosine():
    theta = TWO_PI * np.arange(32) / 32
    c = analyze(GridField(np.full(32, 1 / TWO_PI)), 8)
    assert abs(c[0] - 1 / TWO_PI) < 1e-15
    assert np.max(np.abs(np.delete(c.coeffs, 8))) < 1e-14
    c2 = analyze(GridField(np.cos(2 * theta)), 8)
    assert abs(c2[2] - 0.5) < 1e-15 and abs(c2[-2] - 0.5) < 1e-15


@given(seeds, st.integers(min_value=1, max_value=256))
def test_round_trip(seed, N):
    f = random_field(make_rng(seed), N)
    back = analyze(synthesize(f, 2 * N + 2), N)
    assert np.max(np.abs(back.coeffs - f.coeffs)) < 1e-13 * max(1.0, np.max(np.abs(f.coeffs)))


@given(seeds)
def test_synthesis_is_real(seed):
    f = random_field(make_rng(seed), 20)
    c = f.half
    # direct complex evaluation keeps the imaginary part we discard
    theta = TWO_PI * np.arange(64) / 64
    n = f.wavenumbers
    vals = (f.coeffs[None, :] * np.exp(1j * np.outer(theta, n))).sum(axis=1)
    assert np.max(np.abs(vals.imag)) < 1e-12
    assert np.allclose(vals.real, synthesize(f, 64).samples, atol=1e-12)
    assert c[0].imag == 0


def test_derivatives():
    N = 6
    assert np.all(d_theta(SpectralField.isotropic(N)).coeffs == 0)
    d = d_theta(cos_mode(N, 2))
    expected = SpectralField.from_modes(N, {2: -2 / (2j)})  # -2 sin 2theta
    assert np.allclose(d.coeffs, expected.coeffs)
    f = random_field(make_rng(3), N)
    assert np.allclose(d_theta(d_theta(f)).coeffs, -(f.wavenumbers**2) * f.coeffs)
    assert d.coeffs[N] == 0


def test_convolution_maier_saupe():
    N = 8
    k = KernelSpec.maier_saupe(3.7)
    assert np.all(convolve(k, SpectralField.isotropic(N)).coeffs == 0)
    out = convolve(k, cos_mode(N, 2, 1 / np.pi))
    assert np.allclose(out.coeffs, cos_mode(N, 2, 3.7 / 2).coeffs, atol=1e-15)
    sin4 = SpectralField.from_modes(N, {4: 1 / (2j)})
    assert np.all(convolve(k, sin4).coeffs == 0)


def test_maier_saupe_matches_cosine_series():
    ms = KernelSpec.maier_saupe(2.0)
    cs = KernelSpec(2.0, (0.0, 0.0, 0.25))
    theta = np.linspace(0, TWO_PI, 17)
    assert np.allclose(ms(theta), 0.5 * np.cos(2 * theta))
    assert np.allclose(ms(theta), ms(-theta))
    assert np.allclose(ms.khat(5), cs.khat(5))
    assert ms.is_maier_saupe and cs.is_maier_saupe
    assert KernelSpec.maier_saupe(1).sup_derivative(1) == 1
    assert KernelSpec.maier_saupe(1).sup_derivative(2) == 2
    assert KernelSpec.maier_saupe(1).sup_derivative(4) == 8
    assert KernelSpec.maier_saupe(1).sup_derivative(0) == 0.5


def test_kernel_rejects_negative_concentration():
    with pytest.raises(ValueError):
        KernelSpec(-1.0)


@given(seeds)
def test_convolution_is_diagonal(seed):
    rng = make_rng(seed)
    k = KernelSpec(1.3, (0.1, 0.2, 0.3, -0.4))
    f, g = random_field(rng, 6), random_field(rng, 6)
    rf = convolve(k, f).coeffs / f.coeffs
    rg = convolve(k, g).coeffs / g.coeffs
    assert np.allclose(rf, rg, atol=1e-13)


def test_products_simple():
    N = 8
    f = random_field(make_rng(1), N)
    assert np.allclose(multiply(f, SpectralField.isotropic(N)).coeffs, f.coeffs / TWO_PI, atol=1e-15)
    sq = multiply(cos_mode(N, 2), cos_mode(N, 2))
    expected = SpectralField.from_modes(N, {0: 0.5, 4: 0.25})
    assert np.allclose(sq.coeffs, expected.coeffs, atol=1e-15)


def test_multiply_rejects_mismatched_truncation():
    with pytest.raises(ValueError):
        multiply(SpectralField.isotropic(3), SpectralField.isotropic(4))


def test_multiply_against_brute_force_on_many_pairs():
    rng = make_rng(99)
    for _ in range(100):
        N = int(rng.integers(2, 24))
        f = random_field(rng, N)
        g = random_field(rng, N)
        assert np.max(np.abs(multiply(f, g).coeffs - brute_convolution(f, g))) < 1e-13 * 10


def test_band_limited_product_is_exact():
    rng = make_rng(5)
    N = 16
    f = random_field(rng, N, bandwidth=7)
    g = random_field(rng, N, bandwidth=8)
    M = 4096
    exact = analyze(GridField(grid_values(f, M) * grid_values(g, M)), N)
    assert np.max(np.abs(multiply(f, g).coeffs - exact.coeffs)) < 1e-13


@given(seeds)
def test_operations_preserve_reality(seed):
    rng = make_rng(seed)
    f, g = random_field(rng, 10), random_field(rng, 10)
    k = KernelSpec.maier_saupe(4.0)
    for out in (d_theta(f), convolve(k, f), multiply(f, g), f + g, f - g, 2.0 * f,
                antiderivative(d_theta(f))):
        assert out.is_real(1e-13)


def test_norms_by_parseval():
    N = 6
    iso = SpectralField.isotropic(N)
    assert np.isclose(l2_norm(iso), 1 / np.sqrt(TWO_PI))
    assert np.isclose(l2_norm(cos_mode(N, 1)), np.sqrt(np.pi))
    assert np.isclose(h1_norm(cos_mode(N, 2)), np.sqrt(5 * np.pi))
    l1, l2, h1, linf = norms(cos_mode(N, 1))
    # |cos| has kinks, so the grid estimate is only first-order accurate here
    assert np.isclose(l1, 4.0, rtol=2e-3) and np.isclose(linf, 1.0)


@given(seeds)
def test_parseval_against_quadrature(seed):
    f = random_field(make_rng(seed), 12)
    vals = grid_values(f, 256)
    assert abs(l2_norm(f) ** 2 - np.sum(vals**2) * TWO_PI / 256) < 1e-10 * max(1, l2_norm(f) ** 2)


def test_mass_and_field_arithmetic():
    iso = SpectralField.isotropic(4)
    assert iso.mass == pytest.approx(1.0)
    shifted = iso + 1.0
    assert shifted.mass == pytest.approx(1.0 + TWO_PI)
    assert np.allclose((-iso).coeffs, -iso.coeffs)
    assert np.allclose((iso / 2).coeffs, iso.coeffs / 2)
    assert iso.truncate(6).truncate(4) == iso
    assert iso[10] == 0
    with pytest.raises(ValueError):
        SpectralField(np.zeros(4))
    with pytest.raises(ValueError):
        iso.coeffs[0] = 1.0


def test_antiderivative_vanishes_at_origin():
    f = d_theta(random_field(make_rng(2), 9))
    F = antiderivative(f)
    assert abs(grid_values(F, 64)[0]) < 1e-13
    assert np.allclose(d_theta(F).coeffs, f.coeffs)


def test_csv_round_trip(tmp_path):
    f = random_field(make_rng(4), 7)
    write_spectral_csv(f, tmp_path / "f.csv")
    g = read_spectral_csv(tmp_path / "f.csv")
    assert np.array_equal(f.coeffs, g.coeffs)
    write_grid_csv(f, tmp_path / "g.csv")
    lines = (tmp_path / "g.csv").read_text().splitlines()
    assert lines[0] == "theta,f" and len(lines) == 8 * 7 + 1
