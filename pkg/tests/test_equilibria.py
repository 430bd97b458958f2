import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special

from smolu.dynamics import FlowParams, SimConfig, rhs, simulate, rotate_frame
from smolu.equilibria import (
    DissipativityBound,
    GradientPotential,
    NematicState,
    energy,
    energy_dissipation,
    h_quad,
    nematic_field,
    order_params,
    solve_r,
)
from smolu.errors import EntropyDomainError
from smolu.spectral import TWO_PI, KernelSpec, SpectralField, d_theta, grid_values, l2_norm

from conftest import even_field

B_VALUES = (4.5, 5.0, 6.0, 8.0, 12.0)


def test_h_at_zero_and_symmetry():
    assert h_quad(0.0)[0] == pytest.approx(TWO_PI, abs=1e-14)
    for x in (0.5, 1.0, 3.0):
        assert h_quad(x)[0] == pytest.approx(h_quad(-x)[0], rel=1e-14)


def test_h_against_bessel_and_brute_force():
    # h(x) = 2 pi I0(x) and h'(x) = 2 pi I1(x)
    for x in (0.3, 1.0, 2.17, 7.5):
        h, dh = h_quad(x)
        assert h == pytest.approx(TWO_PI * special.i0(x), rel=1e-13)
        assert dh == pytest.approx(TWO_PI * special.i1(x), rel=1e-13)
    M = 10**6
    theta = TWO_PI * np.arange(M) / M
    brute = np.exp(np.cos(2 * theta)).sum() * TWO_PI / M
    assert abs(h_quad(1.0)[0] - brute) < 1e-12


def bessel_root(b):
    # independent oracle: I1(r)/I0(r) = 2r/b via scipy's bracketing solver
    from scipy.optimize import brentq
    return brentq(lambda r: special.i1(r) / special.i0(r) - 2 * r / b, 1e-6, 60, xtol=1e-15)


@pytest.mark.parametrize("b", B_VALUES + (100.0,))
def test_solve_r_matches_bessel_oracle(b):
    r = solve_r(b)
    assert r == pytest.approx(bessel_root(b), abs=1e-10)
    assert abs(NematicState.from_b(b).relation_residual) < 1e-12


def test_no_nematic_root_at_or_below_threshold():
    assert solve_r(4.0) is None
    assert solve_r(2.0) is None
    assert NematicState.from_b(4.0).r == 0.0
    with pytest.raises(ValueError):
        solve_r(0.0)


def test_r_increasing_in_b():
    bs = np.arange(4.5, 12.01, 0.5)
    rs = [solve_r(b) for b in bs]
    assert np.all(np.diff(rs) > 0)


def test_known_value_at_b6():
    st_ = NematicState.from_b(6.0)
    assert st_.r == pytest.approx(2.1724761528790837, abs=1e-12)
    assert st_.Z == pytest.approx(16.192527015111402, rel=1e-13)


@pytest.mark.parametrize("b", B_VALUES)
def test_moment_identity(b):
    g = nematic_field(NematicState.from_b(b), 64)
    op = order_params(g)
    assert op.y[1] == pytest.approx(1 - 4 / b, abs=1e-8)
    # squared first moment exceeds 1 - 4/b on the nematic branch
    assert op.y[0] ** 2 > 1 - 4 / b


def test_nematic_field_properties():
    g = nematic_field(NematicState.from_b(6.0), 64)
    assert g.mass == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(g.coeffs.imag)) < 1e-12
    assert grid_values(g).min() > 0
    res = rhs(g, FlowParams(), KernelSpec.maier_saupe(6.0))
    assert l2_norm(res) < 1e-8
    iso = nematic_field(NematicState.from_b(3.0), 16)
    assert np.allclose(iso.coeffs, SpectralField.isotropic(16).coeffs, atol=1e-15)
    minus = NematicState.from_b(6.0, sign=-1)
    theta = np.array([0.0, np.pi / 2])
    assert minus(theta)[0] < minus(theta)[1]


def test_order_params_directions():
    iso = order_params(SpectralField.isotropic(8))
    assert not iso.director_defined and iso.director_angle == 0.0
    assert np.all(iso.y == 0) and np.all(iso.s == 0)
    g = nematic_field(NematicState.from_b(6.0), 64)
    op = order_params(g)
    assert np.max(np.abs(op.s)) < 1e-14 and op.y[0] > 0
    for phi in (0.3, -1.0, 1.4):
        rot = order_params(rotate_frame(g, phi)).director_angle
        d = (rot + phi) % np.pi
        assert min(d, np.pi - d) < 1e-12


def test_order_params_by_quadrature(rng):
    from smolu.spectral import random_field
    f = random_field(rng, 12)
    op = order_params(f)
    theta = TWO_PI * np.arange(256) / 256
    vals = grid_values(f, 256)
    for k in range(1, 5):
        assert op.y[k - 1] == pytest.approx(np.sum(np.cos(2 * k * theta) * vals) * TWO_PI / 256, abs=1e-12)
        assert op.s[k - 1] == pytest.approx(np.sum(np.sin(2 * k * theta) * vals) * TWO_PI / 256, abs=1e-12)


def test_gradient_potential_reproduces_drift():
    for alpha in (0.0, 0.7):
        W = GradientPotential.for_strain(0.3, 8, alpha)
        theta = TWO_PI * np.arange(32) / 32
        assert np.allclose(grid_values(W.V, 32), FlowParams(0.0, 0.3, alpha).V(theta), atol=1e-13)
    assert np.all(GradientPotential.zero(4).V.coeffs == 0)


def test_energy_values():
    iso = SpectralField.isotropic(16)
    assert energy(iso, KernelSpec.maier_saupe(0.0)) == pytest.approx(np.log(1 / TWO_PI), abs=1e-13)
    assert energy(iso, KernelSpec.maier_saupe(6.0)) == pytest.approx(np.log(1 / TWO_PI), abs=1e-13)
    g = nematic_field(NematicState.from_b(6.0), 64)
    assert energy(g, KernelSpec.maier_saupe(6.0)) < energy(iso.truncate(64), KernelSpec.maier_saupe(6.0))


def test_energy_against_independent_quadrature():
    k = KernelSpec.maier_saupe(6.0)
    f = even_field(32, 0.3, 0.1)
    W = GradientPotential.for_strain(0.2, 32)

    def density(t):
        return (1 + 2 * 0.3 * np.cos(2 * t) + 2 * 0.1 * np.cos(4 * t)) / TWO_PI

    def integrand(t):
        kf = 6.0 * 0.5 * 0.3 * np.cos(2 * t)
        return density(t) * np.log(density(t)) - 0.5 * kf * density(t) - 0.1 * np.sin(2 * t) * density(t)

    ref, _ = integrate.quad(integrand, 0, TWO_PI, epsabs=1e-13, limit=200)
    assert energy(f, k, W) == pytest.approx(ref, abs=1e-11)


def test_energy_refuses_negative_density():
    f = SpectralField.from_modes(4, {0: 1 / TWO_PI, 1: 0.2})
    with pytest.raises(EntropyDomainError):
        energy(f, KernelSpec.maier_saupe(1.0))
    with pytest.raises(EntropyDomainError):
        energy_dissipation(f, KernelSpec.maier_saupe(1.0))


def test_dissipation_vanishes_at_equilibria():
    for b in (6.0, 8.0):
        k = KernelSpec.maier_saupe(b)
        assert abs(energy_dissipation(nematic_field(NematicState.from_b(b), 64), k)) < 1e-10
    assert energy_dissipation(SpectralField.isotropic(8), KernelSpec.maier_saupe(6.0)) == 0.0
    assert energy_dissipation(even_field(16, 0.2), KernelSpec.maier_saupe(6.0)) < 0


def test_energy_bounded_below_along_run():
    b = 6.0
    k = KernelSpec.maier_saupe(b)
    cfg = SimConfig(kernel=k, t_end=5.0, record_every=100)
    traj = simulate(cfg, f0=even_field(64, 0.1))
    E = np.array([r.energy for r in traj])
    assert np.all(np.diff(E) <= 1e-10)
    assert E.min() > -(1 / np.e) * TWO_PI - 0.5 * b


def test_dissipativity_constant():
    bound = DissipativityBound(M=0.1, Nk=2.0, b=6.0, C_gn=1.0)
    M, bN = 0.1, 12.0
    expected = 4 * ((M + bN) / 2 * (1 / TWO_PI + 2 ** (1 / 3))
                    + (M / 2 ** (2 / 3)) ** 2 + (bN / 2 ** (2 / 3)) ** 2)
    assert bound.Cbar == pytest.approx(expected, rel=1e-14)
    assert bound.l2_bound(1.0, 0.0) == pytest.approx(1.0 + expected + 1 / np.pi)
    assert DissipativityBound(0.0, 2.0, 0.0).Cbar == 0.0


@given(st.floats(min_value=4.05, max_value=40.0))
def test_relation_holds_across_branch(b):
    s = NematicState.from_b(b)
    h, dh = h_quad(s.r)
    assert dh / h == pytest.approx(2 * s.r / b, abs=1e-11)
