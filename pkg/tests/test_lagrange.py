import math
import warnings

import numpy as np
import pytest

import services.lagrange_service as lagrange_service
from exceptions import DomainError
from services.gibbs_service import Configuration
from services.lagrange_service import (
    LagrangeBasis,
    _tail_envelope,
    bound_constants,
    ell_power_integral,
    grad_abs_ell,
    lagrange_ratio,
    log_abs_ell,
    mass_report,
    morrey_ratio,
    replacement_residual,
    rescaled_ell_modulus,
    verify_bernstein,
    verify_mass_identity,
    verify_morrey,
    verify_replacement,
    weighted_polynomial_ratio,
)
from services.potential_service import PotentialModel
from services.quadrature_service import integrate_annulus

SQRT_E = math.sqrt(math.e)


def random_basis(model, n, rng):
    return LagrangeBasis(Configuration.equilibrium_seeded(model, n, rng), model)


def test_cardinal_property(ginibre, rng):
    basis = random_basis(ginibre, 6, rng)
    for j in range(6):
        for k in range(6):
            value = log_abs_ell(basis, j, basis.nodes[k])
            assert value == (0.0 if j == k else -math.inf)


def test_single_node_lagrange_modulus(ginibre):
    basis = LagrangeBasis(Configuration([0j]), ginibre)
    assert log_abs_ell(basis, 0, 1.0) == pytest.approx(-0.5)


def test_log_abs_ell_vectorizes(ginibre, rng):
    basis = random_basis(ginibre, 5, rng)
    zeta = np.array([[0.1, 0.2j], [-0.3, 0.4 + 0.1j]])
    values = log_abs_ell(basis, 2, zeta)
    assert values.shape == (2, 2)
    assert values[1, 0] == pytest.approx(log_abs_ell(basis, 2, -0.3))


def test_index_out_of_range(ginibre):
    basis = LagrangeBasis(Configuration([0.1, 0.2]), ginibre)
    with pytest.raises(IndexError):
        log_abs_ell(basis, 2, 0.0)


def test_replacement_identity_two_particles(ginibre, rng):
    for _ in range(20):
        basis = random_basis(ginibre, 2, rng)
        zeta = complex(rng.normal(), rng.normal())
        beta = float(rng.uniform(0.5, 8.0))
        assert abs(replacement_residual(basis, int(rng.integers(2)), zeta, beta)) < 1e-10


def test_replacement_identity_quartic(quartic, rng):
    basis = random_basis(quartic, 16, rng)
    for j in range(16):
        zeta = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        assert abs(replacement_residual(basis, j, zeta, 2.5)) <= 1e-9


def test_replacement_at_another_node_is_matched(ginibre, rng):
    basis = random_basis(ginibre, 4, rng)
    assert replacement_residual(basis, 0, basis.nodes[3], 2.0) == 0.0


def test_replacement_suite_passes():
    report = verify_replacement(trials=200, seed=3)
    assert report.passed
    assert report.trials == 200
    assert report.worst_case <= report.bound


def test_ell_power_integral_gaussian(ginibre):
    basis = LagrangeBasis(Configuration([0j]), ginibre)
    value, tail = ell_power_integral(basis, 0, 1.0)
    assert value == pytest.approx(1.0, rel=1e-7)
    assert tail < 1e-8


def test_tail_envelope_is_exact_for_a_single_node(ginibre):
    basis = LagrangeBasis(Configuration([0j]), ginibre)
    # |l|^2 = e^{-|zeta|^2}, whose mass outside D_3 is e^{-9}
    assert _tail_envelope(basis, 0, 1.0, 3.0) == pytest.approx(math.exp(-9.0), rel=1e-6)


def test_tail_envelope_dominates_the_tail(quartic, rng):
    basis = random_basis(quartic, 5, rng)
    cutoff = 1.2
    tail = integrate_annulus(lambda z: np.exp(2.0 * log_abs_ell(basis, 0, z)), 0j, cutoff, 3 * cutoff)
    assert 0.0 < tail <= _tail_envelope(basis, 0, 1.0, cutoff)


def test_ell_power_integral_shifted_node(ginibre):
    # e^{beta Q(z_1)} times the integral of e^{-beta |zeta|^2}
    basis = LagrangeBasis(Configuration([1.0]), ginibre)
    value, _ = ell_power_integral(basis, 0, 2.0)
    assert value == pytest.approx(math.exp(2.0) / 2.0, rel=1e-7)


def test_ell_power_integral_is_positive(quartic, rng):
    basis = random_basis(quartic, 3, rng)
    value, _ = ell_power_integral(basis, 1, 1.5)
    assert value > 0


def test_ell_power_integral_rejects_nonpositive_beta(ginibre):
    with pytest.raises(DomainError):
        ell_power_integral(LagrangeBasis(Configuration([0j]), ginibre), 0, 0.0)


def test_gradient_of_single_node_modulus(ginibre):
    basis = LagrangeBasis(Configuration([0j]), ginibre)
    assert grad_abs_ell(basis, 0, 0.0) == 0.0
    assert grad_abs_ell(basis, 0, 1.0) == pytest.approx(math.exp(-0.5))


def test_gradient_matches_finite_differences(quartic, rng):
    basis = random_basis(quartic, 7, rng)
    h = 1e-6
    checked = 0
    for _ in range(200):
        zeta = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        if np.min(np.abs(basis.nodes - zeta)) < 1e-2:
            continue
        modulus = math.exp(log_abs_ell(basis, 3, zeta))
        if modulus <= 1e-6:
            continue
        dx = (math.exp(log_abs_ell(basis, 3, zeta + h)) - math.exp(log_abs_ell(basis, 3, zeta - h))) / (2 * h)
        dy = (math.exp(log_abs_ell(basis, 3, zeta + 1j * h)) - math.exp(log_abs_ell(basis, 3, zeta - 1j * h))) / (2 * h)
        assert grad_abs_ell(basis, 3, zeta) == pytest.approx(math.hypot(dx, dy), rel=1e-5, abs=1e-8)
        checked += 1
    assert checked > 50


def test_gradient_at_other_node_is_cone_slope(ginibre, rng):
    basis = random_basis(ginibre, 5, rng)
    node = basis.nodes[1]
    h = 1e-8
    slope = math.exp(log_abs_ell(basis, 0, node + h)) / h
    assert grad_abs_ell(basis, 0, node) == pytest.approx(slope, rel=1e-5)


def test_rescaled_modulus(ginibre):
    basis = LagrangeBasis(Configuration([0j]), ginibre)
    assert rescaled_ell_modulus(basis, 0, 2.0, 0.5, 0j) == pytest.approx(math.exp(-0.5))


def test_bound_constants_at_beta_two():
    constants = bound_constants(2.0, K=4 * SQRT_E, T=1.0)
    assert constants.C0 == pytest.approx(2 * math.pi**0.25)
    assert constants.C == pytest.approx(4 * math.pi**0.25)
    assert constants.C == pytest.approx(5.32534, rel=1e-5)
    assert constants.c == pytest.approx(0.25 / (8 * math.pi**0.25 * SQRT_E) ** 2)
    assert constants.c == pytest.approx(8.1077e-4, rel=1e-4)


def test_bound_constants_approach_limit_from_below():
    limit = 1 / (8 * SQRT_E)
    values = [bound_constants(2.0**e, K=4 * SQRT_E, T=1.0).c for e in range(1, 11)]
    assert all(a < b for a, b in zip(values, values[1:]))
    assert all(value < limit for value in values)
    assert values[-1] == pytest.approx(limit, rel=5e-3)


@pytest.mark.parametrize("beta", [1.0, 0.5])
def test_bound_constants_require_beta_above_one(beta):
    with pytest.raises(DomainError):
        bound_constants(beta, K=4.0, T=1.0)


def test_mass_identity_single_particle(ginibre):
    result = verify_mass_identity(ginibre, 1, 2.0, 0.5)
    assert result.target == 0.25
    assert result.estimate == pytest.approx(0.25, abs=1e-6)
    report = mass_report("mass", result)
    assert report.passed
    assert report.details["ratio"] == pytest.approx(1.0, abs=4e-6)


def test_mass_identity_two_particles(ginibre):
    result = verify_mass_identity(ginibre, 2, 1.0, 0.5)
    assert result.estimate == pytest.approx(0.25, abs=1e-5)
    assert result.std_error < 1e-4
    assert mass_report("mass", result).passed


def test_two_particle_mass_detects_a_truncated_configuration_rule(ginibre, monkeypatch):
    # configuration space cut down to D_{0.3}, smaller than U
    monkeypatch.setattr(lagrange_service, "_plane_cutoff", lambda *args: 0.3)
    result = verify_mass_identity(ginibre, 2, 1.0, 0.5)
    assert abs(result.estimate - 0.25) > 1e-3
    assert not mass_report("mass", result).passed


def test_mass_identity_null_set(ginibre):
    result = verify_mass_identity(ginibre, 5, 2.0, 0.0)
    assert result.estimate == 0.0
    assert result.target == 0.0


@pytest.mark.slow
@pytest.mark.parametrize("model", [PotentialModel.ginibre(), PotentialModel.monomial(2)])
@pytest.mark.parametrize("beta", [1.0, 2.0, 4.0])
@pytest.mark.parametrize("radius", [0.25, 0.5, 1.0])
def test_mass_identity_single_particle_grid(model, beta, radius):
    result = verify_mass_identity(model, 1, beta, radius)
    assert result.estimate == pytest.approx(radius**2, abs=1e-6)


def test_bernstein_ratio_of_weighted_constant(ginibre):
    assert weighted_polynomial_ratio(ginibre, 0j, 64, [1.0]) == 0.0


def test_bernstein_ratio_of_lagrange_polynomial(ginibre, rng):
    basis = random_basis(ginibre, 16, rng)
    assert 0.0 <= lagrange_ratio(basis, 0, 0j, 0.25) <= 4 * SQRT_E


def test_bernstein_bound_ginibre():
    report = verify_bernstein(PotentialModel.ginibre(), 0j, 64, trials=200, seed=1)
    assert report.bound == pytest.approx(4 * SQRT_E)
    assert report.passed


def test_bernstein_bound_quartic_regular_point(quartic):
    report = verify_bernstein(quartic, 0.3, 64, trials=100, seed=2)
    assert report.passed


def test_morrey_ratio_of_linear_field():
    ratio = morrey_ratio(lambda z: np.real(z), lambda z: np.ones_like(z), 0.5, -0.5, 2.0)
    assert ratio == pytest.approx(1 / math.sqrt(3), rel=1e-10)


def test_morrey_ratio_of_constant_field():
    assert morrey_ratio(lambda z: np.zeros_like(np.real(z)), lambda z: np.zeros_like(z), 0.5, 0.1j, 2.0) == 0.0


@pytest.mark.parametrize("beta", [1.5, 2.0, 4.0])
def test_morrey_bound(beta):
    report = verify_morrey(beta, trials=300, seed=4)
    assert report.passed
    assert report.bound == pytest.approx(bound_constants(beta, 1.0, 1.0).C)


def test_check_reports_carry_plain_booleans():
    with warnings.catch_warnings():
        warnings.simplefilter("error", DeprecationWarning)
        report = verify_morrey(2.0, trials=5, seed=1, workers=1)
    assert type(report.passed) is bool
