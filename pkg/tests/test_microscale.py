import logging
import math

import numpy as np
import pytest

from services.microscale_service import (
    bernstein_K,
    canonical_remainder,
    cn_bound,
    disk_laplacian_mass,
    h_polynomial,
    homogeneity_order,
    micro_scale,
    q0_norm,
    q0_polynomial,
    scale_info,
    t_constant,
    tau0,
)
from services.potential_service import PotentialModel


@pytest.mark.parametrize("n", [1, 100, 1024])
def test_ginibre_microscale_is_n_to_minus_half(ginibre, n):
    assert micro_scale(ginibre, 0j, n) == pytest.approx(n**-0.5, rel=1e-12)


def test_ginibre_microscale_off_center(ginibre):
    assert micro_scale(ginibre, 0.4 + 0.2j, 100) == pytest.approx(0.1, rel=1e-9)


def test_quartic_degenerate_point(quartic):
    assert homogeneity_order(quartic, 0j) == 2
    # Delta^2 Q(0) = 4, so tau0^{-4} = 4 / (2 * 1)
    assert tau0(quartic, 0j) == pytest.approx(2 ** -0.25)
    assert micro_scale(quartic, 0j, 50) == pytest.approx((1 / 100) ** 0.25, rel=1e-12)


def test_regular_point_of_quartic(quartic):
    assert homogeneity_order(quartic, 0.3) == 1
    assert tau0(quartic, 0.3) == pytest.approx(1 / math.sqrt(4 * 0.09))


def test_sextic_homogeneity():
    assert homogeneity_order(PotentialModel.monomial(3), 0j) == 3


def test_disk_mass_off_center_agrees_with_quadrature(quartic):
    p = 0.2 + 0.1j
    # Delta Q = 4|z|^2; mean of |z|^2 over D_r(p) is |p|^2 + r^2/2
    r = 0.15
    assert disk_laplacian_mass(quartic, p, r) == pytest.approx(4 * r**2 * (abs(p) ** 2 + r**2 / 2), rel=1e-10)


def test_microscale_rejects_nonpositive_n(ginibre):
    with pytest.raises(ValueError):
        micro_scale(ginibre, 0j, 0)


def test_h_polynomial_of_ginibre(ginibre):
    p = 0.3 - 0.1j
    coefficients = h_polynomial(ginibre, p)
    assert coefficients.tolist() == pytest.approx([abs(p) ** 2, 2 * np.conj(p), 0.0])


def test_canonical_decomposition_of_ginibre_is_exact(ginibre):
    zeta = np.array([0.1 + 0.2j, -0.3j, 0.05])
    assert np.max(np.abs(canonical_remainder(ginibre, 0.4 + 0.1j, zeta))) < 1e-14


def test_canonical_remainder_is_higher_order(quartic):
    p = 0.3
    small = canonical_remainder(quartic, p, 1e-2)
    smaller = canonical_remainder(quartic, p, 5e-3)
    # O(|zeta|^3): halving zeta divides the remainder by about 8
    assert abs(small / smaller) == pytest.approx(8.0, rel=0.05)


def test_q0_of_regular_point_is_laplacian(quartic):
    assert q0_polynomial(quartic, 0.3) == pytest.approx({(1, 1): 4 * 0.09})
    assert q0_norm(quartic, 0.3) == pytest.approx(0.36)


def test_ginibre_constants(ginibre):
    assert cn_bound(ginibre, 0j, 100, C=0.0) == pytest.approx(1.0)
    assert bernstein_K(ginibre, 0j, 100, C=0.0) == pytest.approx(4 * math.sqrt(math.e))
    assert t_constant(ginibre, 0j, 100) == pytest.approx(1.0, abs=1e-9)


def test_bernstein_K_with_positive_constant(ginibre):
    # sup over n >= n0 of C_n sits at n0
    assert bernstein_K(ginibre, 0j, 4, C=2.0) == pytest.approx(4 * math.exp(0.5 * (1 + 2 / 2)))
    assert bernstein_K(ginibre, 0j, 4, C=-2.0) == pytest.approx(4 * math.sqrt(math.e))


def test_t_constant_of_quartic_exceeds_one(quartic):
    assert t_constant(quartic, 0.3, 64) > 1.0


def test_scale_info_ginibre(ginibre):
    info = scale_info(ginibre, 0j, 100)
    assert info.k == 1
    assert info.tau0 == pytest.approx(1.0)
    assert info.r_n == pytest.approx(0.1)
    assert info.certified


def test_scale_info_flags_uncertified_constant(quartic, caplog):
    with caplog.at_level(logging.WARNING):
        info = scale_info(quartic, 0j, 64)
    assert info.k == 2
    assert not info.certified
    assert "not certified" in caplog.text


def test_microscale_power_law_at_degenerate_point(quartic):
    ns = np.array([10**2, 10**4, 10**6])
    radii = np.array([micro_scale(quartic, 0j, int(n)) for n in ns])
    slope = np.polyfit(np.log(ns), np.log(radii), 1)[0]
    assert slope == pytest.approx(-1 / 4, abs=1e-9)
    assert (radii * ns**0.25 / tau0(quartic, 0j)).tolist() == pytest.approx([1.0, 1.0, 1.0], rel=1e-9)


def test_microscale_normalization_tends_to_one(quartic):
    ns = [10**2, 10**4, 10**6]
    deviations = [abs(micro_scale(quartic, 0.3, n) * math.sqrt(n) / tau0(quartic, 0.3) - 1.0) for n in ns]
    assert deviations[0] > deviations[1] > deviations[2]
    assert deviations[2] < 1e-3


def test_t_constant_tends_to_one(quartic):
    values = [t_constant(quartic, 0.3, n) for n in (10**2, 10**4, 10**6)]
    assert values[0] > values[1] > values[2] >= 1.0
    assert values[2] < 1.05
