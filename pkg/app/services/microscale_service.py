"""Local Taylor data at an observation point: k, tau0, r_n, H, Q0, q0 and the proof constants."""
import logging
import math
from typing import Dict, Tuple

import numpy as np

from config import Config
from exceptions import BracketError, DegeneratePointError
from models.quadrature_models import QuadratureSpec
from models.report_models import ScaleInfo
from services.potential_service import PotentialModel
from services.quadrature_service import DEFAULT_SPEC, find_root_monotone, integrate_disk

logger = logging.getLogger(__name__)

# Quadrature for disk masses off the symmetry center; the Laplacian is a polynomial there.
MASS_SPEC = QuadratureSpec(abs_tol=1e-15, rel_tol=1e-13, max_refinements=4)


def _taylor_coefficient(model: PotentialModel, p: complex, i: int, j: int) -> complex:
    return complex(model.wirtinger(p, i, j))


def homogeneity_order(model: PotentialModel, p: complex) -> int:
    """
    Smallest k >= 1 whose degree 2k-2 homogeneous Taylor part of Delta Q at p is nonzero.

    The coefficient of w^a wbar^b in Delta Q(p + w) is d^{a+1} dbar^{b+1} Q(p) / (a! b!),
    so the test is exact on the polynomial coefficients.
    """
    max_degree = 2 * model.degree - 2
    for degree in range(max_degree + 1):
        if any(_taylor_coefficient(model, p, a + 1, degree - a + 1) != 0 for a in range(degree + 1)):
            if degree % 2:
                raise DegeneratePointError(f"leading part of the Laplacian at {p!r} has odd degree {degree}")
            return degree // 2 + 1
    raise DegeneratePointError(f"Laplacian of {model.family} vanishes to all orders at {p!r}")


def tau0(model: PotentialModel, p: complex, k: int | None = None) -> float:
    """tau0 from tau0^{-2k} = Delta^k Q(p) / (k [(k-1)!]^2)."""
    k = k or homogeneity_order(model, p)
    top = _taylor_coefficient(model, p, k, k).real
    return (top / (k * math.factorial(k - 1) ** 2)) ** (-1.0 / (2 * k))


def disk_laplacian_mass(model: PotentialModel, p: complex, radius: float, spec: QuadratureSpec = MASS_SPEC) -> float:
    """Integral of Delta Q over D_radius(p) against dA."""
    if radius <= 0:
        return 0.0
    if p == model.origin:
        return model.disk_mass(radius)
    return integrate_disk(model.laplacian, p, radius, spec)


def micro_scale(model: PotentialModel, p: complex, n: int, spec: QuadratureSpec = MASS_SPEC) -> float:
    """
    Microscopic scale r_n at p: the radius with n * mass(D_{r_n}(p)) = 1.

    Raises:
        BracketError: If the mass never reaches 1/n while the bracket is expanded
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n!r}")
    k = homogeneity_order(model, p)
    target = 1.0 / n

    def excess(r: float) -> float:
        return disk_laplacian_mass(model, p, r, spec) - target

    hi = 2.0 * tau0(model, p, k) * n ** (-1.0 / (2 * k))
    for _ in range(64):
        if excess(hi) >= 0:
            break
        hi *= 2.0
    else:
        raise BracketError(0.0, hi, -target, excess(hi))
    return find_root_monotone(excess, 0.0, hi, tol=1e-15 * max(hi, 1.0))


def h_polynomial(model: PotentialModel, p: complex) -> np.ndarray:
    """Coefficients a_0..a_2k of H: a_0 = Q(p), a_m = 2 d^m Q(p) / m!."""
    k = homogeneity_order(model, p)
    coefficients = np.zeros(2 * k + 1, dtype=complex)
    coefficients[0] = model.evaluate(p)
    for m in range(1, 2 * k + 1):
        coefficients[m] = 2.0 * _taylor_coefficient(model, p, m, 0) / math.factorial(m)
    return coefficients


def q0_polynomial(model: PotentialModel, p: complex) -> Dict[Tuple[int, int], complex]:
    """Coefficients of Q0(w) = sum_{i+j=2k, i,j>=1} d^i dbar^j Q(p)/(i! j!) w^i wbar^j."""
    k = homogeneity_order(model, p)
    return {
        (i, 2 * k - i): _taylor_coefficient(model, p, i, 2 * k - i) / (math.factorial(i) * math.factorial(2 * k - i))
        for i in range(1, 2 * k)
    }


def canonical_remainder(model: PotentialModel, p: complex, zeta):
    """Q(p + zeta) - Re H(zeta) - Q0(zeta), which is O(|zeta|^{2k+1})."""
    zeta = np.asarray(zeta, dtype=complex)
    h_values = np.polynomial.polynomial.polyval(zeta, h_polynomial(model, p))
    q0_values = sum(c * zeta**i * np.conj(zeta) ** j for (i, j), c in q0_polynomial(model, p).items())
    return model.evaluate(zeta + p) - h_values.real - np.real(q0_values)


def q0_norm(model: PotentialModel, p: complex) -> float:
    """q0 = sum_{i+j=2k, i,j>=1} |d^i dbar^j Q(p)| / (i! j!)."""
    return float(sum(abs(c) for c in q0_polynomial(model, p).values()))


def cn_bound(model: PotentialModel, p: complex, n: int, C: float = Config.CN_CONSTANT) -> float:
    """C_n = tau0^{2k} q0 + C n^{-1/2k}."""
    k = homogeneity_order(model, p)
    return tau0(model, p, k) ** (2 * k) * q0_norm(model, p) + C * n ** (-1.0 / (2 * k))


def bernstein_K(model: PotentialModel, p: complex, n0: int, C: float = Config.CN_CONSTANT) -> float:
    """
    K = 4 sup_{n >= n0} exp(C_n / 2).

    C_n is monotone in n, so the supremum sits at n0 when C >= 0 and at the
    limit n -> infinity otherwise.
    """
    k = homogeneity_order(model, p)
    limit = tau0(model, p, k) ** (2 * k) * q0_norm(model, p)
    if C >= 0:
        return 4.0 * math.exp(0.5 * (limit + C * n0 ** (-1.0 / (2 * k))))
    return 4.0 * math.exp(0.5 * limit)


def t_constant(
    model: PotentialModel,
    p: complex,
    n: int,
    M: float = Config.NEIGHBOURHOOD_M,
    radial_points: int = 6,
    angular_points: int = 12,
) -> float:
    """Max over a polar grid of zeta in D_{M r_n}(p) of max(r_n(zeta)/r_n(p), r_n(p)/r_n(zeta))."""
    r_center = micro_scale(model, p, n)
    T = 1.0
    radii = np.linspace(0.0, M * r_center, radial_points + 1)[1:]
    angles = np.linspace(0.0, 2.0 * math.pi, angular_points, endpoint=False)
    for radius in radii:
        for angle in angles:
            zeta = p + radius * complex(math.cos(angle), math.sin(angle))
            r_zeta = micro_scale(model, zeta, n)
            T = max(T, r_zeta / r_center, r_center / r_zeta)
    return T


def scale_info(
    model: PotentialModel,
    p: complex,
    n: int,
    n0: int | None = None,
    M: float = Config.NEIGHBOURHOOD_M,
    C: float = Config.CN_CONSTANT,
) -> ScaleInfo:
    """Assemble the full ScaleInfo record at p."""
    k = homogeneity_order(model, p)
    n0 = n0 or n
    certified = k == 1
    if not certified:
        logger.warning(f"[Microscale] k={k} at {p!r}: Bernstein constant K is not certified")
    return ScaleInfo(
        center=(p.real, p.imag),
        n=n,
        k=k,
        tau0=tau0(model, p, k),
        r_n=micro_scale(model, p, n),
        h_coeffs=[(c.real, c.imag) for c in h_polynomial(model, p)],
        q0=q0_norm(model, p),
        cn_bound=cn_bound(model, p, n, C),
        K=bernstein_K(model, p, n0, C),
        T=t_constant(model, p, n, M),
        M=M,
        certified=certified,
    )
