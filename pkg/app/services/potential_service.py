"""Radial polynomial external potentials, their Wirtinger calculus and the radial droplet."""
import logging
import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from exceptions import InvalidPotentialError
from models.potential_models import MonomialFamily, PotentialSpec, RadialPolynomialFamily
from models.quadrature_models import QuadratureSpec
from services.quadrature_service import DEFAULT_SPEC, find_root_monotone, integrate_disk

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RadialDroplet:
    """Droplet S = closed disk of radius outer_radius about the symmetry center."""

    outer_radius: float
    center: complex = 0j

    def contains(self, z) -> np.ndarray:
        return np.abs(np.asarray(z) - self.center) <= self.outer_radius


@dataclass(frozen=True)
class PotentialModel:
    """
    External potential Q(z) = sum_{m=1}^{M} c_m |z - a|^{2m}.

    Nonnegative coefficients make Q real-analytic and subharmonic everywhere,
    and a positive leading coefficient gives growth faster than any log|z|^2.
    """

    family: str
    coefficients: Tuple[float, ...]
    origin: complex = 0j
    _coefficient_array: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        coefficients = tuple(float(c) for c in self.coefficients)
        if not coefficients:
            raise InvalidPotentialError("potential needs at least one coefficient")
        if any(not math.isfinite(c) for c in coefficients):
            raise InvalidPotentialError("potential coefficients must be finite (Q real-analytic on the plane)")
        if any(c < 0 for c in coefficients):
            raise InvalidPotentialError(
                "negative coefficient: Laplacian of Q must be nonnegative for the equilibrium measure to be positive"
            )
        if coefficients[-1] <= 0:
            raise InvalidPotentialError(
                "leading coefficient must be positive: growth condition liminf Q/log|z|^2 > 1 fails"
            )
        object.__setattr__(self, "coefficients", coefficients)
        array = np.asarray(coefficients, dtype=np.float64)
        array.setflags(write=False)
        object.__setattr__(self, "_coefficient_array", array)
        object.__setattr__(self, "origin", complex(self.origin))

    # Construction

    @classmethod
    def ginibre(cls, origin: complex = 0j) -> "PotentialModel":
        return cls("ginibre", (1.0,), origin)

    @classmethod
    def monomial(cls, k: int, origin: complex = 0j) -> "PotentialModel":
        if k < 1:
            raise InvalidPotentialError(f"monomial degree must be a positive integer, got {k!r}")
        return cls(f"monomial({k})", (0.0,) * (k - 1) + (1.0,), origin)

    @classmethod
    def radial_polynomial(cls, coefficients, origin: complex = 0j) -> "PotentialModel":
        return cls("radial-polynomial", tuple(coefficients), origin)

    @classmethod
    def from_spec(cls, spec: PotentialSpec) -> "PotentialModel":
        origin = spec.center_complex
        if isinstance(spec.family, MonomialFamily):
            return cls.monomial(spec.family.monomial, origin)
        if isinstance(spec.family, RadialPolynomialFamily):
            return cls.radial_polynomial(spec.family.radial_polynomial, origin)
        return cls.ginibre(origin)

    # Metadata

    @property
    def degree(self) -> int:
        """Highest power m of |z|^{2m}."""
        return len(self.coefficients)

    @property
    def coefficient_array(self) -> np.ndarray:
        return self._coefficient_array

    @property
    def growth_exponent(self) -> float:
        """liminf Q / log|z|^2; infinite for every polynomial family."""
        return math.inf

    # Evaluation

    def _radius_squared(self, z) -> np.ndarray:
        w = np.asarray(z, dtype=complex) - self.origin
        return w.real**2 + w.imag**2

    def evaluate(self, z):
        """Q(z), by Horner's rule in |z - a|^2."""
        s = self._radius_squared(z)
        value = np.zeros_like(s)
        for c in reversed(self.coefficients):
            value = (value + c) * s
        return value if value.ndim else float(value)

    def wirtinger(self, z, i: int, j: int):
        """
        Mixed Wirtinger derivative d^i dbar^j Q at z.

        Each term c_m w^m wbar^m differentiates to
        c_m m!/(m-i)! m!/(m-j)! w^{m-i} wbar^{m-j}; orders beyond the degree give 0.
        """
        if i < 0 or j < 0:
            raise ValueError("derivative orders must be nonnegative")
        w = np.asarray(z, dtype=complex) - self.origin
        total = np.zeros_like(w)
        for m, c in enumerate(self.coefficients, start=1):
            if c == 0.0 or i > m or j > m:
                continue
            factor = c * math.perm(m, i) * math.perm(m, j)
            total = total + factor * w ** (m - i) * np.conj(w) ** (m - j)
        return total if total.ndim else complex(total)

    def laplacian(self, z):
        """Delta Q = d dbar Q, one quarter of the standard Laplacian."""
        s = self._radius_squared(z)
        value = np.zeros_like(s)
        for m, c in enumerate(self.coefficients, start=1):
            if c:
                value = value + c * m * m * s ** (m - 1)
        return value if value.ndim else float(value)

    def dbar(self, z):
        """dbar Q(z) = sum_m c_m m |w|^{2(m-1)} w."""
        w = np.asarray(z, dtype=complex) - self.origin
        s = w.real**2 + w.imag**2
        radial = np.zeros_like(s)
        for m, c in enumerate(self.coefficients, start=1):
            if c:
                radial = radial + c * m * s ** (m - 1)
        value = radial * w
        return value if value.ndim else complex(value)

    def gradient(self, z):
        """Real gradient (dQ/dx, dQ/dy) encoded as dQ/dx + i dQ/dy = 2 dbar Q."""
        return 2.0 * self.dbar(z)

    # Droplet and equilibrium measure

    def disk_mass(self, radius):
        """Equilibrium-density mass of D_radius(a): sum_m c_m m radius^{2m}."""
        s = np.asarray(radius, dtype=float) ** 2
        value = np.zeros_like(s)
        for c_m_index in range(len(self.coefficients) - 1, -1, -1):
            m = c_m_index + 1
            value = (value + self.coefficients[c_m_index] * m) * s
        return value if value.ndim else float(value)

    def droplet(self) -> RadialDroplet:
        """Radius R with integral of Delta Q over D_R equal to 1."""
        hi = 1.0
        while self.disk_mass(hi) < 1.0:
            hi *= 2.0
        radius = find_root_monotone(lambda r: self.disk_mass(r) - 1.0, 0.0, hi, tol=1e-15)
        logger.debug(f"[Potential] Droplet of {self.family}: R={radius!r}")
        return RadialDroplet(outer_radius=radius, center=self.origin)

    def equilibrium_density(self, z, droplet: RadialDroplet | None = None):
        """Density of sigma with respect to dA: Delta Q inside the droplet, 0 outside."""
        droplet = droplet or self.droplet()
        inside = droplet.contains(z)
        value = np.where(inside, self.laplacian(z), 0.0)
        return value if np.ndim(value) else float(value)

    def equilibrium_moment(self, m: int, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
        """Integral of |z - a|^{2m} against the equilibrium measure."""
        droplet = self.droplet()
        return integrate_disk(
            lambda z: self._radius_squared(z) ** m * self.laplacian(z),
            self.origin,
            droplet.outer_radius,
            spec,
        )

    def sample_equilibrium(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """Draw points from sigma: radius by inverse CDF of disk_mass, angle uniform."""
        radius = self.droplet().outer_radius
        levels = rng.random(count)
        angles = rng.random(count) * 2.0 * math.pi
        radii = np.array(
            [find_root_monotone(lambda r, u=u: self.disk_mass(r) - u, 0.0, radius, tol=1e-14) for u in levels]
        )
        return self.origin + radii * np.exp(1j * angles)

    def recentred(self, p: complex) -> "RecentredPotential":
        return RecentredPotential(self, complex(p))


@dataclass(frozen=True)
class RecentredPotential:
    """The view Q~(zeta) = Q(zeta + p), exposing the same derivative API about 0."""

    base: PotentialModel
    p: complex

    def evaluate(self, zeta):
        return self.base.evaluate(np.asarray(zeta) + self.p)

    def wirtinger(self, zeta, i: int, j: int):
        return self.base.wirtinger(np.asarray(zeta) + self.p, i, j)

    def laplacian(self, zeta):
        return self.base.laplacian(np.asarray(zeta) + self.p)
