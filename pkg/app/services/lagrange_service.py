"""Weighted Lagrange polynomials, the exact identities built on them, and the proof constants.

All products of n-1 factors are accumulated as sums of logarithms. A zero of
|l_j| is represented by -inf.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln, logsumexp

from config import Config
from exceptions import DomainError
from models.chain_models import ChainConfig
from models.quadrature_models import QuadratureSpec
from models.report_models import CheckReport
from services.gibbs_service import Configuration, batch_means_stderr, run_chain, total_energy
from services.microscale_service import bernstein_K, micro_scale, t_constant
from services.potential_service import PotentialModel
from services.quadrature_service import disk_rule, integrate_plane_truncated
from utils.seeds import make_rng

logger = logging.getLogger(__name__)

# Plane truncation: the cutoff sits where the log-integrand is this many nats below its peak, then doubles.
TRUNCATION_NATS = 40.0
ELL_SPEC = QuadratureSpec(abs_tol=1e-10, rel_tol=1e-8, max_refinements=6)
REPLACEMENT_TOLERANCE = 1e-9
MASS_QUADRATURE_TOLERANCE = 1e-6


@dataclass(frozen=True)
class LagrangeBasis:
    """Weighted Lagrange basis l_1..l_n of a configuration."""

    base: Configuration
    model: PotentialModel
    _log_denominators: np.ndarray = field(init=False, repr=False, compare=False)
    _node_potential: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        nodes = self.base.points
        distances = np.abs(nodes[:, None] - nodes[None, :])
        np.fill_diagonal(distances, 1.0)
        object.__setattr__(self, "_log_denominators", np.log(distances).sum(axis=1))
        object.__setattr__(self, "_node_potential", np.atleast_1d(self.model.evaluate(nodes)))

    @property
    def nodes(self) -> np.ndarray:
        return self.base.points

    @property
    def n(self) -> int:
        return self.base.n

    def check_index(self, j: int):
        if not 0 <= j < self.n:
            raise IndexError(f"basis index {j} out of range for n={self.n}")


def _scalar_or_array(values: np.ndarray, like) -> float | np.ndarray:
    return float(values) if np.ndim(like) == 0 else values


def log_abs_ell(basis: LagrangeBasis, j: int, zeta):
    """
    log|l_j(zeta)| = sum_{i != j} (log|zeta - z_i| - log|z_j - z_i|) - n (Q(zeta) - Q(z_j)) / 2.

    Exactly 0 at z_j and -inf at every other node.
    """
    basis.check_index(j)
    z = np.asarray(zeta, dtype=complex)
    others = np.delete(basis.nodes, j)
    with np.errstate(divide="ignore"):
        logs = np.log(np.abs(z[..., None] - others)).sum(axis=-1)
    value = logs - basis._log_denominators[j] - 0.5 * basis.n * (basis.model.evaluate(z) - basis._node_potential[j])
    value = np.where(z == basis.nodes[j], 0.0, value)
    return _scalar_or_array(value, zeta)


def rescaled_ell_modulus(basis: LagrangeBasis, j: int, z, r_n: float, center: complex):
    """|l_j(center + r_n z)|, the Lagrange modulus in microscopic coordinates."""
    return np.exp(log_abs_ell(basis, j, center + r_n * np.asarray(z, dtype=complex)))


def replacement_residual(basis: LagrangeBasis, j: int, zeta: complex, beta: float) -> float:
    """
    Log-domain residual of |l_j(zeta)|^{2 beta} e^{-beta H(base)} = e^{-beta H(base with z_j -> zeta)}.

    Zero when the identity holds; zeta at another node makes both sides vanish,
    which is reported as a residual of 0.
    """
    basis.check_index(j)
    zeta = complex(zeta)
    log_ell = log_abs_ell(basis, j, zeta)
    replaced = basis.nodes.copy()
    replaced[j] = zeta
    new_energy = total_energy(replaced, basis.model)
    if log_ell == -math.inf and new_energy == math.inf:
        return 0.0
    base_energy = total_energy(basis.base, basis.model)
    return 2.0 * beta * log_ell - beta * base_energy + beta * new_energy


def _cutoff_radius(basis: LagrangeBasis, j: int, beta: float) -> float:
    """Radius about the potential origin outside which 2 beta log|l_j| stays TRUNCATION_NATS below its peak."""
    origin = basis.model.origin
    reach = max(basis.model.droplet().outer_radius, float(np.max(np.abs(basis.nodes - origin))))
    radii = reach * np.geomspace(1e-3, 64.0, 400)
    angles = np.exp(1j * np.linspace(0.0, 2.0 * math.pi, 16, endpoint=False))
    log_values = 2.0 * beta * log_abs_ell(basis, j, origin + radii[:, None] * angles[None, :])
    peak = max(float(np.max(log_values)), 0.0)
    significant = np.nonzero(np.any(log_values > peak - TRUNCATION_NATS, axis=1))[0]
    last = radii[significant[-1]] if significant.size else reach
    return 2.0 * max(last, reach)


def _tail_envelope(basis: LagrangeBasis, j: int, beta: float, cutoff: float) -> float:
    """
    Bound on the integral of |l_j|^{2 beta} outside D_cutoff(a), a the symmetry center.

    With s = |zeta - a| and d_i = |z_i - a|, |zeta - z_i| <= s + d_i while Q(zeta)
    depends on s only, so the envelope is radial and integrates in t = s^2.
    """
    model = basis.model
    distances = np.abs(np.delete(basis.nodes, j) - model.origin)
    offset = -2.0 * beta * basis._log_denominators[j] + basis.n * beta * basis._node_potential[j]

    def envelope(t: float) -> float:
        s = math.sqrt(t)
        growth = basis.n * beta * float(model.evaluate(model.origin + s))
        log_value = 2.0 * beta * float(np.sum(np.log(s + distances))) - growth
        return math.exp(min(log_value + offset, 700.0))

    value, _ = quad(envelope, cutoff**2, math.inf, limit=200)
    return float(value)


def ell_power_integral(
    basis: LagrangeBasis, j: int, beta: float, spec: QuadratureSpec = ELL_SPEC
) -> Tuple[float, float]:
    """
    Integral of |l_j|^{2 beta} over the plane against dA.

    Returns:
        Tuple of (value, tail_bound) where tail_bound bounds the mass beyond the cutoff

    Raises:
        DomainError: If beta <= 0 or Q grows too slowly for |l_j|^{2 beta} to be integrable
    """
    if beta <= 0:
        raise DomainError(f"beta must be positive, got {beta!r}")
    basis.check_index(j)
    n = basis.n
    # |l_j|^{2 beta} dA decays like t^{beta (n - 1 - n rho)} dt at infinity
    if beta * (n * basis.model.growth_exponent - n + 1) <= 1.0:
        raise DomainError(f"|l_j|^(2 beta) is not integrable for growth exponent {basis.model.growth_exponent!r}")
    cutoff = _cutoff_radius(basis, j, beta)
    value, tail = integrate_plane_truncated(
        lambda z: np.exp(2.0 * beta * log_abs_ell(basis, j, z)),
        basis.model.origin,
        cutoff,
        spec,
        tail_bound=_tail_envelope(basis, j, beta, cutoff),
    )
    logger.debug(f"[Lagrange] Integral of |l_{j}|^(2 beta): {value!r} (cutoff {cutoff:.3f}, tail {tail:.2e})")
    return value, tail


def grad_abs_ell(basis: LagrangeBasis, j: int, zeta):
    """
    |grad |l_j|(zeta)| = |l_j(zeta)| |sum_{i != j} 1/(zeta - z_i) - n dQ(zeta)|.

    At a node z_i (i != j) the product form is 0 * inf; the value there is the
    limit |p'(z_i)| e^{-n Q(z_i)/2} / (|p(z_j)| e^{-n Q(z_j)/2}).
    """
    basis.check_index(j)
    z = np.atleast_1d(np.asarray(zeta, dtype=complex))
    others = np.delete(basis.nodes, j)
    log_ell = np.atleast_1d(log_abs_ell(basis, j, z))
    with np.errstate(divide="ignore", invalid="ignore"):
        log_derivative = (1.0 / (z[:, None] - others[None, :])).sum(axis=1)
        drift = log_derivative - basis.n * np.conj(np.atleast_1d(basis.model.dbar(z)))
        value = np.exp(log_ell) * np.abs(drift)
    for index, node in enumerate(others):
        at_node = z == node
        if np.any(at_node):
            rest = np.delete(others, index)
            log_limit = (
                float(np.sum(np.log(np.abs(node - rest))))
                - basis._log_denominators[j]
                - 0.5 * basis.n * (basis.model.evaluate(node) - basis._node_potential[j])
            )
            value[at_node] = math.exp(log_limit)
    return float(value[0]) if np.ndim(zeta) == 0 else value.reshape(np.shape(zeta))


@dataclass(frozen=True)
class BoundConstants:
    """Morrey and separation constants entering the spacing bound."""

    beta: float
    C0: float
    C: float
    K: float
    T: float
    c: float


def bound_constants(beta: float, K: float, T: float) -> BoundConstants:
    """
    C0 = 2 pi^{1/2beta}, C = C0 / (1 - 1/beta) and
    c = (1 - 1/beta)^{beta/(beta-1)} (C0 T^{1+2/beta} K)^{-beta/(beta-1)}.

    Raises:
        DomainError: If beta <= 1
    """
    if beta <= 1:
        raise DomainError(f"Morrey constant requires beta > 1, got {beta!r}")
    C0 = 2.0 * math.pi ** (1.0 / (2.0 * beta))
    gap = 1.0 - 1.0 / beta
    exponent = beta / (beta - 1.0)
    c = math.exp(exponent * math.log(gap) - exponent * math.log(C0 * T ** (1.0 + 2.0 / beta) * K))
    return BoundConstants(beta=beta, C0=C0, C=C0 / gap, K=K, T=T, c=c)


def _map_trials(trial: Callable[[np.random.Generator], float], trials: int, seed: int, workers: Optional[int]) -> List[float]:
    """Run trial(rng_i) for i < trials with per-trial seeds; results keep trial order."""
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda i: trial(make_rng(seed, i)), range(trials)))


# Replacement identity

REPLACEMENT_FAMILIES: Tuple[PotentialModel, ...] = (
    PotentialModel.ginibre(),
    PotentialModel.monomial(2),
    PotentialModel.radial_polynomial((0.5, 0.25)),
)


def replacement_trial(rng: np.random.Generator, max_n: int = 64) -> Tuple[float, float]:
    """One random replacement case: (|residual|, scale 1 + beta |H|)."""
    model = REPLACEMENT_FAMILIES[int(rng.integers(len(REPLACEMENT_FAMILIES)))]
    n = int(rng.integers(1, max_n + 1))
    beta = float(rng.uniform(0.5, 8.0))
    config = Configuration.equilibrium_seeded(model, n, rng)
    radius = model.droplet().outer_radius
    zeta = complex(1.5 * radius * math.sqrt(rng.random()) * np.exp(2j * math.pi * rng.random()))
    basis = LagrangeBasis(config, model)
    j = int(rng.integers(n))
    residual = abs(replacement_residual(basis, j, zeta, beta))
    return residual, 1.0 + beta * abs(total_energy(config, model))


def verify_replacement(trials: int = 1000, seed: int = 0, workers: Optional[int] = None) -> CheckReport:
    """Replacement identity over random (n, beta, family, zeta) cases, relative to 1 + beta |H|."""
    outcomes = _map_trials(replacement_trial, trials, seed, workers)
    relative = [residual / scale for residual, scale in outcomes]
    worst = max(relative, default=0.0)
    logger.info(f"[Lagrange] Replacement identity: worst relative residual {worst:.3e} over {trials} trials")
    return CheckReport(
        name="replacement",
        trials=trials,
        worst_case=worst,
        bound=REPLACEMENT_TOLERANCE,
        passed=bool(worst <= REPLACEMENT_TOLERANCE),
        details={"worst_absolute": max((r for r, _ in outcomes), default=0.0)},
    )


# Mass identity


@dataclass(frozen=True)
class MassEstimate:
    """Estimate of E[chi_U(z_1) int |l_1|^{2 beta} dA] next to its target |U|."""

    estimate: float
    std_error: float
    target: float
    samples: int = 0
    method: str = "quadrature"

    @property
    def ratio(self) -> float:
        return self.estimate / self.target if self.target else math.nan


def _plane_cutoff(model: PotentialModel, n: int, beta: float) -> float:
    """Radius beyond which the one-particle Gibbs weight is TRUNCATION_NATS below the droplet edge."""
    radius = model.droplet().outer_radius
    edge = n * beta * model.evaluate(model.origin + radius)
    rho = radius
    while n * beta * model.evaluate(model.origin + rho) - 2.0 * beta * (n - 1) * math.log1p(rho + radius) < edge + TRUNCATION_NATS:
        rho *= 1.25
    return rho


def _mass_identity_n1(model: PotentialModel, beta: float, center: complex, radius: float) -> MassEstimate:
    cutoff = _plane_cutoff(model, 1, beta)
    partition, _ = integrate_plane_truncated(lambda z: np.exp(-beta * model.evaluate(z)), model.origin, cutoff)
    estimates = []
    for panels in (2, 4):
        points, weights = disk_rule(center, radius, panels, panels, 6)
        inner = np.array(
            [ell_power_integral(LagrangeBasis(Configuration([point]), model), 0, beta)[0] for point in points]
        )
        density = np.exp(-beta * model.evaluate(points)) / partition
        estimates.append(float(np.sum(weights * density * inner)))
    return MassEstimate(estimates[-1], abs(estimates[-1] - estimates[0]), radius**2, method="nested-quadrature")


def _pair_cutoff(model: PotentialModel, beta: float) -> float:
    """Radius beyond which |zeta - w|^{2 beta} e^{-2 beta Q(zeta)} is TRUNCATION_NATS below its peak for w in the droplet."""
    reach = model.droplet().outer_radius
    radii = reach * np.geomspace(1e-3, 64.0, 400)
    log_values = 2.0 * beta * (np.log(radii + reach) - model.evaluate(model.origin + radii))
    significant = np.nonzero(log_values > float(np.max(log_values)) - TRUNCATION_NATS)[0]
    return 1.25 * max(float(radii[significant[-1]]), reach)


def _log_pair_integrals(
    model: PotentialModel, beta: float, targets: np.ndarray, points: np.ndarray, weights: np.ndarray, chunk: int = 256
) -> np.ndarray:
    """log of int |zeta - w|^{2 beta} e^{-2 beta Q(zeta)} dA(zeta) for every w in targets, on the given rule."""
    log_weights = np.log(weights) - 2.0 * beta * model.evaluate(points)
    out = np.empty(len(targets))
    with np.errstate(divide="ignore"):
        for start in range(0, len(targets), chunk):
            block = targets[start : start + chunk]
            log_terms = 2.0 * beta * np.log(np.abs(block[:, None] - points[None, :])) + log_weights[None, :]
            out[start : start + chunk] = logsumexp(log_terms, axis=1)
    return out


def _mass_identity_n2(model: PotentialModel, beta: float, center: complex, radius: float) -> MassEstimate:
    """
    Quadrature over (z_1 in U, z_2) with the inner integral of |l_1|^{2 beta} taken on
    a separate zeta rule, whose cutoff and resolution differ from the configuration rule.
    """
    cutoff = _plane_cutoff(model, 2, beta)
    zeta_cutoff = _pair_cutoff(model, beta)
    estimates = []
    for panels in (2, 4):
        u_points, u_weights = disk_rule(center, radius, panels, panels, 6)
        plane, plane_weights = disk_rule(model.origin, cutoff, 4 * panels, panels, 8)
        zeta, zeta_weights = disk_rule(model.origin, zeta_cutoff, 4 * panels, panels, 10)
        q_plane = model.evaluate(plane)
        log_plane_weights = np.log(plane_weights)
        # -beta H(z_1, z_2) integrated over z_1 on the configuration rule
        log_partition = logsumexp(
            log_plane_weights
            - 2.0 * beta * q_plane
            + _log_pair_integrals(model, beta, plane, plane, plane_weights)
        )
        # l_1(zeta) = (zeta - z_2) / (z_1 - z_2) e^{-(Q(zeta) - Q(z_1))} for n = 2
        log_zeta_integrals = _log_pair_integrals(model, beta, plane, zeta, zeta_weights)

        terms = []
        with np.errstate(divide="ignore"):
            for z1, w1 in zip(u_points, u_weights):
                q1 = model.evaluate(z1)
                log_z12 = np.log(np.abs(z1 - plane))
                minus_beta_h = 2.0 * beta * log_z12 - 2.0 * beta * (q1 + q_plane)
                log_inner = log_zeta_integrals + 2.0 * beta * q1 - 2.0 * beta * log_z12
                terms.append(math.log(w1) + logsumexp(minus_beta_h + log_inner + log_plane_weights))
        estimates.append(math.exp(logsumexp(terms) - log_partition))
    return MassEstimate(estimates[-1], abs(estimates[-1] - estimates[0]), radius**2, method="tensor-quadrature")


def _mass_identity_sampled(
    model: PotentialModel,
    n: int,
    beta: float,
    center: complex,
    radius: float,
    chain_config: ChainConfig,
    sample_budget: int,
    workers: Optional[int],
) -> MassEstimate:
    samples = run_chain(model, n, chain_config, workers=workers).configurations[:sample_budget]
    values = []
    for config in samples:
        if abs(config.points[0] - center) <= radius:
            values.append(ell_power_integral(LagrangeBasis(config, model), 0, beta)[0])
        else:
            values.append(0.0)
    estimate = float(np.mean(values)) if values else math.nan
    return MassEstimate(estimate, batch_means_stderr(values), radius**2, samples=len(values), method="monte-carlo")


def verify_mass_identity(
    model: PotentialModel,
    n: int,
    beta: float,
    radius: float,
    center: Optional[complex] = None,
    sample_budget: int = 200,
    chain_config: Optional[ChainConfig] = None,
    workers: Optional[int] = None,
) -> MassEstimate:
    """
    E[chi_U(z_1) int |l_1|^{2 beta} dA] for U = D_radius(center), whose exact value is |U| = radius^2.

    Particle 1 stands for every j by exchangeability. n = 1 uses nested
    quadrature, n = 2 a tensor rule over configuration space, larger n the
    Metropolis sampler.
    """
    if beta <= 0:
        raise DomainError(f"beta must be positive, got {beta!r}")
    center = model.origin if center is None else complex(center)
    if radius <= 0:
        return MassEstimate(0.0, 0.0, 0.0)
    if n == 1:
        result = _mass_identity_n1(model, beta, center, radius)
    elif n == 2:
        result = _mass_identity_n2(model, beta, center, radius)
    else:
        chain_config = chain_config or ChainConfig(beta=beta)
        result = _mass_identity_sampled(model, n, beta, center, radius, chain_config, sample_budget, workers)
    logger.info(
        f"[Lagrange] Mass identity n={n}, beta={beta}, |U|={result.target:.6g}: "
        f"{result.estimate:.10g} +/- {result.std_error:.2e} ({result.method})"
    )
    return result


def verify_microscopic_mass(
    model: PotentialModel,
    p: complex,
    n: int,
    beta: float,
    chain_config: Optional[ChainConfig] = None,
    sample_budget: int = 200,
    workers: Optional[int] = None,
) -> MassEstimate:
    """Mass identity with U = D_{r_n}(p); the ratio estimate / r_n^2 should be 1."""
    r_n = micro_scale(model, p, n)
    return verify_mass_identity(model, n, beta, r_n, p, sample_budget, chain_config, workers)


def mass_report(name: str, result: MassEstimate, sigmas: float = 4.0) -> CheckReport:
    """CheckReport for a mass estimate: quadrature within tolerance, Monte Carlo within `sigmas` standard errors."""
    deviation = abs(result.estimate - result.target)
    if result.method == "monte-carlo":
        bound = sigmas * result.std_error
    else:
        bound = MASS_QUADRATURE_TOLERANCE + result.std_error
    return CheckReport(
        name=name,
        trials=max(result.samples, 1),
        worst_case=deviation,
        bound=bound,
        passed=bool(deviation <= bound),
        details={
            "estimate": result.estimate,
            "std_error": result.std_error,
            "target": result.target,
            "method": result.method,
            "ratio": result.ratio if result.target else None,
        },
    )


# Bernstein-type gradient bound

BERNSTEIN_RULE = (8, 8, 8)


def _disk_average(values: np.ndarray, weights: np.ndarray, radius: float) -> float:
    return float(np.sum(weights * values)) / radius**2


def weighted_polynomial_ratio(model: PotentialModel, p: complex, n: int, coefficients: Sequence[complex], r_n: Optional[float] = None) -> float:
    """
    |grad |f|(p)| r_n / (mean of |f| over D_{r_n}(p)) for f = P(z - a) e^{-nQ/2}.

    `coefficients` are the power-series coefficients of P about the symmetry center a.
    """
    r_n = r_n or micro_scale(model, p, n)
    poly = np.polynomial.Polynomial(np.asarray(coefficients, dtype=complex))
    points, weights = disk_rule(p, r_n, *BERNSTEIN_RULE)
    moduli = np.abs(poly(points - model.origin)) * np.exp(-0.5 * n * model.evaluate(points))
    w = p - model.origin
    slope = abs(poly.deriv()(w) - n * np.conj(model.dbar(p)) * poly(w)) * math.exp(-0.5 * n * model.evaluate(p))
    average = _disk_average(moduli, weights, r_n)
    return slope * r_n / average if average > 0 else 0.0


def lagrange_ratio(basis: LagrangeBasis, j: int, p: complex, r_n: float) -> float:
    """Bernstein ratio of f = l_j."""
    points, weights = disk_rule(p, r_n, *BERNSTEIN_RULE)
    moduli = np.exp(log_abs_ell(basis, j, points))
    average = _disk_average(moduli, weights, r_n)
    return grad_abs_ell(basis, j, p) * r_n / average if average > 0 else 0.0


def _random_weighted_polynomial(model: PotentialModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """Gaussian coefficients normalized like the monomial norms of the weighted space."""
    degree = int(rng.integers(0, n))
    m = np.arange(degree + 1)
    radius = model.droplet().outer_radius
    scale = np.exp(0.5 * ((m + 1) * math.log(n) - gammaln(m + 1)) - m * math.log(radius))
    return scale * (rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1))


def verify_bernstein(
    model: PotentialModel,
    p: complex,
    n: int,
    trials: int = 1000,
    seed: int = 0,
    K: Optional[float] = None,
    workers: Optional[int] = None,
) -> CheckReport:
    """
    Largest Bernstein ratio over random weighted polynomials of degree < n and
    Lagrange polynomials of random configurations, compared with K.
    """
    K = K if K is not None else bernstein_K(model, p, n)
    r_n = micro_scale(model, p, n)

    def trial(rng: np.random.Generator) -> float:
        if rng.random() < 0.5:
            return weighted_polynomial_ratio(model, p, n, _random_weighted_polynomial(model, n, rng), r_n)
        basis = LagrangeBasis(Configuration.equilibrium_seeded(model, n, rng), model)
        j = int(rng.integers(n))
        if log_abs_ell(basis, j, p) == -math.inf:
            return 0.0
        return lagrange_ratio(basis, j, p, r_n)

    ratios = _map_trials(trial, trials, seed, workers)
    worst = max(ratios, default=0.0)
    logger.info(f"[Lagrange] Bernstein ratio at {p!r}, n={n}: max {worst:.4f} against K={K:.4f}")
    return CheckReport(
        name="bernstein",
        trials=trials,
        worst_case=worst,
        bound=K,
        passed=bool(worst <= K),
        details={"margin": K - worst, "r_n": r_n},
    )


# Morrey inequality

MORREY_RULE = (8, 8, 8)
MORREY_BETAS = (1.5, 2.0, 4.0)


def morrey_ratio(
    field_fn: Callable[[np.ndarray], np.ndarray],
    gradient_fn: Callable[[np.ndarray], np.ndarray],
    z: complex,
    w: complex,
    beta: float,
    M: float = 3.0,
) -> float:
    """|f(z) - f(w)| / (||grad f||_{L^{2 beta}(D_M)} |z - w|^{1 - 1/beta}), the norm taken against dA."""
    points, weights = disk_rule(0j, M, *MORREY_RULE)
    norm = float(np.sum(weights * np.abs(gradient_fn(points)) ** (2.0 * beta))) ** (1.0 / (2.0 * beta))
    difference = abs(float(field_fn(np.asarray(z))) - float(field_fn(np.asarray(w))))
    if difference == 0.0:
        return 0.0
    return difference / (norm * abs(z - w) ** (1.0 - 1.0 / beta))


def _random_field(rng: np.random.Generator):
    """Linear part plus three low-frequency plane waves; returns (field, gradient encoded as fx + i fy)."""
    linear = complex(rng.standard_normal(), rng.standard_normal())
    waves = rng.uniform(-1.0, 1.0, size=3) + 1j * rng.uniform(-1.0, 1.0, size=3)
    amplitudes = 0.5 * rng.standard_normal(3)
    phases = rng.uniform(0.0, 2.0 * math.pi, size=3)

    def phase(z):
        z = np.asarray(z, dtype=complex)
        return (np.real(z)[..., None] * waves.real + np.imag(z)[..., None] * waves.imag) + phases

    def field_fn(z):
        z = np.asarray(z, dtype=complex)
        return linear.real * z.real + linear.imag * z.imag + np.sum(amplitudes * np.cos(phase(z)), axis=-1)

    def gradient_fn(z):
        return linear - np.sum(amplitudes * np.sin(phase(z)) * waves, axis=-1)

    return field_fn, gradient_fn


def verify_morrey(beta: float, trials: int = 1000, seed: int = 0, M: float = 3.0, workers: Optional[int] = None) -> CheckReport:
    """Largest Morrey ratio over random smooth fields on D_M with z, w in D_{M/sqrt 2}, against C."""
    constants = bound_constants(beta, K=1.0, T=1.0)
    inner = M / math.sqrt(2.0)

    def trial(rng: np.random.Generator) -> float:
        field_fn, gradient_fn = _random_field(rng)
        z, w = inner * np.sqrt(rng.random(2)) * np.exp(2j * math.pi * rng.random(2))
        return morrey_ratio(field_fn, gradient_fn, complex(z), complex(w), beta, M)

    ratios = _map_trials(trial, trials, seed, workers)
    worst = max(ratios, default=0.0)
    logger.info(f"[Lagrange] Morrey ratio at beta={beta}: max {worst:.4f} against C={constants.C:.4f}")
    return CheckReport(
        name=f"morrey(beta={beta:g})",
        trials=trials,
        worst_case=worst,
        bound=constants.C,
        passed=bool(worst <= constants.C),
        details={"C0": constants.C0},
    )


# Gradient moment


def verify_gradient_moment(
    model: PotentialModel,
    p: complex,
    n: int,
    beta: float,
    chain_config: Optional[ChainConfig] = None,
    sample_budget: int = 200,
    M: float = Config.NEIGHBOURHOOD_M,
    workers: Optional[int] = None,
) -> CheckReport:
    """
    Monte Carlo of E[chi_{D_{r_n}(p)}(z_1) int_{D_{M r_n}(p)} |grad |l_1||^{2 beta} dA] / r_n^2
    against T^{2 beta + 4} K^{2 beta} r_n^{-2 beta}. The estimator has unbounded variance in beta.
    """
    if beta < 0.5:
        raise DomainError(f"gradient moment bound requires beta >= 1/2, got {beta!r}")
    r_n = micro_scale(model, p, n)
    K = bernstein_K(model, p, n)
    T = t_constant(model, p, n, M)
    chain_config = chain_config or ChainConfig(beta=beta)
    samples = run_chain(model, n, chain_config, workers=workers).configurations[:sample_budget]
    points, weights = disk_rule(p, M * r_n, 8, 8, 8)
    values = []
    for config in samples:
        if abs(config.points[0] - p) <= r_n:
            basis = LagrangeBasis(config, model)
            values.append(float(np.sum(weights * grad_abs_ell(basis, 0, points) ** (2.0 * beta))))
        else:
            values.append(0.0)
    estimate = float(np.mean(values)) / r_n**2 if values else math.nan
    bound = T ** (2.0 * beta + 4.0) * K ** (2.0 * beta) * r_n ** (-2.0 * beta)
    logger.info(f"[Lagrange] Gradient moment n={n}, beta={beta}: {estimate:.4e} against {bound:.4e}")
    return CheckReport(
        name="gradient",
        trials=len(values),
        worst_case=estimate,
        bound=bound,
        passed=bool(estimate <= bound),
        details={"std_error": batch_means_stderr(values) / r_n**2, "K": K, "T": T, "r_n": r_n},
    )
