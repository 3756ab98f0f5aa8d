"""Rescaled spacing statistics near an observation point and the empirical separation harness."""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist
from scipy.stats import bootstrap

from exceptions import DomainError, SampleValidationError
from models.chain_models import ChainConfig
from models.report_models import BetaTrendEntry, SpacingReport, TheoremParams
from services.gibbs_service import Configuration, SampleSet, run_chain
from services.lagrange_service import bound_constants
from services.microscale_service import bernstein_K, micro_scale, t_constant
from services.potential_service import PotentialModel

logger = logging.getLogger(__name__)

COROLLARY_C_LIMIT = 1.0 / (8.0 * math.sqrt(math.e))


@dataclass(frozen=True)
class RescaledSample:
    """Points z_j = (zeta_j - center) / r_n in microscopic units."""

    z_points: np.ndarray
    r_n: float
    center: complex

    def restore(self) -> np.ndarray:
        """Inverse map back to the source configuration."""
        return self.z_points * self.r_n + self.center


def rescale(config: Configuration, center: complex, r_n: float) -> RescaledSample:
    if r_n <= 0:
        raise DomainError(f"r_n must be positive, got {r_n!r}")
    points = config.points if isinstance(config, Configuration) else np.asarray(config, dtype=complex)
    z = (points - center) / r_n
    z.setflags(write=False)
    return RescaledSample(z_points=z, r_n=float(r_n), center=complex(center))


def _in_unit_disk(sample: RescaledSample) -> np.ndarray:
    return np.abs(sample.z_points) <= 1.0


def spacing_s0(sample: RescaledSample) -> Optional[float]:
    """
    Smallest nearest-neighbour distance among particles in the closed unit disk.

    Neighbours may lie outside the disk. Returns None when the disk is empty.

    Raises:
        SampleValidationError: If two particles coincide
    """
    z = sample.z_points
    if z.size < 2:
        raise DomainError("spacing needs at least two particles")
    inside = _in_unit_disk(sample)
    if not inside.any():
        return None
    coords = np.column_stack([z.real, z.imag])
    distances, _ = cKDTree(coords).query(coords[inside], k=2)
    nearest = distances[:, 1]
    if np.any(nearest == 0.0):
        raise SampleValidationError("sample contains coincident particles")
    return float(nearest.min())


def count_nD(sample: RescaledSample) -> int:
    """Number of particles in the closed unit disk."""
    return int(np.count_nonzero(_in_unit_disk(sample)))


def theorem_bound(n: int, beta: float, epsilon: float, eta: float, c: float) -> TheoremParams:
    """
    threshold = c n^{-1/(beta-1)} (eps eta)^{1/(2(beta-1))},
    m0 = 16 n^{2/(beta-1)} c^{-2} (eps eta)^{-1/(beta-1)} and bound = max(0, 1 - m0 eps).
    """
    if beta <= 1:
        raise DomainError(f"separation bound requires beta > 1, got {beta!r}")
    if not 0 < epsilon < 1:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if not 0 < eta <= 1:
        raise DomainError(f"eta must lie in (0, 1], got {eta!r}")
    if c <= 0:
        raise DomainError(f"c must be positive, got {c!r}")
    gap = beta - 1.0
    log_product = math.log(epsilon * eta)
    threshold = c * math.exp(-math.log(n) / gap + log_product / (2.0 * gap))
    m0 = 16.0 * math.exp(2.0 * math.log(n) / gap - 2.0 * math.log(c) - log_product / gap)
    return TheoremParams(
        beta=beta,
        n=n,
        epsilon=epsilon,
        c=c,
        eta=eta,
        threshold=threshold,
        m0=m0,
        bound=max(0.0, 1.0 - m0 * epsilon),
    )


def corollary_threshold(mu: float, theta: float, c: float) -> float:
    """c e^{-(1 + theta)/mu}; mu = inf gives c."""
    if not 0 < c < COROLLARY_C_LIMIT:
        raise DomainError(f"c must satisfy 0 < c < 1/(8 sqrt(e)) = {COROLLARY_C_LIMIT:.7f}, got {c!r}")
    if mu <= 0 or theta < 0:
        raise DomainError(f"need mu > 0 and theta >= 0, got mu={mu!r}, theta={theta!r}")
    return c * math.exp(-(1.0 + theta) / mu)


def corollary_m0_ceiling(mu: float, theta: float) -> float:
    """Asymptotic ceiling 2^10 e^{1 + 2/mu + 2 theta/mu} on m0 under eta_n >= const n^{-2 theta}."""
    if mu <= 0 or theta < 0:
        raise DomainError(f"need mu > 0 and theta >= 0, got mu={mu!r}, theta={theta!r}")
    return 2.0**10 * math.exp(1.0 + 2.0 / mu + 2.0 * theta / mu)


@dataclass(frozen=True)
class PackingCertificate:
    """Result of the area-comparison check N_D <= 4 / r0^2."""

    r0: float
    n_disk: int
    capacity: float
    premise_holds: bool
    passed: bool
    disks: List[Tuple[float, float]] = field(default_factory=list)


def packing_check(sample: RescaledSample, r0: float) -> PackingCertificate:
    """
    When all unit-disk particles are at least 2 r0 apart, the disks D_{r0}(z_j)
    are disjoint and lie in D_2, so their number is at most 4 / r0^2.
    A failed premise is a vacuous pass.
    """
    if not 0 < r0 <= 1:
        raise DomainError(f"r0 must lie in (0, 1], got {r0!r}")
    inside = sample.z_points[_in_unit_disk(sample)]
    capacity = 4.0 / r0**2
    if inside.size > 1:
        separations = pdist(np.column_stack([inside.real, inside.imag]))
        premise = bool(np.all(separations >= 2.0 * r0 * (1.0 - 1e-12)))
    else:
        premise = True
    if not premise:
        return PackingCertificate(r0, int(inside.size), capacity, False, True)
    return PackingCertificate(
        r0=r0,
        n_disk=int(inside.size),
        capacity=capacity,
        premise_holds=True,
        passed=inside.size <= capacity,
        disks=[(float(z.real), float(z.imag)) for z in inside],
    )


def _eta_estimate(configs: Sequence[Configuration], center: complex, r_n: float) -> Tuple[float, float, Tuple[float, float]]:
    hits = sum(count_nD(rescale(config, center, r_n)) >= 1 for config in configs)
    total = len(configs)
    eta = hits / total if total else 0.0
    std_error = math.sqrt(eta * (1.0 - eta) / total) if total else math.inf
    interval = (max(0.0, eta - 1.96 * std_error), min(1.0, eta + 1.96 * std_error))
    return eta, std_error, interval


def spacing_report(
    model: PotentialModel,
    n: int,
    beta: float,
    center: complex,
    eta_set: SampleSet,
    conditional_set: SampleSet,
    epsilon: float,
    c_override: Optional[float] = None,
    r_n: Optional[float] = None,
    reused: bool = False,
) -> SpacingReport:
    """Reduce sample sets into a SpacingReport, in fixed chain and sample order."""
    r_n = r_n or micro_scale(model, center, n)
    eta_hat, eta_error, eta_interval = _eta_estimate(eta_set.configurations, center, r_n)

    s0_samples: List[float] = []
    nD_samples: List[int] = []
    packing_failures = 0
    for config in conditional_set.configurations:
        sample = rescale(config, center, r_n)
        nD_samples.append(count_nD(sample))
        s0 = spacing_s0(sample)
        if s0 is None:
            continue
        s0_samples.append(s0)
        if not packing_check(sample, min(0.5 * s0, 1.0)).passed:
            packing_failures += 1
    if packing_failures:
        logger.warning(f"[Spacing] Packing bound failed on {packing_failures} samples")

    params = None
    empirical = None
    holds = None
    if beta > 1 and eta_hat > 0 and s0_samples:
        if c_override is not None:
            c = c_override
        else:
            K = bernstein_K(model, center, n)
            T = t_constant(model, center, n)
            c = bound_constants(beta, K, T).c
        params = theorem_bound(n, beta, epsilon, eta_hat, c)
        empirical = float(np.mean(np.asarray(s0_samples) >= params.threshold))
        holds = empirical >= params.bound
    elif beta <= 1:
        logger.info(f"[Spacing] beta={beta} <= 1: no separation bound to compare against")
    else:
        logger.warning(f"[Spacing] No sample has a particle in the unit disk at beta={beta}")

    logger.info(
        f"[Spacing] beta={beta}, n={n}: eta_hat={eta_hat:.4f} +/- {eta_error:.4f}, "
        f"{len(s0_samples)} conditional samples"
    )
    return SpacingReport(
        beta=beta,
        n=n,
        center=(center.real, center.imag),
        r_n=r_n,
        eta_hat=eta_hat,
        eta_std_error=eta_error,
        eta_interval=eta_interval,
        eta_samples=len(eta_set.configurations),
        conditional_samples=len(conditional_set.configurations),
        reused_chains=reused,
        s0_samples=s0_samples,
        nD_samples=nD_samples,
        params=params,
        empirical_conditional=empirical,
        bound_holds=holds,
        packing_failures=packing_failures,
        acceptance_rates=eta_set.acceptance_rates if reused else eta_set.acceptance_rates + conditional_set.acceptance_rates,
    )


def split_for_conditioning(samples: SampleSet, reuse_chains: bool) -> Tuple[SampleSet, SampleSet, bool]:
    """Independent chain groups for eta and for the conditional statistics, unless reuse is requested."""
    if reuse_chains:
        return samples, samples, True
    if len(samples.chains) < 2:
        logger.warning("[Spacing] A single chain cannot be split; eta and s0 share samples")
        return samples, samples, True
    half = len(samples.chains) // 2
    eta_set, conditional_set = samples.split(half)
    return eta_set, conditional_set, False


def run_spacing_experiment(
    model: PotentialModel,
    n: int,
    beta: float,
    center: complex,
    chain_config: ChainConfig,
    epsilon: float,
    c_override: Optional[float] = None,
    reuse_chains: bool = False,
    workers: Optional[int] = None,
    jitter: float = 0.1,
    samples: Optional[SampleSet] = None,
) -> SpacingReport:
    """
    Sample at beta, rescale about center by r_n and compare the conditional
    spacing frequency with the separation bound.
    """
    if chain_config.beta != beta:
        raise DomainError(f"chain beta {chain_config.beta!r} differs from experiment beta {beta!r}")
    r_n = micro_scale(model, center, n)
    samples = samples or run_chain(model, n, chain_config, workers=workers, jitter=jitter)
    eta_set, conditional_set, reused = split_for_conditioning(samples, reuse_chains)
    return spacing_report(model, n, beta, center, eta_set, conditional_set, epsilon, c_override, r_n, reused)


def beta_trend(
    reports: Sequence[SpacingReport], resamples: int = 2000, seed: int = 0
) -> Tuple[List[BetaTrendEntry], bool]:
    """
    Median s0 per beta with 95% percentile-bootstrap bands.

    The trend is monotone when every band's upper end reaches the previous band's lower end.
    """
    rng = np.random.default_rng(seed)
    entries = []
    for report in reports:
        values = np.asarray(report.s0_samples)
        if values.size < 2:
            entries.append(BetaTrendEntry(beta=report.beta, median_s0=None, lower=None, upper=None, samples=int(values.size)))
            continue
        interval = bootstrap(
            (values,), np.median, n_resamples=resamples, confidence_level=0.95, method="percentile", random_state=rng
        ).confidence_interval
        entries.append(
            BetaTrendEntry(
                beta=report.beta,
                median_s0=float(np.median(values)),
                lower=float(interval.low),
                upper=float(interval.high),
                samples=int(values.size),
            )
        )
    banded = [entry for entry in entries if entry.median_s0 is not None]
    monotone = all(later.upper >= earlier.lower for earlier, later in zip(banded, banded[1:]))
    logger.info(f"[Spacing] Median s0 trend over {len(entries)} betas: monotone={monotone}")
    return entries, monotone
