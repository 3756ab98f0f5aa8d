"""The energy Ham_n, Metropolis sampling of the Gibbs measure and the Fekete minimizer."""
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from exceptions import StalledDescentError
from models.chain_models import ChainConfig, ChainDiagnostics
from services.energy_kernels import as_points, metropolis_block, move_delta_kernel
from services.microscale_service import micro_scale
from services.potential_service import PotentialModel
from utils.seeds import derive_seed

logger = logging.getLogger(__name__)

EQUILIBRIUM_SEEDED = "equilibrium-seeded"
LOW_ACCEPTANCE = 0.01


@dataclass(frozen=True)
class Configuration:
    """n distinct points in the plane."""

    points: np.ndarray

    def __post_init__(self):
        points = np.array(self.points, dtype=np.complex128).ravel()
        if points.size == 0:
            raise ValueError("a configuration needs at least one point")
        if np.unique(points).size != points.size:
            raise ValueError("configuration contains coincident points")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @property
    def n(self) -> int:
        return int(self.points.size)

    @classmethod
    def equilibrium_seeded(
        cls, model: PotentialModel, n: int, rng: np.random.Generator, jitter: float = 0.0
    ) -> "Configuration":
        """Points drawn i.i.d. from the equilibrium measure, then jittered by a Gaussian of scale `jitter`."""
        points = model.sample_equilibrium(n, rng)
        if jitter > 0:
            points = points + jitter * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
        return cls(points)

    def with_point(self, j: int, z: complex) -> "Configuration":
        points = self.points.copy()
        points[j] = z
        return Configuration(points)


PointsLike = Union[Configuration, np.ndarray, Sequence[complex]]


def _points(config: PointsLike) -> np.ndarray:
    if isinstance(config, Configuration):
        return config.points
    return np.asarray(config, dtype=np.complex128).ravel()


def total_energy(config: PointsLike, model: PotentialModel) -> float:
    """
    Ham_n = sum_{j != k} log 1/|z_j - z_k| + n sum_j Q(z_j).

    The pair sum runs over ordered pairs. Coincident points give +inf.
    """
    z = _points(config)
    n = z.size
    pair = 0.0
    if n > 1:
        upper = np.triu_indices(n, 1)
        distances = np.abs(z[:, None] - z[None, :])[upper]
        if np.any(distances == 0.0):
            return math.inf
        pair = -2.0 * float(np.sum(np.log(distances)))
    return pair + n * float(np.sum(model.evaluate(z)))


def move_delta(config: PointsLike, j: int, new_point: complex, model: PotentialModel) -> float:
    """H(after) - H(before) for moving particle j, touching only the pairs that involve j."""
    z = np.ascontiguousarray(_points(config), dtype=np.complex128)
    if not 0 <= j < z.size:
        raise IndexError(f"particle index {j} out of range for n={z.size}")
    return float(move_delta_kernel(z, j, complex(new_point), model.coefficient_array, model.origin))


def energy_gradient(config: PointsLike, model: PotentialModel) -> np.ndarray:
    """Gradient of Ham_n in each particle's real coordinates, encoded dH/dx + i dH/dy."""
    z = _points(config)
    n = z.size
    differences = z[:, None] - z[None, :]
    np.fill_diagonal(differences, 1.0)
    inverse = 1.0 / np.conj(differences)
    np.fill_diagonal(inverse, 0.0)
    return -2.0 * inverse.sum(axis=1) + n * model.gradient(z)


def batch_means_stderr(values: Sequence[float], batches: int = 20) -> float:
    """Standard error of the mean from non-overlapping batch means."""
    values = np.asarray(values, dtype=float)
    batches = min(batches, values.size)
    if batches < 2:
        return math.inf
    usable = values[: values.size - values.size % batches].reshape(batches, -1)
    means = usable.mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(batches))


@dataclass
class ChainResult:
    """Retained samples and diagnostics of one chain."""

    chain_id: int
    seed: int
    beta: float
    configurations: List[Configuration]
    energy_trace: np.ndarray
    acceptance_rate: float
    proposal_scale_final: float
    warnings: List[str] = field(default_factory=list)

    def diagnostics(self) -> ChainDiagnostics:
        return ChainDiagnostics(
            chain_id=self.chain_id,
            acceptance_rate=self.acceptance_rate,
            mean_energy=float(np.mean(self.energy_trace)) if self.energy_trace.size else math.nan,
            proposal_scale_final=self.proposal_scale_final,
            seed=self.seed,
            warnings=list(self.warnings),
        )


@dataclass(frozen=True)
class SampleSet:
    """Thinned post-burn-in samples of one or more chains, ordered by chain id."""

    n: int
    beta: float
    chains: Tuple[ChainResult, ...]

    def __post_init__(self):
        ordered = tuple(sorted(self.chains, key=lambda chain: chain.chain_id))
        ids = [chain.chain_id for chain in ordered]
        if len(set(ids)) != len(ids):
            raise ValueError("chain ids must be unique within a sample set")
        for chain in ordered:
            if any(config.n != self.n for config in chain.configurations):
                raise ValueError("all configurations of a sample set must have the same n")
        object.__setattr__(self, "chains", ordered)

    @property
    def configurations(self) -> List[Configuration]:
        return [config for chain in self.chains for config in chain.configurations]

    @property
    def acceptance_rates(self) -> List[float]:
        return [chain.acceptance_rate for chain in self.chains]

    @property
    def seeds(self) -> List[int]:
        return [chain.seed for chain in self.chains]

    @property
    def warnings(self) -> List[str]:
        return [warning for chain in self.chains for warning in chain.warnings]

    @property
    def mean_energy_trace(self) -> np.ndarray:
        """Energy per retained index, averaged over chains."""
        length = min((chain.energy_trace.size for chain in self.chains), default=0)
        if length == 0:
            return np.zeros(0)
        return np.mean([chain.energy_trace[:length] for chain in self.chains], axis=0)

    def merge(self, other: "SampleSet") -> "SampleSet":
        if other.n != self.n or other.beta != self.beta:
            raise ValueError("only sample sets with equal n and beta can be merged")
        return SampleSet(self.n, self.beta, self.chains + other.chains)

    def split(self, first_chains: int) -> Tuple["SampleSet", "SampleSet"]:
        """Two sample sets made of the first `first_chains` chains and the rest."""
        return (
            SampleSet(self.n, self.beta, self.chains[:first_chains]),
            SampleSet(self.n, self.beta, self.chains[first_chains:]),
        )


class _ChainState:
    """Mutable state of one replica: points, running energy and proposal scale."""

    def __init__(self, model: PotentialModel, points: np.ndarray, scale: float, r_n: float, radius: float):
        self.model = model
        self.points = points
        self.energy = total_energy(points, model)
        self.log_scale = math.log(scale)
        self.log_scale_bounds = (math.log(1e-8 * r_n), math.log(1e3 * max(radius, r_n)))
        self.accepted = 0
        self.proposed = 0

    @property
    def scale(self) -> float:
        return math.exp(self.log_scale)

    def sweep(self, rng: np.random.Generator, beta: float, moves: int) -> int:
        n = self.points.size
        indices = rng.integers(0, n, size=moves)
        steps = rng.standard_normal(moves) + 1j * rng.standard_normal(moves)
        uniforms = rng.random(moves)
        accepted, change = metropolis_block(
            self.points,
            self.model.coefficient_array,
            self.model.origin,
            beta,
            self.scale,
            indices,
            steps,
            uniforms,
        )
        self.energy += change
        return int(accepted)

    def adapt(self, accepted: int, moves: int, sweep: int, target: float):
        gain = 1.0 / (sweep + 1) ** 0.6
        self.log_scale += gain * (accepted / moves - target)
        self.log_scale = min(max(self.log_scale, self.log_scale_bounds[0]), self.log_scale_bounds[1])

    def snapshot(self) -> Tuple[Configuration, float]:
        config = Configuration(self.points.copy())
        self.energy = total_energy(config, self.model)
        return config, self.energy


def _initial_points(
    model: PotentialModel, n: int, initial, rng: np.random.Generator, r_n: float, jitter: float
) -> np.ndarray:
    if isinstance(initial, Configuration):
        if initial.n != n:
            raise ValueError(f"initial configuration has {initial.n} points, expected {n}")
        return as_points(initial.points)
    if initial != EQUILIBRIUM_SEEDED:
        raise ValueError(f"unknown initialization {initial!r}")
    return as_points(Configuration.equilibrium_seeded(model, n, rng, jitter * r_n).points)


def _acceptance_warnings(rate: float, chain_id: int, beta: float) -> List[str]:
    if rate < LOW_ACCEPTANCE:
        message = f"chain {chain_id} at beta={beta}: acceptance {rate:.4f} below {LOW_ACCEPTANCE} after adaptation"
        logger.warning(f"[Gibbs] {message}")
        return [message]
    return []


def _run_single_chain(
    model: PotentialModel, n: int, cfg: ChainConfig, chain_id: int, initial, jitter: float
) -> ChainResult:
    seed = derive_seed(cfg.seed, chain_id)
    rng = np.random.default_rng(seed)
    r_n = micro_scale(model, model.origin, n)
    radius = model.droplet().outer_radius
    state = _ChainState(model, _initial_points(model, n, initial, rng, r_n, jitter), cfg.proposal_scale or r_n, r_n, radius)

    for sweep in range(cfg.burn_in):
        accepted = state.sweep(rng, cfg.beta, n)
        if cfg.adapt:
            state.adapt(accepted, n, sweep, cfg.target_acceptance)

    configurations: List[Configuration] = []
    energies: List[float] = []
    retained = (cfg.steps - cfg.burn_in) // cfg.thinning
    for _ in range(retained):
        moves = n * cfg.thinning
        state.accepted += state.sweep(rng, cfg.beta, moves)
        state.proposed += moves
        config, energy = state.snapshot()
        configurations.append(config)
        energies.append(energy)
    leftover = (cfg.steps - cfg.burn_in) % cfg.thinning
    if leftover:
        state.accepted += state.sweep(rng, cfg.beta, n * leftover)
        state.proposed += n * leftover

    rate = state.accepted / state.proposed if state.proposed else 0.0
    logger.info(
        f"[Gibbs] Chain {chain_id} (beta={cfg.beta}, n={n}): {len(configurations)} samples, "
        f"acceptance {rate:.3f}, scale {state.scale:.3e}"
    )
    return ChainResult(
        chain_id=chain_id,
        seed=seed,
        beta=cfg.beta,
        configurations=configurations,
        energy_trace=np.asarray(energies),
        acceptance_rate=rate,
        proposal_scale_final=state.scale,
        warnings=_acceptance_warnings(rate, chain_id, cfg.beta),
    )


def _worker_count(chains: int, workers: Optional[int]) -> int:
    return max(1, min(chains, workers or os.cpu_count() or 1))


def run_chain(
    model: PotentialModel,
    n: int,
    chain_config: ChainConfig,
    initial: Union[Configuration, str] = EQUILIBRIUM_SEEDED,
    workers: Optional[int] = None,
    jitter: float = 0.1,
    first_chain_id: int = 0,
) -> SampleSet:
    """
    Metropolis sampling of dP proportional to exp(-beta Ham_n) dA^n.

    Each chain proposes single-particle isotropic Gaussian moves. During burn-in
    the proposal scale follows a Robbins-Monro update toward the target
    acceptance, then stays frozen. Chain i is seeded with derive_seed(seed, i)
    and chains run concurrently; the result is ordered by chain id.
    """
    chain_ids = range(first_chain_id, first_chain_id + chain_config.chains)
    with ThreadPoolExecutor(max_workers=_worker_count(chain_config.chains, workers)) as pool:
        results = list(
            pool.map(lambda cid: _run_single_chain(model, n, chain_config, cid, initial, jitter), chain_ids)
        )
    return SampleSet(n=n, beta=chain_config.beta, chains=tuple(results))


@dataclass(frozen=True)
class TemperingResult:
    """One sample set per beta of the ladder plus swap statistics between neighbours."""

    betas: Tuple[float, ...]
    sample_sets: Tuple[SampleSet, ...]
    swap_acceptance: Tuple[float, ...]


def _run_tempered_chain(
    model: PotentialModel, n: int, cfg: ChainConfig, betas: Sequence[float], chain_id: int, jitter: float
) -> Tuple[List[ChainResult], np.ndarray, np.ndarray]:
    seed = derive_seed(cfg.seed, chain_id)
    rng = np.random.default_rng(seed)
    r_n = micro_scale(model, model.origin, n)
    radius = model.droplet().outer_radius
    states = [
        _ChainState(model, _initial_points(model, n, EQUILIBRIUM_SEEDED, rng, r_n, jitter), cfg.proposal_scale or r_n, r_n, radius)
        for _ in betas
    ]
    swaps_accepted = np.zeros(len(betas) - 1)
    swaps_attempted = np.zeros(len(betas) - 1)
    samples: List[List[Configuration]] = [[] for _ in betas]
    energies: List[List[float]] = [[] for _ in betas]

    for sweep in range(cfg.steps):
        burning = sweep < cfg.burn_in
        for slot, state in enumerate(states):
            accepted = state.sweep(rng, betas[slot], n)
            if burning and cfg.adapt:
                state.adapt(accepted, n, sweep, cfg.target_acceptance)
            elif not burning:
                state.accepted += accepted
                state.proposed += n
        for i in range(sweep % 2, len(betas) - 1, 2):
            swaps_attempted[i] += 1
            log_ratio = (betas[i] - betas[i + 1]) * (states[i].energy - states[i + 1].energy)
            if log_ratio >= 0 or math.log(rng.random()) < log_ratio:
                # Exchange configurations; each slot keeps its own proposal scale.
                states[i].points, states[i + 1].points = states[i + 1].points, states[i].points
                states[i].energy, states[i + 1].energy = states[i + 1].energy, states[i].energy
                swaps_accepted[i] += 1
        if not burning and (sweep - cfg.burn_in + 1) % cfg.thinning == 0:
            for slot, state in enumerate(states):
                config, energy = state.snapshot()
                samples[slot].append(config)
                energies[slot].append(energy)

    results = []
    for slot, state in enumerate(states):
        rate = state.accepted / state.proposed if state.proposed else 0.0
        results.append(
            ChainResult(
                chain_id=chain_id,
                seed=seed,
                beta=betas[slot],
                configurations=samples[slot],
                energy_trace=np.asarray(energies[slot]),
                acceptance_rate=rate,
                proposal_scale_final=state.scale,
                warnings=_acceptance_warnings(rate, chain_id, betas[slot]),
            )
        )
    return results, swaps_accepted, swaps_attempted


def run_tempering(
    model: PotentialModel,
    n: int,
    betas: Sequence[float],
    chain_config: ChainConfig,
    workers: Optional[int] = None,
    jitter: float = 0.1,
) -> TemperingResult:
    """
    Parallel tempering across a beta ladder.

    After every sweep, neighbouring replicas (i, i+1) with alternating parity
    exchange configurations with probability min(1, exp((b_i - b_j)(H_i - H_j))).
    """
    betas = tuple(float(b) for b in betas)
    if list(betas) != sorted(set(betas)):
        raise ValueError("tempering ladder must be strictly increasing")
    with ThreadPoolExecutor(max_workers=_worker_count(chain_config.chains, workers)) as pool:
        outcomes = list(
            pool.map(
                lambda cid: _run_tempered_chain(model, n, chain_config, betas, cid, jitter),
                range(chain_config.chains),
            )
        )
    sample_sets = tuple(
        SampleSet(n=n, beta=beta, chains=tuple(outcome[0][slot] for outcome in outcomes))
        for slot, beta in enumerate(betas)
    )
    accepted = sum(outcome[1] for outcome in outcomes)
    attempted = sum(outcome[2] for outcome in outcomes)
    swap_rates = tuple(float(a / t) if t else 0.0 for a, t in zip(np.atleast_1d(accepted), np.atleast_1d(attempted)))
    logger.info(f"[Gibbs] Tempering over {len(betas)} betas: swap acceptance {swap_rates}")
    return TemperingResult(betas=betas, sample_sets=sample_sets, swap_acceptance=swap_rates)


def minimize_energy(
    model: PotentialModel,
    n: int,
    initial: Optional[Configuration] = None,
    tol: float = 1e-8,
    max_iters: int = 20000,
    seed: int = 0,
) -> Configuration:
    """
    Weighted Fekete configuration by gradient descent with backtracking.

    Stops when the sup-norm of the gradient drops below tol or after max_iters
    iterations, returning the best iterate found.

    Raises:
        StalledDescentError: If the line search fails while the gradient is not small
    """
    if initial is None:
        rng = np.random.default_rng(derive_seed(seed, 0))
        initial = Configuration.equilibrium_seeded(model, n, rng)
    if initial.n != n:
        raise ValueError(f"initial configuration has {initial.n} points, expected {n}")

    z = initial.points.copy()
    energy = total_energy(z, model)
    gradient = energy_gradient(z, model)
    step = 1.0 / (2.0 * n)
    for iteration in range(max_iters):
        sup_norm = float(np.max(np.abs(gradient)))
        if sup_norm < tol:
            logger.info(f"[Fekete] n={n} converged after {iteration} iterations, energy={energy!r}")
            return Configuration(z)
        squared = float(np.sum(np.abs(gradient) ** 2))
        while True:
            trial = z - step * gradient
            trial_energy = total_energy(trial, model)
            if trial_energy <= energy - 1e-4 * step * squared:
                trial_gradient = energy_gradient(trial, model)
                break
            if trial_energy <= energy + 1e-12 * max(1.0, abs(energy)):
                # Energy differences are at rounding level; fall back to gradient decrease.
                trial_gradient = energy_gradient(trial, model)
                if float(np.sum(np.abs(trial_gradient) ** 2)) < squared:
                    break
            step *= 0.5
            if step < 1e-30:
                if sup_norm <= 1e3 * tol:
                    logger.warning(f"[Fekete] Line search exhausted at gradient {sup_norm:.3e}; returning iterate")
                    return Configuration(z)
                raise StalledDescentError(Configuration(z), sup_norm)
        z, energy, gradient = trial, trial_energy, trial_gradient
        step *= 1.5
    logger.warning(f"[Fekete] n={n} hit max_iters={max_iters} with gradient {float(np.max(np.abs(gradient))):.3e}")
    return Configuration(z)
