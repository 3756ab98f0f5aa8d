"""Executes one validated experiment config and writes its outputs."""
import json
import logging
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from pydantic import BaseModel

from config import Config
from exceptions import ConfigError, VerificationFailure
from models.chain_models import ChainConfig
from models.experiment_models import ExperimentConfig
from models.report_models import (
    BetaSweepReport,
    ExperimentOutput,
    FeketeReport,
    OutputHeader,
    SampleReport,
    VerificationReport,
)
from services.gibbs_service import SampleSet, energy_gradient, minimize_energy, run_chain, run_tempering, total_energy
from services.lagrange_service import (
    MORREY_BETAS,
    mass_report,
    verify_bernstein,
    verify_gradient_moment,
    verify_mass_identity,
    verify_microscopic_mass,
    verify_morrey,
    verify_replacement,
)
from services.microscale_service import bernstein_K, micro_scale, scale_info
from services.potential_service import PotentialModel
from services.spacing_service import (
    COROLLARY_C_LIMIT,
    beta_trend,
    rescale,
    run_spacing_experiment,
    spacing_report,
    spacing_s0,
    split_for_conditioning,
)
from utils.output_writer import OutputWriter
from utils.seeds import derive_seed

logger = logging.getLogger(__name__)

# Sampled mass identity runs at most this many particles; each sample needs a plane integral.
MICROSCOPIC_MASS_MAX_N = 8
FEKETE_LOWER_BOUND = 1.0 / math.sqrt(math.e)
LATTICE_CONSTANT = math.sqrt(2.0) * 3.0 ** -0.25


class ExperimentHandler:
    """Runs the experiment named by config.kind."""

    def __init__(self, config: ExperimentConfig, output_dir: Path):
        """
        Initialize the handler.

        Args:
            config: Validated experiment configuration (kind already resolved)
            output_dir: Directory receiving the result files
        """
        self.config = config
        self.writer = OutputWriter(output_dir)
        self.model = PotentialModel.from_spec(config.potential)
        self.center = config.center_complex
        self.workers = config.threads

    @classmethod
    def load_config(
        cls,
        path: Path,
        kind: str,
        seed: Optional[int] = None,
        threads: Optional[int] = None,
    ) -> ExperimentConfig:
        """
        Read and validate a JSON config; CLI overrides are applied before validation.

        Raises:
            ConfigError: If the file's kind disagrees with the subcommand
        """
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
        if not isinstance(data, dict):
            raise ConfigError("config file must contain a JSON object")
        if data.get("kind") not in (None, kind):
            raise ConfigError(f"config kind {data['kind']!r} does not match subcommand {kind!r}")
        data["kind"] = kind
        if seed is not None:
            data["seed"] = seed
        if threads is not None:
            data["threads"] = threads
        return ExperimentConfig.model_validate(data)

    def run(self) -> BaseModel:
        """Execute the experiment, write every output file and return the main result."""
        runners: Dict[str, Callable[[], BaseModel]] = {
            "scale-info": self._scale_info,
            "sample": self._sample,
            "fekete": self._fekete,
            "verify": self._verify,
            "spacing-experiment": self._spacing,
            "beta-sweep": self._beta_sweep,
        }
        logger.info(f"[Experiment] Running {self.config.kind} (n={self.config.n}, seed={self.config.seed})")
        result = runners[self.config.kind]()
        if isinstance(result, VerificationReport) and not result.passed:
            failed = [check.name for check in result.checks if not check.passed]
            raise VerificationFailure(f"checks failed: {', '.join(failed)}")
        return result

    # Output helpers

    def _envelope(self, result: Any) -> ExperimentOutput:
        return ExperimentOutput(
            header=OutputHeader(timestamp=datetime.now(timezone.utc).isoformat(), version=Config.VERSION),
            config=self.config.model_dump(mode="json"),
            result=result,
        )

    def _write_report(self, result: BaseModel):
        self.writer.write_json(self.config.outputs.report, self._envelope(result))

    def _write_diagnostics(self, sample_sets: List[SampleSet]):
        diagnostics = [
            {"beta": samples.beta, "chains": [chain.diagnostics().model_dump() for chain in samples.chains]}
            for samples in sample_sets
        ]
        self.writer.write_json(self.config.outputs.diagnostics, self._envelope(diagnostics))

    def _write_samples(self, samples: SampleSet):
        if not self.config.outputs.samples_csv:
            return
        rows = (
            (chain.chain_id, index, particle, float(point.real), float(point.imag))
            for chain in samples.chains
            for index, config in enumerate(chain.configurations)
            for particle, point in enumerate(config.points)
        )
        self.writer.write_csv(
            self.config.outputs.samples_csv, ("chain_id", "sample_index", "particle_index", "re", "im"), rows
        )

    def _chain_config(self, beta: float, seed: Optional[int] = None) -> ChainConfig:
        return self.config.chain.with_beta(beta, self.config.seed if seed is None else seed)

    # Experiments

    def _scale_info(self):
        info = scale_info(
            self.model,
            self.center,
            self.config.n,
            n0=self.config.n0,
            M=self.config.neighbourhood_m,
            C=self.config.cn_constant,
        )
        self._write_report(info)
        return info

    def _sample(self):
        beta = self.config.betas[0]
        samples = run_chain(
            self.model, self.config.n, self._chain_config(beta), workers=self.workers, jitter=self.config.seed_jitter
        )
        square_radii = [
            float(np.mean(np.abs(config.points - self.model.origin) ** 2)) for config in samples.configurations
        ]
        report = SampleReport(
            n=self.config.n,
            beta=beta,
            samples=len(square_radii),
            acceptance_rates=samples.acceptance_rates,
            mean_energy=float(np.mean(samples.mean_energy_trace)),
            mean_square_radius=float(np.mean(square_radii)),
            equilibrium_square_radius=self.model.equilibrium_moment(1, self.config.quadrature),
            warnings=samples.warnings,
        )
        self._write_report(report)
        self._write_diagnostics([samples])
        self._write_samples(samples)
        return report

    def _fekete(self):
        n = self.config.n
        config = minimize_energy(
            self.model, n, tol=self.config.fekete.tol, max_iters=self.config.fekete.max_iters, seed=self.config.seed
        )
        r_n = micro_scale(self.model, self.center, n)
        if n > 1:
            distances = np.abs(config.points[:, None] - config.points[None, :])[np.triu_indices(n, 1)]
            min_spacing = float(distances.min())
            rescaled_s0 = spacing_s0(rescale(config, self.center, r_n))
        else:
            min_spacing = math.inf
            rescaled_s0 = None
        report = FeketeReport(
            n=n,
            energy=total_energy(config, self.model),
            gradient_norm=float(np.max(np.abs(energy_gradient(config, self.model)))),
            r_n=r_n,
            min_spacing=min_spacing,
            rescaled_min_spacing=min_spacing / r_n,
            rescaled_s0=rescaled_s0,
            fekete_lower_bound=FEKETE_LOWER_BOUND,
            proof_constant_limit=COROLLARY_C_LIMIT,
            lattice_constant=LATTICE_CONSTANT,
            points=[(float(z.real), float(z.imag)) for z in config.points],
        )
        self._write_report(report)
        return report

    def _verify(self):
        cfg = self.config
        beta = cfg.betas[0]
        checks = []
        for name in cfg.checks:
            if name == "replacement":
                checks.append(verify_replacement(cfg.trials, cfg.seed, self.workers))
            elif name == "mass":
                for n in (1, 2):
                    estimate = verify_mass_identity(self.model, n, beta, cfg.mass_radius, self.center)
                    checks.append(mass_report(f"mass(n={n})", estimate))
                micro_n = min(cfg.n, MICROSCOPIC_MASS_MAX_N)
                if micro_n >= 3:
                    estimate = verify_microscopic_mass(
                        self.model, self.center, micro_n, beta, self._chain_config(beta), min(cfg.trials, 200), self.workers
                    )
                    checks.append(mass_report(f"mass(n={micro_n}, U=D_rn)", estimate))
            elif name == "bernstein":
                K = bernstein_K(self.model, self.center, cfg.n0 or cfg.n, cfg.cn_constant)
                checks.append(verify_bernstein(self.model, self.center, cfg.n, cfg.trials, cfg.seed, K, self.workers))
            elif name == "morrey":
                betas = sorted(set(MORREY_BETAS) | ({beta} if beta > 1 else set()))
                for morrey_beta in betas:
                    checks.append(verify_morrey(morrey_beta, cfg.trials, cfg.seed, workers=self.workers))
            elif name == "gradient":
                checks.append(
                    verify_gradient_moment(
                        self.model,
                        self.center,
                        cfg.n,
                        beta,
                        self._chain_config(beta),
                        min(cfg.trials, 200),
                        cfg.neighbourhood_m,
                        self.workers,
                    )
                )
        report = VerificationReport(checks=checks, passed=all(check.passed for check in checks))
        self._write_report(report)
        return report

    def _spacing(self):
        cfg = self.config
        beta = cfg.betas[0]
        chain_config = self._chain_config(beta)
        samples = run_chain(self.model, cfg.n, chain_config, workers=self.workers, jitter=cfg.seed_jitter)
        report = run_spacing_experiment(
            self.model,
            cfg.n,
            beta,
            self.center,
            chain_config,
            cfg.epsilon,
            cfg.c_override,
            cfg.reuse_chains,
            samples=samples,
        )
        self._write_report(report)
        self._write_diagnostics([samples])
        self._write_samples(samples)
        if cfg.outputs.s0_csv:
            self.writer.write_csv(cfg.outputs.s0_csv, ("s0",), ((s0,) for s0 in report.s0_samples))
        return report

    def _beta_sweep(self):
        cfg = self.config
        betas = cfg.betas
        swap_acceptance = None
        if cfg.chain.parallel_tempering and len(betas) > 1:
            tempered = run_tempering(
                self.model, cfg.n, betas, self._chain_config(betas[-1]), workers=self.workers, jitter=cfg.seed_jitter
            )
            sample_sets = list(tempered.sample_sets)
            swap_acceptance = list(tempered.swap_acceptance)
        else:
            sample_sets = [
                run_chain(
                    self.model,
                    cfg.n,
                    self._chain_config(beta, derive_seed(cfg.seed, index)),
                    workers=self.workers,
                    jitter=cfg.seed_jitter,
                )
                for index, beta in enumerate(betas)
            ]
        r_n = micro_scale(self.model, self.center, cfg.n)
        reports = []
        for beta, samples in zip(betas, sample_sets):
            eta_set, conditional_set, reused = split_for_conditioning(samples, cfg.reuse_chains)
            reports.append(
                spacing_report(
                    self.model, cfg.n, beta, self.center, eta_set, conditional_set, cfg.epsilon, cfg.c_override, r_n, reused
                )
            )

        trend = None
        monotone = None
        if len(reports) > 1:
            trend, monotone = beta_trend(reports, cfg.bootstrap_resamples, cfg.seed)
            self.writer.write_csv(
                cfg.outputs.trend_csv,
                ("beta", "median_s0", "lower", "upper", "samples"),
                (
                    (entry.beta, *("" if value is None else value for value in (entry.median_s0, entry.lower, entry.upper)), entry.samples)
                    for entry in trend
                ),
            )
        report = BetaSweepReport(reports=reports, trend=trend, monotone=monotone, swap_acceptance=swap_acceptance)
        self._write_report(report)
        self._write_diagnostics(sample_sets)
        return report
