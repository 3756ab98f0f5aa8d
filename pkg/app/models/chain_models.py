"""Models for Metropolis chain settings and diagnostics."""
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveFloat, PositiveInt, model_validator

from config import Config

SEED_MAX = 2**64 - 1


class ChainSettings(BaseModel):
    """Chain parameters shared by every beta of an experiment."""

    steps: PositiveInt = Field(default=2000, description="Total sweeps per chain (one sweep = n proposals)")
    burn_in: NonNegativeInt = Field(default=500, description="Sweeps discarded before retaining samples")
    thinning: PositiveInt = Field(default=10, description="Keep every thinning-th post-burn-in sweep")
    proposal_scale: Optional[PositiveFloat] = Field(
        default=None, description="Initial Gaussian proposal scale; defaults to r_n at the droplet center"
    )
    target_acceptance: float = Field(default=Config.TARGET_ACCEPTANCE, gt=0.0, lt=1.0)
    adapt: bool = Field(default=True, description="Adapt the proposal scale during burn-in")
    chains: PositiveInt = Field(default=4, description="Independent chains")
    parallel_tempering: bool = Field(default=False, description="Run a beta ladder as one tempered ensemble")

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def _check_schedule(self):
        if self.burn_in >= self.steps:
            raise ValueError("burn_in must be smaller than steps")
        if self.thinning > self.steps - self.burn_in:
            raise ValueError("thinning must not exceed steps - burn_in")
        return self

    def with_beta(self, beta: float, seed: int) -> "ChainConfig":
        return ChainConfig(beta=beta, seed=seed, **self.model_dump())


class ChainConfig(ChainSettings):
    """Full chain configuration for one inverse temperature."""

    beta: PositiveFloat
    seed: int = Field(default=0, ge=0, le=SEED_MAX)


class ChainDiagnostics(BaseModel):
    """Per-chain diagnostics written next to the samples."""

    chain_id: int
    acceptance_rate: float = Field(..., ge=0.0, le=1.0)
    mean_energy: float
    proposal_scale_final: float
    seed: int
    warnings: List[str] = Field(default_factory=list)
