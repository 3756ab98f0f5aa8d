"""Schema for experiment config files."""
from typing import List, Literal, Optional, Tuple, Union

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeFloat,
    PositiveFloat,
    PositiveInt,
    field_validator,
    model_validator,
)

from config import Config
from models.chain_models import SEED_MAX, ChainSettings
from models.potential_models import PotentialSpec
from models.quadrature_models import QuadratureSpec

ExperimentKind = Literal["scale-info", "sample", "fekete", "verify", "spacing-experiment", "beta-sweep"]
CheckName = Literal["replacement", "mass", "bernstein", "morrey", "gradient"]

DEFAULT_CHECKS: List[str] = ["replacement", "mass", "bernstein", "morrey"]


class FeketeSettings(BaseModel):
    """Descent settings for the beta = infinity proxy."""

    tol: PositiveFloat = 1e-6
    max_iters: PositiveInt = 20000

    model_config = ConfigDict(extra="forbid")


class OutputPaths(BaseModel):
    """File names relative to the output directory."""

    report: str = "report.json"
    diagnostics: str = "diagnostics.json"
    samples_csv: Optional[str] = None
    s0_csv: Optional[str] = None
    trend_csv: str = "beta_trend.csv"

    model_config = ConfigDict(extra="forbid")


class ExperimentConfig(BaseModel):
    """A complete, validated experiment description."""

    kind: Optional[ExperimentKind] = None
    potential: PotentialSpec = Field(default_factory=PotentialSpec)
    n: PositiveInt = 64
    beta: Union[PositiveFloat, List[PositiveFloat]] = 2.0
    center: Tuple[float, float] = (0.0, 0.0)
    chain: ChainSettings = Field(default_factory=ChainSettings)
    epsilon: float = Field(default=0.1, gt=0.0, lt=1.0)
    c_override: Optional[PositiveFloat] = None
    reuse_chains: bool = False
    checks: List[CheckName] = Field(default_factory=lambda: list(DEFAULT_CHECKS))
    trials: PositiveInt = 1000
    mass_radius: PositiveFloat = 0.5
    quadrature: QuadratureSpec = Field(default_factory=QuadratureSpec)
    fekete: FeketeSettings = Field(default_factory=FeketeSettings)
    cn_constant: float = Config.CN_CONSTANT
    neighbourhood_m: PositiveFloat = Config.NEIGHBOURHOOD_M
    n0: Optional[PositiveInt] = None
    bootstrap_resamples: PositiveInt = 2000
    outputs: OutputPaths = Field(default_factory=OutputPaths)
    seed: int = Field(default=0, ge=0, le=SEED_MAX)
    threads: Optional[PositiveInt] = None
    seed_jitter: NonNegativeFloat = Field(default=0.1, description="Jitter of equilibrium seeding in units of r_n")

    model_config = ConfigDict(extra="forbid")

    @field_validator("beta")
    @classmethod
    def _check_ladder(cls, value):
        if isinstance(value, list):
            if not value:
                raise ValueError("beta ladder must not be empty")
            if len(set(value)) != len(value):
                raise ValueError("beta ladder contains duplicate values")
            if value != sorted(value):
                raise ValueError("beta ladder must be sorted ascending")
        return value

    @model_validator(mode="after")
    def _check_kind(self):
        if self.kind != "beta-sweep" and isinstance(self.beta, list):
            raise ValueError("a beta ladder is only allowed for beta-sweep experiments")
        return self

    @property
    def betas(self) -> List[float]:
        return list(self.beta) if isinstance(self.beta, list) else [self.beta]

    @property
    def center_complex(self) -> complex:
        return complex(self.center[0], self.center[1])
