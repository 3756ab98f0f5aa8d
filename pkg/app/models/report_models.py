"""Pydantic models for experiment reports."""
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field


class ScaleInfo(BaseModel):
    """Local Taylor data at the observation point."""

    center: Tuple[float, float]
    n: int
    k: int = Field(..., ge=1)
    tau0: float = Field(..., gt=0)
    r_n: float = Field(..., gt=0)
    h_coeffs: List[Tuple[float, float]] = Field(..., description="Coefficients a_0..a_2k of H as [re, im]")
    q0: float = Field(..., gt=0)
    cn_bound: float
    K: float
    T: float = Field(..., ge=1.0)
    M: float
    certified: bool = Field(..., description="True when K comes from the explicit k=1 value")


class CheckReport(BaseModel):
    """Outcome of one verification check."""

    name: str
    trials: int
    worst_case: float
    bound: float
    passed: bool = Field(..., serialization_alias="pass")
    details: Dict[str, Any] = Field(default_factory=dict)

    model_config = ConfigDict(populate_by_name=True)


class TheoremParams(BaseModel):
    """Parameters entering the separation bound."""

    beta: float
    n: int
    epsilon: float
    c: float
    eta: float
    threshold: float
    m0: float
    bound: float


class SpacingReport(BaseModel):
    """Rescaled spacing statistics and the empirical comparison with the separation bound."""

    beta: float
    n: int
    center: Tuple[float, float]
    r_n: float
    eta_hat: float = Field(..., ge=0.0, le=1.0)
    eta_std_error: float
    eta_interval: Tuple[float, float]
    eta_samples: int
    conditional_samples: int
    reused_chains: bool
    s0_samples: List[float]
    nD_samples: List[int]
    params: Optional[TheoremParams] = None
    empirical_conditional: Optional[float] = None
    bound_holds: Optional[bool] = None
    packing_failures: int = 0
    acceptance_rates: List[float] = Field(default_factory=list)


class BetaTrendEntry(BaseModel):
    """Median spacing at one beta with its bootstrap band."""

    beta: float
    median_s0: Optional[float]
    lower: Optional[float]
    upper: Optional[float]
    samples: int


class BetaSweepReport(BaseModel):
    """One spacing report per beta plus the monotone-trend verdict."""

    reports: List[SpacingReport]
    trend: Optional[List[BetaTrendEntry]] = None
    monotone: Optional[bool] = None
    swap_acceptance: Optional[List[float]] = None


class FeketeReport(BaseModel):
    """Minimum-energy configuration summary."""

    n: int
    energy: float
    gradient_norm: float
    r_n: float
    min_spacing: float
    rescaled_min_spacing: float
    rescaled_s0: Optional[float]
    fekete_lower_bound: float
    proof_constant_limit: float
    lattice_constant: float
    points: List[Tuple[float, float]]


class OutputHeader(BaseModel):
    """Non-deterministic provenance fields isolated from the payload."""

    timestamp: str
    version: str


class ExperimentOutput(BaseModel):
    """Envelope for every JSON output."""

    header: OutputHeader
    config: Dict[str, Any]
    result: Any


class SampleReport(BaseModel):
    """Summary of a sampling run next to the equilibrium prediction."""

    n: int
    beta: float
    samples: int
    acceptance_rates: List[float]
    mean_energy: float
    mean_square_radius: float = Field(..., description="Sample mean of (1/n) sum |zeta_j - a|^2")
    equilibrium_square_radius: float = Field(..., description="Integral of |zeta - a|^2 against sigma")
    warnings: List[str] = Field(default_factory=list)


class VerificationReport(BaseModel):
    """All checks of one verify run."""

    checks: List[CheckReport]
    passed: bool = Field(..., serialization_alias="pass")

    model_config = ConfigDict(populate_by_name=True)
