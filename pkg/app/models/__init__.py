"""Data models for the toolkit."""
from .chain_models import ChainConfig, ChainDiagnostics, ChainSettings
from .experiment_models import ExperimentConfig, FeketeSettings, OutputPaths
from .potential_models import MonomialFamily, PotentialSpec, RadialPolynomialFamily
from .quadrature_models import QuadratureSpec
from .report_models import (
    BetaSweepReport,
    BetaTrendEntry,
    CheckReport,
    ExperimentOutput,
    FeketeReport,
    OutputHeader,
    SampleReport,
    ScaleInfo,
    SpacingReport,
    TheoremParams,
    VerificationReport,
)

__all__ = [
    "ChainConfig",
    "ChainDiagnostics",
    "ChainSettings",
    "ExperimentConfig",
    "FeketeSettings",
    "OutputPaths",
    "MonomialFamily",
    "PotentialSpec",
    "RadialPolynomialFamily",
    "QuadratureSpec",
    "BetaSweepReport",
    "BetaTrendEntry",
    "CheckReport",
    "ExperimentOutput",
    "FeketeReport",
    "OutputHeader",
    "SampleReport",
    "ScaleInfo",
    "SpacingReport",
    "TheoremParams",
    "VerificationReport",
]
