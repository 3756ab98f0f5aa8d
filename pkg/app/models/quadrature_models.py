"""Quadrature settings shared by every integral in the toolkit."""
from pydantic import BaseModel, ConfigDict, Field


class QuadratureSpec(BaseModel):
    """Tensor Gauss-Legendre rule in (radius^2, angle) with dyadic refinement."""

    abs_tol: float = Field(default=1e-12, gt=0, description="Absolute error tolerance")
    rel_tol: float = Field(default=1e-10, gt=0, description="Relative error tolerance")
    max_refinements: int = Field(default=5, ge=1, description="Number of dyadic panel doublings allowed")
    radial_panels: int = Field(default=4, ge=4, description="Panels in radius^2 at the coarsest level")
    angular_panels: int = Field(default=4, ge=4, description="Panels in angle at the coarsest level")
    order: int = Field(default=8, ge=2, le=64, description="Gauss-Legendre nodes per panel and direction")

    model_config = ConfigDict(extra="forbid", frozen=True)
