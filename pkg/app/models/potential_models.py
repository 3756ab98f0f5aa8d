"""Schema for external potentials in experiment configs."""
from typing import List, Literal, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, PositiveInt


class MonomialFamily(BaseModel):
    """Q = |z - a|^{2k}."""

    monomial: PositiveInt

    model_config = ConfigDict(extra="forbid")


class RadialPolynomialFamily(BaseModel):
    """Q = sum_m c_m |z - a|^{2m}, m = 1..M."""

    radial_polynomial: List[float] = Field(..., min_length=1)

    model_config = ConfigDict(extra="forbid")


PotentialFamily = Union[Literal["ginibre"], MonomialFamily, RadialPolynomialFamily]


class PotentialSpec(BaseModel):
    """Potential description: family plus symmetry center a."""

    family: PotentialFamily = "ginibre"
    center: Tuple[float, float] = Field(default=(0.0, 0.0), description="Symmetry center of Q as [re, im]")

    model_config = ConfigDict(extra="forbid")

    @property
    def center_complex(self) -> complex:
        return complex(self.center[0], self.center[1])
