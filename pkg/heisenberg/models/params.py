import math
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class MultiIndex(BaseModel):
    """Multi-index alpha in N_0^n"""
    entries: List[int] = Field(..., description="Non-negative integer entries, one per dimension")

    @field_validator('entries')
    @classmethod
    def validate_entries(cls, v):
        if not v:
            raise ValueError('multi-index needs at least one entry')
        if any(a < 0 for a in v):
            raise ValueError('multi-index entries must be non-negative')
        return v

    @property
    def order(self) -> int:
        return sum(self.entries)

    @property
    def n(self) -> int:
        return len(self.entries)

    @classmethod
    def of(cls, *entries: int) -> "MultiIndex":
        return cls(entries=list(entries))

    def __hash__(self):
        return hash(tuple(self.entries))


class QuadratureSpec(BaseModel):
    """Rule, per-axis node count, truncation radius and target tolerance of one integral"""
    rule: Literal["gauss_hermite", "uniform_truncated"] = Field(default="uniform_truncated",
                                                                 description="Quadrature rule")
    nodes: int = Field(default=64, description="Node count per axis")
    radius: Optional[float] = Field(default=None, description="Truncation radius of the uniform rule")
    tol: float = Field(default=1e-10, description="Target tolerance")
    max_refinements: int = Field(default=4, description="Node doublings allowed before giving up")

    @field_validator('nodes')
    @classmethod
    def validate_nodes(cls, v):
        if v < 2:
            raise ValueError('nodes must be at least 2')
        return v

    @field_validator('tol')
    @classmethod
    def validate_tol(cls, v):
        if not v > 0:
            raise ValueError('tol must be positive')
        return v

    @field_validator('radius')
    @classmethod
    def validate_radius(cls, v):
        if v is not None and not v > 0:
            raise ValueError('radius must be positive')
        return v

    @field_validator('max_refinements')
    @classmethod
    def validate_max_refinements(cls, v):
        if v < 0:
            raise ValueError('max_refinements cannot be negative')
        return v

    def refined(self) -> "QuadratureSpec":
        """Same rule with the node count doubled"""
        return self.model_copy(update={"nodes": 2 * self.nodes - 1})

    model_config = ConfigDict(json_schema_extra={
        "example": {
            "rule": "uniform_truncated",
            "nodes": 64,
            "radius": 6.0,
            "tol": 1e-10,
            "max_refinements": 4
        }
    })


class HeatParams(BaseModel):
    """Dimension n and heat time t; c_n = (4 pi)^{-n}"""
    n: int = Field(default=1, description="Heisenberg dimension")
    t: float = Field(..., description="Heat time")

    @field_validator('n')
    @classmethod
    def validate_n(cls, v):
        if v < 1:
            raise ValueError('n must be positive')
        return v

    @field_validator('t')
    @classmethod
    def validate_t(cls, v):
        if not (math.isfinite(v) and v > 0):
            raise ValueError('t must be positive')
        return v

    @property
    def c_n(self) -> float:
        return (4.0 * math.pi) ** (-self.n)


class SpectralParam(BaseModel):
    """Spectral parameter lambda, shifted to lambda + i s/2 on contours"""
    lam: float = Field(..., alias="lambda", description="Real part of the spectral parameter")
    s: float = Field(default=0.0, description="Contour offset")

    @field_validator('lam', 's')
    @classmethod
    def validate_finite(cls, v):
        if not math.isfinite(v):
            raise ValueError('spectral parameters must be finite')
        return v

    @property
    def value(self) -> complex:
        return complex(self.lam, self.s / 2.0)

    @property
    def is_real(self) -> bool:
        return self.s == 0.0

    model_config = ConfigDict(populate_by_name=True)


class PartialWeightParams(BaseModel):
    """Parameters of the signed partial weights W_t^+ and W_t^-"""
    t: float = Field(..., description="Heat time")
    lam: float = Field(default=1.0, description="Contour abscissa, positive for W+ and negative for W-")
    branch: Literal["+", "-"] = Field(default="+", description="Which partial weight")
    K: int = Field(default=60, description="Series truncation")
    quad: QuadratureSpec = Field(
        default_factory=lambda: QuadratureSpec(rule="uniform_truncated", nodes=1025, tol=1e-12),
        description="Quadrature of the s-integral",
    )

    @field_validator('t')
    @classmethod
    def validate_t(cls, v):
        if not v > 0:
            raise ValueError('t must be positive')
        return v

    @field_validator('K')
    @classmethod
    def validate_k(cls, v):
        if v < 1:
            raise ValueError('K must be at least 1')
        return v

    @model_validator(mode='after')
    def validate_branch(self):
        if self.lam == 0:
            raise ValueError('contour abscissa cannot be zero')
        if (self.branch == "+") != (self.lam > 0):
            raise ValueError('contour abscissa sign must match the branch')
        return self


class SeriesTerm(BaseModel):
    """One term index of the Hermite series; mu_k = (2k+1+(2 eta+beta)/t)/2"""
    k: int = Field(..., description="Term index")
    beta: float = Field(..., description="y^2 + v^2")
    eta: float = Field(default=0.0, description="Imaginary central coordinate")
    t: float = Field(..., description="Heat time of the series")

    @field_validator('k')
    @classmethod
    def validate_k(cls, v):
        if v < 0:
            raise ValueError('k must be non-negative')
        return v

    @field_validator('beta')
    @classmethod
    def validate_beta(cls, v):
        if v < 0:
            raise ValueError('beta must be non-negative')
        return v

    @field_validator('t')
    @classmethod
    def validate_t(cls, v):
        if not v > 0:
            raise ValueError('t must be positive')
        return v

    @property
    def mu(self) -> float:
        return (2 * self.k + 1 + (2 * self.eta + self.beta) / self.t) / 2.0
