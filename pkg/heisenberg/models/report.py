import math
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class VerificationReport(BaseModel):
    """Outcome of one machine-checked identity"""
    identity_name: str = Field(..., description="Identity being checked")
    anchor: str = Field(default="", description="Where the identity comes from")
    params: Dict[str, Any] = Field(default_factory=dict, description="Parameters of the check")
    residual: float = Field(..., description="Measured residual")
    tolerance: float = Field(..., description="Tolerance the residual is compared with")
    passed: Optional[bool] = Field(default=None, alias="pass", description="residual <= tolerance")
    wall_time: float = Field(default=0.0, description="Seconds spent on the check")

    @field_validator('identity_name')
    @classmethod
    def validate_identity_name(cls, v):
        if not v.strip():
            raise ValueError('identity_name cannot be empty')
        return v.strip()

    @field_validator('tolerance')
    @classmethod
    def validate_tolerance(cls, v):
        if not v > 0:
            raise ValueError('tolerance must be positive')
        return v

    @field_validator('wall_time')
    @classmethod
    def validate_wall_time(cls, v):
        if v < 0:
            raise ValueError('wall_time cannot be negative')
        return v

    @model_validator(mode='after')
    def validate_pass_flag(self):
        expected = bool(math.isfinite(self.residual) and self.residual <= self.tolerance)
        if self.passed is None:
            self.passed = expected
        elif self.passed != expected:
            raise ValueError('pass flag must equal residual <= tolerance')
        return self

    def to_json_dict(self) -> Dict[str, Any]:
        data = self.model_dump(by_alias=True)
        if not math.isfinite(data["residual"]):
            data["residual"] = str(data["residual"])
        return data

    model_config = ConfigDict(
        populate_by_name=True,
        json_schema_extra={
            "example": {
                "identity_name": "twisted.lemma_reproducing_identity",
                "anchor": "reproducing kernel lemma",
                "params": {"n": 1, "t": 0.5, "lambda": 1.0},
                "residual": 2.1e-5,
                "tolerance": 1e-3,
                "pass": True,
                "wall_time": 12.5
            }
        },
    )


class SuiteReport(BaseModel):
    """All identity reports of one verification suite"""
    suite: str = Field(..., description="Suite name")
    reports: List[VerificationReport] = Field(default_factory=list, description="Per-identity outcomes")

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    def failures(self) -> List[VerificationReport]:
        return [r for r in self.reports if not r.passed]

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "suite": self.suite,
            "pass": self.passed,
            "reports": [r.to_json_dict() for r in self.reports],
        }


class ToleranceConfig(BaseModel):
    """Tolerance file: shared defaults plus per-identity overrides"""
    defaults: Dict[str, float] = Field(default_factory=dict, description="Tolerance per identity name")
    overrides: Dict[str, float] = Field(default_factory=dict, description="Overrides taking precedence")

    @field_validator('defaults', 'overrides')
    @classmethod
    def validate_positive(cls, v):
        for name, value in v.items():
            if not name.strip():
                raise ValueError('identity names cannot be empty')
            if not value > 0:
                raise ValueError(f'tolerance for {name} must be positive')
        return v


class RunConfig(BaseModel):
    """Parsed command line of one run"""
    command: Literal["eval", "verify", "scan"] = Field(..., description="Sub-command")
    kind: Optional[str] = Field(default=None, description="Quantity evaluated by eval")
    suite: Optional[str] = Field(default=None, description="Suite run by verify")
    n: int = Field(default=1, description="Heisenberg dimension")
    t: float = Field(default=1.0, description="Heat time")
    lam: Optional[float] = Field(default=None, description="Spectral parameter")
    eta: float = Field(default=0.0, description="Imaginary central coordinate")
    xi: float = Field(default=0.0, description="Real central coordinate")
    points: List[List[float]] = Field(default_factory=list, description="Evaluation points")
    beta_max: float = Field(default=8.0, description="Upper end of the oscillation scan")
    steps: int = Field(default=400, description="Scan sample count")
    both_conventions: bool = Field(default=False, description="Also scan in the other time convention")
    factor: Literal["stated", "heat"] = Field(default="stated", description="Gaussian factor of the scanned series")
    quad_nodes: Optional[int] = Field(default=None, description="Quadrature node override")
    tol: Optional[float] = Field(default=None, description="Tolerance override for every identity")
    out: Optional[str] = Field(default=None, description="Output path, stdout if omitted")
    config: Optional[str] = Field(default=None, description="Tolerance configuration file")

    @field_validator('n')
    @classmethod
    def validate_n(cls, v):
        if v < 1:
            raise ValueError('--n must be a positive integer')
        return v

    @field_validator('t')
    @classmethod
    def validate_t(cls, v):
        if not (math.isfinite(v) and v > 0):
            raise ValueError('--t must be positive')
        return v

    @field_validator('steps')
    @classmethod
    def validate_steps(cls, v):
        if v < 2:
            raise ValueError('--steps must be at least 2')
        return v

    @field_validator('beta_max')
    @classmethod
    def validate_beta_max(cls, v):
        if not v > 0:
            raise ValueError('--beta-max must be positive')
        return v

    @field_validator('tol')
    @classmethod
    def validate_tol(cls, v):
        if v is not None and not v > 0:
            raise ValueError('--tol must be positive')
        return v
