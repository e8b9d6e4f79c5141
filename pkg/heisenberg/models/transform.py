import math
from typing import Any, Callable, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class TwistedTransformResult(BaseModel):
    """Lazily evaluated holomorphic function on C^{2n} produced by a twisted transform"""
    n: int = Field(default=1, description="Heisenberg dimension n")
    t: float = Field(..., description="Heat time")
    lam: float = Field(..., description="Spectral parameter lambda")
    source: Dict[str, Any] = Field(default_factory=dict, description="Descriptor of the input that was transformed")
    evaluator: Callable = Field(..., exclude=True, description="(z, w) -> complex values, broadcasting")
    product_evaluator: Optional[Callable] = Field(
        default=None, exclude=True,
        description="(zs, ws) -> matrix of values on the product zs x ws (n = 1 only)"
    )

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

    @field_validator('lam')
    @classmethod
    def validate_lam(cls, v):
        if not math.isfinite(v) or v == 0:
            raise ValueError('lambda must be finite and non-zero')
        return v

    def evaluate(self, z, w) -> np.ndarray:
        """Values at complex points; z, w have shape (..., n), bare arrays for n = 1"""
        return np.asarray(self.evaluator(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex)))

    def evaluate_product(self, zs, ws) -> np.ndarray:
        """Values on every pair (zs[i], ws[j]) for n = 1; shape (len(zs), len(ws))"""
        zs = np.asarray(zs, dtype=complex).ravel()
        ws = np.asarray(ws, dtype=complex).ravel()
        if self.product_evaluator is not None:
            return np.asarray(self.product_evaluator(zs, ws))
        return self.evaluate(zs[:, None, None], ws[None, :, None])

    def shares_space(self, other: "TwistedTransformResult", rtol: float = 1e-12) -> bool:
        return (self.n == other.n and math.isclose(self.t, other.t, rel_tol=rtol)
                and math.isclose(self.lam, other.lam, rel_tol=rtol))

    def __call__(self, z, w):
        return self.evaluate(z, w)

    model_config = ConfigDict(arbitrary_types_allowed=True)


class WeightLambda(BaseModel):
    """W_t^lambda sampled at requested points"""
    n: int = Field(default=1, description="Heisenberg dimension n")
    t: float = Field(..., description="Heat time")
    lam: float = Field(..., description="Spectral parameter lambda")
    y: Any = Field(..., description="Imaginary parts of z, shape (..., n)")
    v: Any = Field(..., description="Imaginary parts of w, shape (..., n)")
    gaussian: Any = Field(..., description="(y, v)-only factor 4^n p_2t^lambda(2y, 2v)")
    values: Any = Field(..., description="Full weight including the symplectic exponential")

    @model_validator(mode='after')
    def validate_values(self):
        gaussian = np.asarray(self.gaussian, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if np.any(gaussian < 0) or np.any(values < 0):
            raise ValueError('weight values must be non-negative')
        self.gaussian = gaussian
        self.values = values
        return self

    model_config = ConfigDict(arbitrary_types_allowed=True)


class PairingTrace(BaseModel):
    """Partial values of an exhaustion limit over balls of increasing radius"""
    radii: List[float] = Field(..., description="Radii of the exhaustion, increasing")
    values: List[complex] = Field(..., description="Partial pairing on each radius")
    tol: float = Field(default=1e-3, description="Relative gap accepted between the last two radii")

    @field_validator('radii')
    @classmethod
    def validate_radii(cls, v):
        if not v:
            raise ValueError('at least one radius is required')
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError('radii must be strictly increasing')
        return v

    @model_validator(mode='after')
    def validate_lengths(self):
        if len(self.values) != len(self.radii):
            raise ValueError('one partial value per radius is required')
        return self

    @property
    def value(self) -> complex:
        return self.values[-1]

    def gaps(self) -> List[float]:
        """Relative gaps between consecutive partial values"""
        scale = max(1e-300, max(abs(v) for v in self.values))
        return [abs(b - a) / scale for a, b in zip(self.values, self.values[1:])]

    @property
    def converged(self) -> bool:
        gaps = self.gaps()
        return bool(gaps) and gaps[-1] < self.tol

    @property
    def increasing(self) -> bool:
        reals = [v.real for v in self.values]
        scale = max(1e-300, max(abs(r) for r in reals))
        return all(b >= a - 1e-12 * scale for a, b in zip(reals, reals[1:]))

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "radii": self.radii,
            "values": [[v.real, v.imag] for v in self.values],
            "converged": self.converged,
            "increasing": self.increasing,
        }


class OscillationScan(BaseModel):
    """Samples of the partial weight along the ray 2 eta = -beta"""
    t: float = Field(..., description="Heat time parameter of the series")
    convention: Literal["half", "direct"] = Field(
        default="half", description="'half' samples W_{t/2}^+, 'direct' samples W_t^+"
    )
    factor: Literal["heat", "stated"] = Field(
        default="stated", description="Gaussian factor of the series terms, e^{-t mu^2} or e^{-mu^2/4}"
    )
    beta: List[float] = Field(..., description="beta = y^2 + v^2 samples")
    values: List[float] = Field(..., description="Partial weight at each sample")
    normalized: List[float] = Field(..., description="Values without c sqrt(pi), divided by log(2 + beta^2)")
    sign_changes: List[float] = Field(default_factory=list, description="Interpolated zero crossings")

    @model_validator(mode='after')
    def validate_lengths(self):
        if not (len(self.beta) == len(self.values) == len(self.normalized)):
            raise ValueError('beta, values and normalized must have equal length')
        return self

    def rows(self) -> List[List[float]]:
        return [[b, v, w] for b, v, w in zip(self.beta, self.values, self.normalized)]


class LineTransform(BaseModel):
    """Entire extension of g * q_t on C, tagged by the Fourier support of g"""
    t: float = Field(..., description="Heat time")
    branch: Literal["+", "-", "mixed"] = Field(..., description="Half-line carrying the Fourier transform of g")
    source_norm_squared: float = Field(..., description="||g||_2^2 on its grid")
    evaluator: Callable = Field(..., exclude=True, description="z -> complex values, broadcasting")

    def evaluate(self, z) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(z, dtype=complex)))

    def __call__(self, z):
        return self.evaluate(z)

    model_config = ConfigDict(arbitrary_types_allowed=True)
