import math
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class GroupPoint(BaseModel):
    """Point (x, u, xi) of the real Heisenberg group in exponential coordinates"""
    x: List[float] = Field(..., description="First horizontal block, length n")
    u: List[float] = Field(..., description="Second horizontal block, length n")
    xi: float = Field(default=0.0, description="Central coordinate")

    @field_validator('x', 'u')
    @classmethod
    def validate_block(cls, v):
        if len(v) == 0:
            raise ValueError('horizontal blocks cannot be empty')
        if not all(math.isfinite(c) for c in v):
            raise ValueError('coordinates must be finite')
        return v

    @field_validator('xi')
    @classmethod
    def validate_xi(cls, v):
        if not math.isfinite(v):
            raise ValueError('xi must be finite')
        return v

    @model_validator(mode='after')
    def validate_dimensions(self):
        if len(self.x) != len(self.u):
            raise ValueError('x and u must have the same dimension n')
        return self

    @property
    def n(self) -> int:
        return len(self.x)

    def arrays(self):
        """Return (x, u, xi) as numpy values"""
        return np.asarray(self.x, dtype=float), np.asarray(self.u, dtype=float), float(self.xi)

    @classmethod
    def identity(cls, n: int) -> "GroupPoint":
        return cls(x=[0.0] * n, u=[0.0] * n, xi=0.0)

    @classmethod
    def from_arrays(cls, x, u, xi) -> "GroupPoint":
        return cls(x=[float(c) for c in np.atleast_1d(x)], u=[float(c) for c in np.atleast_1d(u)], xi=float(xi))

    model_config = ConfigDict(json_schema_extra={"example": {"x": [1.0], "u": [0.0], "xi": 0.5}})


class ComplexGroupPoint(BaseModel):
    """Point (z, w, zeta) of the complexified group, z = x+iy, w = u+iv, zeta = xi+i*eta"""
    z: List[complex] = Field(..., description="Complexified x block, length n")
    w: List[complex] = Field(..., description="Complexified u block, length n")
    zeta: complex = Field(default=0j, description="Complexified central coordinate")

    @field_validator('z', 'w')
    @classmethod
    def validate_block(cls, v):
        if len(v) == 0:
            raise ValueError('complex blocks cannot be empty')
        if not all(math.isfinite(c.real) and math.isfinite(c.imag) for c in v):
            raise ValueError('coordinates must be finite')
        return v

    @field_validator('zeta')
    @classmethod
    def validate_zeta(cls, v):
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise ValueError('zeta must be finite')
        return v

    @model_validator(mode='after')
    def validate_dimensions(self):
        if len(self.z) != len(self.w):
            raise ValueError('z and w must have the same dimension n')
        return self

    @property
    def n(self) -> int:
        return len(self.z)

    def arrays(self):
        """Return (z, w, zeta) as numpy values"""
        return np.asarray(self.z, dtype=complex), np.asarray(self.w, dtype=complex), complex(self.zeta)

    def real_part(self) -> GroupPoint:
        """Drop the imaginary parts"""
        return GroupPoint(x=[c.real for c in self.z], u=[c.real for c in self.w], xi=self.zeta.real)

    def conjugate(self) -> "ComplexGroupPoint":
        return ComplexGroupPoint(
            z=[c.conjugate() for c in self.z],
            w=[c.conjugate() for c in self.w],
            zeta=self.zeta.conjugate(),
        )

    @classmethod
    def from_real(cls, p: GroupPoint) -> "ComplexGroupPoint":
        return cls(z=[complex(c) for c in p.x], w=[complex(c) for c in p.u], zeta=complex(p.xi))

    @classmethod
    def from_arrays(cls, z, w, zeta) -> "ComplexGroupPoint":
        return cls(
            z=[complex(c) for c in np.atleast_1d(z)],
            w=[complex(c) for c in np.atleast_1d(w)],
            zeta=complex(zeta),
        )

    model_config = ConfigDict(json_schema_extra={"example": {"z": ["0+1j"], "w": ["0+1j"], "zeta": "0j"}})
