import math
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class Lattice(BaseModel):
    """Uniform tensor-product lattice; axis k has nodes origin[k] + j*spacing[k], j < counts[k]"""
    origin: List[float] = Field(..., description="First node on every axis")
    spacing: List[float] = Field(..., description="Node spacing on every axis")
    counts: List[int] = Field(..., description="Node count on every axis")

    @field_validator('spacing')
    @classmethod
    def validate_spacing(cls, v):
        if not v:
            raise ValueError('lattice needs at least one axis')
        if any(not math.isfinite(h) or h <= 0 for h in v):
            raise ValueError('spacings must be strictly positive')
        return v

    @field_validator('counts')
    @classmethod
    def validate_counts(cls, v):
        if any(c < 1 for c in v):
            raise ValueError('axis node counts must be positive')
        return v

    @model_validator(mode='after')
    def validate_axes(self):
        if not (len(self.origin) == len(self.spacing) == len(self.counts)):
            raise ValueError('origin, spacing and counts must have one entry per axis')
        return self

    @classmethod
    def symmetric(cls, radii: List[float], counts: List[int], centers: Optional[List[float]] = None) -> "Lattice":
        """Lattice on the box prod [c-r, c+r] with the given node counts"""
        centers = centers or [0.0] * len(radii)
        if any(c < 2 for c in counts):
            raise ValueError('symmetric lattices need at least two nodes per axis')
        return cls(
            origin=[c - r for c, r in zip(centers, radii)],
            spacing=[2.0 * r / (m - 1) for r, m in zip(radii, counts)],
            counts=list(counts),
        )

    @property
    def ndim(self) -> int:
        return len(self.counts)

    @property
    def shape(self) -> tuple:
        return tuple(self.counts)

    @property
    def size(self) -> int:
        return int(np.prod(self.counts))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axes(self) -> List[np.ndarray]:
        return [o + h * np.arange(m) for o, h, m in zip(self.origin, self.spacing, self.counts)]

    def mesh(self) -> List[np.ndarray]:
        return np.meshgrid(*self.axes(), indexing='ij')

    def points(self) -> np.ndarray:
        """Lattice nodes as an array of shape (size, ndim), C order"""
        return np.stack([m.ravel() for m in self.mesh()], axis=-1)

    def compatible_with(self, other: "Lattice", rtol: float = 1e-12) -> bool:
        if self.ndim != other.ndim:
            return False
        return all(math.isclose(a, b, rel_tol=rtol) for a, b in zip(self.spacing, other.spacing))


class SampledField(BaseModel):
    """Complex samples on a lattice over R^{2n} or R^{2n+1}, with optional exact evaluator"""
    lattice: Lattice = Field(..., description="Sampling lattice")
    values: Any = Field(..., description="Complex ndarray shaped like the lattice")
    n: int = Field(..., description="Heisenberg dimension n")
    t: Optional[float] = Field(default=None, description="Heat time the field belongs to, if any")
    lam: Optional[float] = Field(default=None, description="Spectral parameter the field belongs to, if any")
    evaluator: Optional[Callable] = Field(default=None, exclude=True,
                                          description="Callable evaluating the field off the lattice")

    @field_validator('n')
    @classmethod
    def validate_n(cls, v):
        if v < 1:
            raise ValueError('n must be positive')
        return v

    @model_validator(mode='after')
    def validate_values(self):
        values = np.asarray(self.values, dtype=complex)
        if values.size != self.lattice.size:
            raise ValueError(
                f'value count {values.size} does not match lattice size {self.lattice.size}'
            )
        if self.lattice.ndim not in (2 * self.n, 2 * self.n + 1):
            raise ValueError(f'lattice dimension {self.lattice.ndim} is neither 2n nor 2n+1 for n={self.n}')
        self.values = values.reshape(self.lattice.shape)
        return self

    @property
    def is_group_field(self) -> bool:
        return self.lattice.ndim == 2 * self.n + 1

    def descriptor(self) -> Dict[str, Any]:
        """Sidecar description of the sampling (axes, spacings, n, t, lambda)"""
        return {
            "axes": [f"axis{k}" for k in range(self.lattice.ndim)],
            "origin": self.lattice.origin,
            "spacings": self.lattice.spacing,
            "counts": self.lattice.counts,
            "n": self.n,
            "t": self.t,
            "lambda": self.lam,
        }

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.lattice.cell_volume))

    @classmethod
    def from_function(cls, func: Callable, lattice: Lattice, n: int, **kwargs) -> "SampledField":
        """Sample func(*coordinate_arrays) on the lattice and keep func as the evaluator"""
        values = func(*lattice.mesh())
        return cls(lattice=lattice, values=values, n=n, evaluator=func, **kwargs)

    model_config = ConfigDict(arbitrary_types_allowed=True)


class SeparableField(BaseModel):
    """
    f(x, u, xi) = G(x, u) phi(xi) on R^{2n+1}.

    G is sampled on a 2n-axis lattice; phi is given through its spectrum
    phi_hat(lam) = int e^{i lam xi} phi(xi) dxi and, optionally, pointwise.
    """
    spatial: SampledField = Field(..., description="G sampled on a 2n-axis lattice")
    spectrum: Callable = Field(..., exclude=True, description="lam -> phi_hat(lam)")
    phi: Optional[Callable] = Field(default=None, exclude=True, description="xi -> phi(xi)")
    spectral_support: Optional[List[float]] = Field(
        default=None, description="Interval [a, b] outside which phi_hat vanishes"
    )
    gaussian_width: Optional[float] = Field(
        default=None, description="a when G(x, u) = exp(-a(|x|^2 + |u|^2)) exactly"
    )

    @field_validator('spatial')
    @classmethod
    def validate_spatial(cls, v):
        if v.is_group_field:
            raise ValueError('the spatial factor must live on R^{2n}')
        return v

    @field_validator('spectral_support')
    @classmethod
    def validate_support(cls, v):
        if v is not None and (len(v) != 2 or not v[0] < v[1]):
            raise ValueError('spectral support must be an interval [a, b] with a < b')
        return v

    @field_validator('gaussian_width')
    @classmethod
    def validate_width(cls, v):
        if v is not None and not v > 0:
            raise ValueError('gaussian width must be positive')
        return v

    @property
    def n(self) -> int:
        return self.spatial.n

    @property
    def in_positive_family(self) -> bool:
        """phi_hat vanishes on lam <= 0"""
        return self.spectral_support is not None and self.spectral_support[0] >= 0

    def phi_hat(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        values = np.asarray(self.spectrum(lam), dtype=complex)
        if self.spectral_support is not None:
            a, b = self.spectral_support
            values = np.where((lam >= a) & (lam <= b), values, 0.0)
        return values

    def spatial_norm_squared(self) -> float:
        if self.gaussian_width is not None:
            return (math.pi / (2.0 * self.gaussian_width)) ** self.n
        return self.spatial.l2_norm() ** 2

    def slice(self, lam: float) -> SampledField:
        """Central slice f^lam = phi_hat(lam) G"""
        factor = complex(self.phi_hat(lam))
        G = self.spatial
        evaluator = None
        if G.evaluator is not None:
            def evaluator(*coords, _g=G.evaluator, _c=factor):
                return _c * np.asarray(_g(*coords))
        return SampledField(lattice=G.lattice, values=factor * G.values, n=G.n,
                            t=G.t, lam=lam, evaluator=evaluator)

    def to_field(self, xi_axis: List[float]) -> SampledField:
        """Samples of f on the spatial lattice times a uniform xi-axis given as [start, spacing, count]"""
        if self.phi is None:
            raise ValueError('pointwise phi is needed to sample f on the group')
        start, spacing, count = xi_axis
        G = self.spatial
        lattice = Lattice(origin=G.lattice.origin + [float(start)],
                          spacing=G.lattice.spacing + [float(spacing)],
                          counts=G.lattice.counts + [int(count)])
        xi = start + spacing * np.arange(int(count))
        values = G.values[..., None] * np.asarray(self.phi(xi), dtype=complex)
        evaluator = None
        if G.evaluator is not None:
            def evaluator(*coords, _g=G.evaluator, _phi=self.phi):
                return np.asarray(_g(*coords[:-1])) * np.asarray(_phi(coords[-1]))
        return SampledField(lattice=lattice, values=values, n=G.n, evaluator=evaluator)

    model_config = ConfigDict(arbitrary_types_allowed=True)
