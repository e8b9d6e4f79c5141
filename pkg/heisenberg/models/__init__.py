# Models package
from .group import GroupPoint, ComplexGroupPoint
from .field import Lattice, SampledField, SeparableField
from .params import (
    MultiIndex, QuadratureSpec, HeatParams, SpectralParam,
    PartialWeightParams, SeriesTerm
)
from .transform import (
    TwistedTransformResult, WeightLambda, PairingTrace, OscillationScan, LineTransform
)
from .report import VerificationReport, SuiteReport, ToleranceConfig, RunConfig

__all__ = [
    "GroupPoint",
    "ComplexGroupPoint",
    "Lattice",
    "SampledField",
    "SeparableField",
    "MultiIndex",
    "QuadratureSpec",
    "HeatParams",
    "SpectralParam",
    "PartialWeightParams",
    "SeriesTerm",
    "TwistedTransformResult",
    "WeightLambda",
    "PairingTrace",
    "OscillationScan",
    "LineTransform",
    "VerificationReport",
    "SuiteReport",
    "ToleranceConfig",
    "RunConfig"
]
