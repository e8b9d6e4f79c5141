"""
Tolerance Configuration Manager
Handles loading, validation, and lookup of per-identity verification tolerances
"""

import json
import logging
from pathlib import Path
from typing import Dict, Optional, Any
from pydantic import ValidationError

from heisenberg.config import settings
from heisenberg.models.report import ToleranceConfig

logger = logging.getLogger(__name__)


# Defaults mirror the thresholds the verification suites are specified with
DEFAULT_TOLERANCES: Dict[str, float] = {
    # group
    "group.associativity": 1e-12,
    "group.inverse_law": 1e-14,
    "group.polar_round_trip": 1e-12,
    "group.convolution_equivariance": 1e-4,
    "group.slice_of_convolution": 1e-4,
    "group.gaussian_marginal": 1e-4,
    # kernels
    "kernels.k_origin_oracle": 1e-8,
    "kernels.k_inversion_symmetry": 1e-10,
    "kernels.k_conjugation": 1e-10,
    "kernels.k_semigroup": 1e-4,
    "kernels.p_semigroup": 1e-4,
    "kernels.central_slice": 1e-4,
    "kernels.k_holomorphy": 1e-5,
    "kernels.p_laguerre_expansion": 1e-10,
    "kernels.p_generator": 1e-4,
    "kernels.q_semigroup": 1e-8,
    "kernels.imaginary_profile": 1e-10,
    "kernels.contour_bound": 1e-12,
    "kernels.hermite_orthonormality": 1e-6,
    "kernels.global_norm_spot_check": 1e-6,
    # twisted
    "twisted.special_hermite_relation": 1e-4,
    "twisted.heat_expansion": 1e-4,
    "twisted.eigen_relation": 1e-4,
    "twisted.equivariance": 1e-6,
    "twisted.spectral_factorization": 1e-4,
    "twisted.spectral_factorization_shifted": 1e-4,
    "twisted.inversion": 1e-2,
    # bergman
    "bergman.lemma_chain": 1e-8,
    "bergman.lemma_reproducing_identity": 1e-3,
    "bergman.orthonormal_basis": 1e-3,
    "bergman.isometry": 1e-3,
    "bergman.fock_correspondence": 1e-8,
    "bergman.reproducing_property": 1e-3,
    "bergman.global_kernel_symmetry": 1e-8,
    "bergman.monomial_norms": 1e-8,
    "bergman.torus_orthogonality": 1e-8,
    # partial
    "partial.contour_independence": 1e-6,
    "partial.realness": 1e-8,
    "partial.reconstruction": 1e-4,
    "partial.reflection_paths": 1e-6,
    "partial.pde_residual": 1e-3,
    "partial.signed_disk": 1e-10,
    "partial.one_dim_scale": 1e-6,
    "partial.one_dim_branch": 0.5,
    "partial.bracket_limit": 1e-3,
    "partial.bracket_orthogonality": 1e-12,
    # appendix
    "appendix.series_contour": 1e-4,
    "appendix.series_constant": 1e-6,
    "appendix.origin_positivity": 1e-12,
    "appendix.oscillation": 0.5,
}


class ToleranceConfigurationError(Exception):
    """Raised when the tolerance configuration is invalid or cannot be loaded"""
    pass


class ToleranceManager:
    """
    Manages verification tolerances: file defaults, per-identity overrides
    and a run-wide override from the command line
    """

    def __init__(self, config_file_path: Optional[str] = None):
        self.config_file_path = config_file_path or settings.tolerance_config_path
        self.config = ToleranceConfig(defaults=dict(DEFAULT_TOLERANCES))
        self.global_override: Optional[float] = None

    def load_configuration(self, config_file_path: Optional[str] = None) -> None:
        """
        Load tolerances from a JSON file

        Args:
            config_file_path: Optional path to config file, uses default if not provided

        Raises:
            ToleranceConfigurationError: If the file cannot be read or is invalid
        """
        file_path = config_file_path or self.config_file_path

        config_path = Path(file_path)
        if not config_path.exists():
            logger.warning(f"Tolerance config file not found: {file_path}. Using built-in defaults.")
            self.config = ToleranceConfig(defaults=dict(DEFAULT_TOLERANCES))
            return

        try:
            with open(config_path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ToleranceConfigurationError(f"Invalid JSON in config file {file_path}: {str(e)}")
        except OSError as e:
            raise ToleranceConfigurationError(f"Failed to load config file {file_path}: {str(e)}")

        self.import_configuration(data)
        logger.info(f"Loaded {len(self.config.defaults)} tolerances and "
                    f"{len(self.config.overrides)} overrides from {file_path}")

    def import_configuration(self, config_data: Dict[str, Any]) -> None:
        """
        Import tolerances from a dictionary; missing defaults fall back to the built-in table

        Raises:
            ToleranceConfigurationError: If the configuration is invalid
        """
        if not isinstance(config_data, dict):
            raise ToleranceConfigurationError("Configuration data must be a dictionary")
        try:
            parsed = ToleranceConfig(**config_data)
        except ValidationError as e:
            raise ToleranceConfigurationError(f"Invalid tolerance configuration: {str(e)}")
        defaults = dict(DEFAULT_TOLERANCES)
        defaults.update(parsed.defaults)
        self.config = ToleranceConfig(defaults=defaults, overrides=parsed.overrides)

    def get(self, identity_name: str) -> float:
        """Tolerance for an identity: run override, then file override, then default"""
        if self.global_override is not None:
            return self.global_override
        if identity_name in self.config.overrides:
            return self.config.overrides[identity_name]
        if identity_name in self.config.defaults:
            return self.config.defaults[identity_name]
        logger.debug(f"No tolerance configured for {identity_name}; using {settings.default_tol}")
        return settings.default_tol

    def set_global_override(self, tolerance: Optional[float]) -> None:
        if tolerance is not None and not tolerance > 0:
            raise ToleranceConfigurationError("Run-wide tolerance must be positive")
        self.global_override = tolerance

    def __repr__(self) -> str:
        return f"ToleranceManager(config_file='{self.config_file_path}')"
