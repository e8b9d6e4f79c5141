"""
Tests for the tolerance manager and settings
"""

import json
from pathlib import Path

import pytest

from heisenberg.config import Settings
from heisenberg.services.tolerance_manager import (
    DEFAULT_TOLERANCES, ToleranceConfigurationError, ToleranceManager
)

REPO_ROOT = Path(__file__).resolve().parents[2]


class TestToleranceManager:
    """Test cases for ToleranceManager"""

    def setup_method(self):
        """Setup for each test method"""
        self.manager = ToleranceManager("does-not-exist.json")

    def test_missing_file_uses_defaults(self):
        """Test a missing file falls back to the built-in table"""
        self.manager.load_configuration()

        assert self.manager.get("group.associativity") == DEFAULT_TOLERANCES["group.associativity"]
        assert all(self.manager.get(name) == value for name, value in DEFAULT_TOLERANCES.items())

    def test_unknown_identity_uses_setting(self):
        """Test identities without a tolerance get the settings default"""
        assert self.manager.get("nowhere.unknown") == Settings().default_tol

    def test_precedence(self, tmp_path):
        """Test run override beats file override beats default"""
        name = "kernels.k_semigroup"
        path = tmp_path / "tolerances.json"
        path.write_text(json.dumps({"overrides": {name: 0.25}}))
        self.manager.load_configuration(str(path))
        assert self.manager.get(name) == 0.25

        self.manager.set_global_override(0.5)
        assert self.manager.get(name) == 0.5
        assert self.manager.get("group.associativity") == 0.5

        self.manager.set_global_override(None)
        assert self.manager.get(name) == 0.25
        assert self.manager.get("group.associativity") == DEFAULT_TOLERANCES["group.associativity"]

    def test_invalid_global_override(self):
        """Test a non-positive run-wide tolerance is rejected"""
        with pytest.raises(ToleranceConfigurationError):
            self.manager.set_global_override(-1.0)
        with pytest.raises(ToleranceConfigurationError):
            self.manager.set_global_override(0.0)

    def test_partial_file_merges_defaults(self, tmp_path):
        """Test a file naming a few identities keeps the rest of the table"""
        path = tmp_path / "tolerances.json"
        path.write_text(json.dumps({"defaults": {"group.associativity": 1e-6}}))

        self.manager.load_configuration(str(path))
        assert self.manager.get("group.associativity") == 1e-6
        assert self.manager.get("appendix.oscillation") == DEFAULT_TOLERANCES["appendix.oscillation"]

    def test_invalid_json(self, tmp_path):
        """Test malformed JSON raises a configuration error"""
        path = tmp_path / "tolerances.json"
        path.write_text("{not json")

        with pytest.raises(ToleranceConfigurationError) as exc_info:
            self.manager.load_configuration(str(path))
        assert "Invalid JSON" in str(exc_info.value)

    def test_invalid_values(self):
        """Test negative tolerances in imported data are rejected"""
        with pytest.raises(ToleranceConfigurationError):
            self.manager.import_configuration({"defaults": {"group.associativity": -1.0}})
        with pytest.raises(ToleranceConfigurationError):
            self.manager.import_configuration(["not", "a", "dict"])

    def test_repository_file_matches_defaults(self):
        """Test the shipped tolerances.json mirrors the built-in table"""
        data = json.loads((REPO_ROOT / "tolerances.json").read_text())

        assert data["defaults"] == DEFAULT_TOLERANCES
        assert data["overrides"] == {}


class TestSettings:
    """Test environment configuration"""

    def test_defaults(self):
        """Test default settings"""
        settings = Settings(_env_file=None)
        assert settings.max_workers == 4
        assert settings.report_timing is True
        assert settings.tolerance_config_path == "tolerances.json"

    def test_environment_prefix(self, monkeypatch):
        """Test HEISENBERG_ variables override defaults"""
        monkeypatch.setenv("HEISENBERG_MAX_WORKERS", "2")
        monkeypatch.setenv("HEISENBERG_REPORT_TIMING", "false")

        settings = Settings(_env_file=None)
        assert settings.max_workers == 2
        assert settings.report_timing is False
