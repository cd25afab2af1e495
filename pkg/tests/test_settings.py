"""
Tests for configuration constants and environment settings.
"""

import pytest
from pydantic import ValidationError

from config import CHECK_KINDS, EXIT_CHECK_FAILED, EXIT_INPUT_ERROR, EXIT_OK, OBJECT_KINDS, SIMPLE_VARIANTS
from settings import Settings


class TestConfig:
    """Test suite for fixed constants."""

    def test_exit_codes(self):
        """Test the three exit codes."""
        assert (EXIT_OK, EXIT_CHECK_FAILED, EXIT_INPUT_ERROR) == (0, 1, 2)

    def test_names(self):
        """Test object, variant and check names."""
        assert OBJECT_KINDS == ["costandard", "standard", "simple", "injective"]
        assert set(SIMPLE_VARIANTS) == {"tau", "tau_prime", "middle_extension"}
        assert CHECK_KINDS == ["purity", "koszulity", "duality", "bbfk"]


class TestSettings:
    """Test suite for environment-driven settings."""

    def test_defaults(self, monkeypatch):
        """Test default values and derived flags."""
        monkeypatch.delenv("KOSZUL_DEGREE_WINDOW", raising=False)
        monkeypatch.delenv("JOBS", raising=False)
        s = Settings(_env_file=None)
        assert s.koszul_degree_window == 0
        assert not s.degree_window_widened
        assert not s.parallel_enabled

    def test_degree_window_from_env(self, monkeypatch):
        """Test that KOSZUL_DEGREE_WINDOW widens the equivariant window."""
        monkeypatch.setenv("KOSZUL_DEGREE_WINDOW", "4")
        s = Settings(_env_file=None)
        assert s.koszul_degree_window == 4
        assert s.degree_window_widened

    def test_negative_window_rejected(self, monkeypatch):
        """Test that a negative window is rejected."""
        monkeypatch.setenv("KOSZUL_DEGREE_WINDOW", "-1")
        with pytest.raises(ValidationError):
            Settings(_env_file=None)

    def test_log_level_normalized(self, monkeypatch):
        """Test that log levels are upper-cased and validated."""
        monkeypatch.setenv("LOG_LEVEL", "debug")
        assert Settings(_env_file=None).log_level == "DEBUG"
        monkeypatch.setenv("LOG_LEVEL", "chatty")
        with pytest.raises(ValidationError):
            Settings(_env_file=None)

    def test_parallel_flag(self, monkeypatch):
        """Test the parallel flag follows jobs."""
        monkeypatch.setenv("JOBS", "3")
        assert Settings(_env_file=None).parallel_enabled
