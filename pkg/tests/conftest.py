"""
Pytest configuration and shared fixtures.
"""
import pytest
import os
import sys

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

PRESET_DIR = os.path.join(os.path.dirname(__file__), '..', 'presets')

# Environment configuration is read at import time
os.environ.setdefault('NVHET_PRESET_DIR', PRESET_DIR)
os.environ.setdefault('NVHET_LOG_LEVEL', 'WARNING')


@pytest.fixture(scope="session", autouse=True)
def setup_test_environment():
    """Set up test environment variables."""
    os.environ.setdefault('NVHET_THREADS', '2')
    yield


@pytest.fixture
def linewidth_params():
    """Ensemble preset with gamma2 from the ODMR linewidth."""
    from src.physics.constants import ensemble_preset
    return ensemble_preset('linewidth')


@pytest.fixture
def nominal_rates():
    """(gamma_p, gamma1, gamma_G) at 0.8 W and 220 nT with the linewidth preset."""
    return 204.0, 102.0, 78.9


@pytest.fixture
def preset_dir():
    return os.path.abspath(PRESET_DIR)
