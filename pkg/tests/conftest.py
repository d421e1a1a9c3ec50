import pytest
from hypothesis import HealthCheck, settings

from photon_mux.config import load_config, to_experiment_config

settings.register_profile(
    "suite",
    deadline=None,
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def preset_cfgs():
    """Calibrated experiment configs for the three operating points."""
    return {
        name: to_experiment_config(load_config(name))
        for name in ("mu018", "mu005", "mu0004")
    }


@pytest.fixture(scope="session")
def cfg_mu018(preset_cfgs):
    return preset_cfgs["mu018"]


@pytest.fixture(scope="session")
def cfg_mu005(preset_cfgs):
    return preset_cfgs["mu005"]


@pytest.fixture(scope="session")
def cfg_mu0004(preset_cfgs):
    return preset_cfgs["mu0004"]
