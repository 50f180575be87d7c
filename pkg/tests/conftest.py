import numpy as np
import pytest

from src.config import RunConfig
from src.discrete_line import build_grid
from src.evolution import prepare_run, simulate
from src.potential import PotentialSpec

BASE_CONFIG = {
    "domain": {"L": 30.0, "n": 299},
    "time": {"dt": 0.02, "T": 5.0, "sample_every": 5},
    "potential": {"family": "algebraic", "V0": 0.5, "alpha": 1.0},
    "data": {"family": "bump", "amplitude": 1.0, "radius": 5.0},
}


def make_config(**sections) -> RunConfig:
    tree = {name: dict(values) for name, values in BASE_CONFIG.items()}
    for name, values in sections.items():
        tree.setdefault(name, {}).update(values)
    return RunConfig.model_validate(tree)


@pytest.fixture
def config_factory():
    """Builds a coarse run configuration with some sections overridden."""
    return make_config


@pytest.fixture
def grid():
    return build_grid(30.0, 299)


@pytest.fixture
def small_grid():
    return build_grid(5.0, 64)


@pytest.fixture
def periodic_grid():
    return build_grid(np.pi, 64, "periodic")


@pytest.fixture
def algebraic():
    return PotentialSpec(family="algebraic", V0=0.5, alpha=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def coarse_run():
    """A short bump run on h = 0.1 with the antiderivative tracked, shared by the ledger tests."""
    config = make_config(
        domain={"L": 30.0, "n": 599},
        time={"dt": 0.01, "T": 5.0, "sample_every": 10},
        flags={"antiderivative_check": True},
    )
    setup = prepare_run(config)
    return config, setup, simulate(config, setup)

