import pytest

from isscert.api import ACTUATOR_LIBRARY, BASE, PROCESS_LIBRARY, default_experiment
from isscert.data import run_experiment
from isscert.sdp import SolverConfig


@pytest.fixture
def experiment(tmpdir):
    return default_experiment(output_dir=str(tmpdir.join('out')), seed=1)


@pytest.fixture
def system(experiment):
    return experiment.system


@pytest.fixture
def base_library(experiment):
    return experiment.library(BASE)


@pytest.fixture
def actuator_library(experiment):
    return experiment.library(ACTUATOR_LIBRARY)


@pytest.fixture
def process_library(experiment):
    return experiment.library(PROCESS_LIBRARY)


@pytest.fixture
def dataset(experiment):
    return run_experiment(experiment.system, experiment.experiments, experiment.delta,
                          experiment.samples, experiment.horizon, experiment.step,
                          experiment.seed, experiment.noise)


@pytest.fixture
def solver_config():
    return SolverConfig()
