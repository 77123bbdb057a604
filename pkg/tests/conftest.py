import numpy as np
import pytest

from rpaslab import control, dynamics
from rpaslab.mission import MissionContext, ScenarioConfig, packaged_scenario_path
from rpaslab.params import AircraftParams


@pytest.fixture(scope="session")
def params() -> AircraftParams:
    return AircraftParams.load()


@pytest.fixture(scope="session")
def trim540(params):
    return dynamics.trim(540.0, 4000.0, params)


@pytest.fixture(scope="session")
def controller(params, trim540):
    state, cmd = trim540
    return control.load_controller(params, state, cmd)


@pytest.fixture(scope="session")
def scenario1() -> ScenarioConfig:
    return ScenarioConfig.load(packaged_scenario_path("scenario1"))


@pytest.fixture(scope="session")
def scenario2() -> ScenarioConfig:
    return ScenarioConfig.load(packaged_scenario_path("scenario2"))


@pytest.fixture(scope="session")
def ctx1(scenario1, params) -> MissionContext:
    return MissionContext.prepare(scenario1, params)


@pytest.fixture(scope="session")
def ctx2(scenario2, params) -> MissionContext:
    return MissionContext.prepare(scenario2, params)


@pytest.fixture(scope="session")
def linear_model(params, trim540):
    state, cmd = trim540
    return control.linearize(state, cmd, params)
