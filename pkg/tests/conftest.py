"""Shared test configuration and fixtures for ricci-lab."""

import pytest
from click.testing import CliRunner

from ricci_lab.config import FlowConfig
from ricci_lab.flow import run_flow
from ricci_lab.geometry import make_round_sphere
from ricci_lab.models import FlowTrajectory, MetricState
from ricci_lab.profiles import round_profile


@pytest.fixture(scope="session")
def sphere_flow() -> FlowTrajectory:
    """Unit S^3 flowed until max|Rm| reaches the default ceiling.

    The flow is exact, so one run is shared by every test that needs a
    singular trajectory with a known extinction time of 1/4.
    """
    return run_flow(make_round_sphere(3, 1.0))


@pytest.fixture(scope="session")
def short_sphere_flow() -> FlowTrajectory:
    """Unit S^3 on [0, 0.1], well before the singularity."""
    return run_flow(make_round_sphere(3, 1.0), FlowConfig(t_max=0.1))


@pytest.fixture
def warped_round() -> MetricState:
    """Unit round S^3 written as a warped profile on 64 intervals."""
    return round_profile(3, 64)


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    """Run the test from an empty directory so no stray config file is found."""
    monkeypatch.chdir(tmp_path)
    return tmp_path
