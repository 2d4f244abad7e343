"""Shared fixtures: the bundled scenario and the two reference runs.

The closed-loop runs are session-scoped because they cost a couple of
seconds each and several test modules assert against the same trajectories.
Each run fixture returns (trajectory, report, wall_seconds) so the runtime
gates can reuse them without re-integrating.
"""

import time

import pytest

from icufunnel import (
    CapacityPolicy,
    ControllerParams,
    EpidemicParams,
    InitialState,
    Scenario,
    SimConfig,
    derive_constants,
    simulate,
)
from icufunnel.cli import bundled_scenario_path, load_scenario_file


@pytest.fixture(scope="session")
def sfile():
    return load_scenario_file(bundled_scenario_path())


@pytest.fixture(scope="session")
def scenario(sfile):
    return sfile.scenario


@pytest.fixture(scope="session")
def dc(scenario):
    return derive_constants(scenario)


@pytest.fixture(scope="session")
def cp8(dc):
    # reference pair: off at 8, on at 44 - 10 = 34
    return ControllerParams(eps_plus=10.0, eps_minus=8.0, phi_plus=dc.phi_plus)


@pytest.fixture(scope="session")
def cp20(dc):
    # wider off threshold, same on threshold
    return ControllerParams(eps_plus=10.0, eps_minus=20.0, phi_plus=dc.phi_plus)


def _timed_run(scenario, cp, cfg):
    t0 = time.perf_counter()
    traj, report = simulate(scenario, cp, cfg)
    return traj, report, time.perf_counter() - t0


@pytest.fixture(scope="session")
def run8(scenario, cp8):
    return _timed_run(scenario, cp8, SimConfig())


@pytest.fixture(scope="session")
def run20(scenario, cp20):
    return _timed_run(scenario, cp20, SimConfig())


@pytest.fixture(scope="session")
def run_open0(scenario):
    return _timed_run(scenario, None, SimConfig(open_loop_u=0))


@pytest.fixture(scope="session")
def interior_scenario():
    # strictly inside every admissibility inequality, unlike the bundled
    # city which touches two boundaries exactly
    return Scenario(
        params=EpidemicParams(
            beta_A=0.37, beta_S=0.43, alpha_A=0.095, alpha_S=0.085,
            p=0.02, rho=0.15, gamma_0=1.0, gamma_1=1.0, psi_bar=0.9,
            gamma_K=1.0,
        ),
        init=InitialState(S0=49900.0, IA0=90.0, IS0=1.5, R0=50000.0,
                          D0=0.0, psi0=1.0),
        capacity=CapacityPolicy(n_icu=40.0, xi=0.1),
    )
