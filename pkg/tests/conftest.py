import os
import sys

import pytest
from hypothesis import HealthCheck, settings

from fedosov_lab.cli import fixture_path
from fedosov_lab.config import build_problem
from fedosov_lab.fedosov import solve_gamma

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def load(name, **over):
    return build_problem(fixture_path(name), **over)


def solved(name, **over):
    p = load(name, **over)
    return solve_gamma(p.geometry, p.curvature, p.bounds)


@pytest.fixture(scope="session")
def flat():
    return solved("flat-2d")


@pytest.fixture(scope="session")
def curved():
    return solved("curved-2d")


@pytest.fixture(scope="session")
def perturbed():
    return solved("perturbed-omega")


@pytest.fixture(scope="session")
def shear():
    return solved("shear-2d")


@pytest.fixture(scope="session")
def sp2_problem():
    return load("sp2-momentum")


@pytest.fixture(scope="session")
def lagrangian_problem():
    return load("lagrangian-x2")
