import pytest

from contactgeo.builtins import builtin_structure
from contactgeo.symexpr import Chart, SamplingPlan

PLAN = SamplingPlan()


@pytest.fixture(scope="session")
def plan():
    return PLAN


@pytest.fixture(scope="session")
def corpus():
    """Build-once access to the named structures."""
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = builtin_structure(name, PLAN)
        return cache[name]

    return get


@pytest.fixture()
def chart3():
    return Chart(("x", "y", "z"))
