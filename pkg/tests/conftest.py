import math

import pytest

from heatcount import (
    generate_constant_density,
    generate_interval,
    generate_rectangle,
    generate_torus,
)


@pytest.fixture(scope="session")
def interval_pi_100():
    return generate_interval(math.pi, 100)


@pytest.fixture(scope="session")
def interval_pi_200():
    return generate_interval(math.pi, 200)


@pytest.fixture(scope="session")
def interval_pi_10k():
    return generate_interval(math.pi, 10_000)


@pytest.fixture(scope="session")
def const_density_200():
    return generate_constant_density(1.0, 200)


@pytest.fixture(scope="session")
def const_density_10k():
    return generate_constant_density(1.0, 10_000)


@pytest.fixture(scope="session")
def rectangle_pi_2000():
    return generate_rectangle(math.pi, math.pi, 2000.0)


@pytest.fixture(scope="session")
def torus_400():
    return generate_torus(400.0)
