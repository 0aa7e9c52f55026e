import numpy as np
import pytest

import discflux as dx


@pytest.fixture(scope="session")
def burgers():
    return dx.get_flux("burgers-like")


@pytest.fixture(scope="session")
def demo_cross():
    return dx.get_flux("demo-cross")


@pytest.fixture(scope="session")
def demo_swapped():
    return dx.get_flux("demo-swapped")


@pytest.fixture(scope="session")
def demo_connection(burgers):
    conn = dx.Connection(0.75, 0.25)
    return conn, dx.build_connection_transform(burgers, conn)


def random_step_profile(rng, lo=0.0, hi=1.0, span=2.0):
    """Random piecewise-constant initial data with a handful of jumps."""
    pieces = int(rng.integers(6, 14))
    edges = np.sort(rng.uniform(-span, span, size=pieces - 1))
    vals = rng.uniform(lo, hi, size=pieces)

    def u0(x):
        return vals[np.searchsorted(edges, np.asarray(x))]

    return u0
