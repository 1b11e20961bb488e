import numpy as np
import pytest

from nehari2d import (
    GridSpec,
    ProblemParams,
    ScalarField,
    SolverOptions,
    StatePair,
    build_grid,
    example_family,
    identity_family,
)


@pytest.fixture(scope="session")
def grid15():
    return build_grid(GridSpec(15, 15, 1.0, 1.0))


@pytest.fixture(scope="session")
def grid31():
    return build_grid(GridSpec(31, 31, 1.0, 1.0))


@pytest.fixture(scope="session")
def grid63():
    return build_grid(GridSpec(63, 63, 1.0, 1.0))


@pytest.fixture(scope="session")
def identity():
    return identity_family(1.0)


@pytest.fixture(scope="session")
def example1():
    return example_family(1.0)


@pytest.fixture
def params_p4():
    """p = 4, gamma = 1, decoupled, zero linear terms."""
    return ProblemParams(0.0, 0.0, 0.0, 4.0, 1.0)


def random_state(grid, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    return StatePair(
        ScalarField(scale * rng.standard_normal(grid.shape), grid.spec),
        ScalarField(scale * rng.standard_normal(grid.shape), grid.spec),
    )


def segregated_random_state(grid, seed=0):
    """Random positive bumps in opposite halves; projectable for beta < 0."""
    rng = np.random.default_rng(seed)
    s = grid.spec
    X, Y = grid.node_mesh()

    def bump(cx, cy, w, amp):
        return amp * np.exp(-((X - cx) ** 2 + (Y - cy) ** 2) / (2.0 * w**2))

    w1 = s.lx * rng.uniform(0.06, 0.14)
    w2 = s.lx * rng.uniform(0.06, 0.14)
    u1 = bump(s.lx * rng.uniform(0.15, 0.3), s.ly * rng.uniform(0.3, 0.7), w1,
              rng.uniform(0.5, 2.0))
    u2 = bump(s.lx * rng.uniform(0.7, 0.85), s.ly * rng.uniform(0.3, 0.7), w2,
              rng.uniform(0.5, 2.0))
    return StatePair(ScalarField(u1, s), ScalarField(u2, s))


@pytest.fixture(scope="session")
def quick_opts():
    return SolverOptions(tol=1e-8, n_restarts=1, max_iter=1500, seed=0)


@pytest.fixture(scope="session")
def scalar_cache():
    """Session cache of scalar ground-state solves keyed by the caller."""
    return {}
