import numpy as np
import pytest

from abreu.polytope import Polygon, standard_simplex, unit_square
from abreu.potential import Jet4, canonical_potential, normalize
from abreu.solver import SolveConfig, solve


@pytest.fixture(scope="session")
def square():
    return unit_square()


@pytest.fixture(scope="session")
def simplex():
    return standard_simplex()


@pytest.fixture(scope="session")
def square_gold(square):
    return normalize(canonical_potential(square))


@pytest.fixture(scope="session")
def simplex_gold(simplex):
    return normalize(canonical_potential(simplex))


@pytest.fixture(scope="session")
def pentagon():
    th = 2 * np.pi * np.arange(5) / 5 + 0.3
    v = np.stack([np.cos(th), np.sin(th)], axis=1) * [1.0, 0.8]
    return Polygon(v, [1.0, 1.3, 0.7, 1.1, 0.9], [0.05, -0.02])


@pytest.fixture(scope="session")
def square_from_noise(square):
    """Solve on the square from Bernstein noise of size 0.01 (timed)."""
    import time

    rng = np.random.default_rng(0)
    start = 0.01 * rng.standard_normal((7, 7))
    t0 = time.perf_counter()
    result = solve(square, 4.0, SolveConfig(track_energy=True), start=start)
    return result, time.perf_counter() - t0


def random_convex_jets(n, seed=0):
    """Jets with random positive definite Hessians and random higher terms."""
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n, 2, 2))
    hess = B @ np.swapaxes(B, 1, 2) + 0.2 * np.eye(2)
    return Jet4(rng.uniform(-1, 1, (n, 2)), rng.standard_normal(n), rng.standard_normal((n, 2)),
                hess, rng.standard_normal((n, 4)), rng.standard_normal((n, 5)))


def interior_points(poly, n, seed=0, margin=0.01):
    """n uniformly random points with distance >= margin from the boundary."""
    rng = np.random.default_rng(seed)
    lo, hi = poly.bounding_box
    out = np.empty((0, 2))
    while len(out) < n:
        p = rng.uniform(lo, hi, (4 * n, 2))
        out = np.concatenate([out, p[poly.distance(p) >= margin]])
    return out[:n]


ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def acceptance(request):
    """Record the outcome of one acceptance criterion for the summary."""
    lines = request.config.stash.setdefault(ACCEPTANCE, {})

    def record(number, passed, detail):
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        lines[number] = line
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
