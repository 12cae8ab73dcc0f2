"""Shared fixtures: the bundled example and small analytic two-patch geometries."""
import pytest

from asg1_iga.cli_io import example_path, parse_geometry
from asg1_iga.gluing import TwoPatchGeometry, refine_geometry, solve_asg1_gluing, compute_alphabar_betabar
from asg1_iga.spline_core import make_uniform_regular_knots


def parallelogram_L(u, v):
    return (-u * (2.0 + v), v)


def parallelogram_R(u, v):
    return (u * (3.0 - v), v)


def square_L(u, v):
    return (-u, v)


def square_R(u, v):
    return (u, v)


def one_root_L(u, v):
    # beta = (1 - 2v) / 2 vanishes at v = 1/2
    return (-u * (2.0 + v), v + u * v / 4.0)


def one_root_R(u, v):
    return (u * (3.0 - v), v + u * (v - 1.0) / 4.0)


def two_roots_L(u, v):
    # beta is proportional to 9v^2 - 9v + 2 with roots 1/3 and 2/3
    return (-u * (2.0 + v), v - 28.0 * u * v / 45.0)


def two_roots_R(u, v):
    return (u * (3.0 - v), v + u * (1.0 / 9.0 + 17.0 * v / 45.0))


MAPS = {
    "beta0_linear": (parallelogram_L, parallelogram_R),
    "beta0_constant": (square_L, square_R),
    "one_root": (one_root_L, one_root_R),
    "two_roots": (two_roots_L, two_roots_R),
}


def make_geometry(name: str, p: int = 3, r: int = 1, k: int = 0) -> TwoPatchGeometry:
    """Interpolate one of the analytic maps in S(T^{p,r}_k)."""
    map_L, map_R = MAPS[name]
    space = make_uniform_regular_knots(p, r, k)
    return TwoPatchGeometry.from_maps(map_L, map_R, space, r)


def make_problem(name: str, p: int = 3, r: int = 1, k: int = 0):
    """Geometry and solved gluing data for an analytic map."""
    G = make_geometry(name, p, r, k)
    return G, solve_asg1_gluing(*compute_alphabar_betabar(G), G.space.breakpoints)


@pytest.fixture
def example_file():
    """Path of the bundled bicubic example."""
    return example_path()


@pytest.fixture
def example():
    """Bicubic example geometry (k = 0) with its supplied gluing data."""
    return parse_geometry(example_path())


@pytest.fixture
def example_k2(example):
    """Bicubic example refined to k = 2."""
    G, gluing = example
    return refine_geometry(G, 2), gluing
