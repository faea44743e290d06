from __future__ import annotations

import math

import numpy as np
import pytest

from gnp_lab import convex as cx
from gnp_lab import potential as pt
from gnp_lab.errors import PreconditionFailed, SingularPair, SingularPoint, SupportOutsideBall


def radial_oracle(r, rho, R, N):
    """Two-region radial solution of -Laplace U = 1 on |x| < rho, 0 outside, U(R) = 0.

    Inside: U = A - r^2 / (2N). Outside: U = B (ln(R/r)) in the plane or
    B (1/r - 1/R) in space. Matching value and flux at rho fixes A and B.
    """
    r = np.asarray(r, float)
    if N == 2:
        B = rho**2 / 2
        A = rho**2 / 4 + B * math.log(R / rho)
        out = B * np.log(R / np.maximum(r, 1e-300))
    else:
        B = rho**3 / 3
        A = rho**2 / 6 + B * (1 / rho - 1 / R)
        out = B * (1 / np.maximum(r, 1e-300) - 1 / R)
    return np.where(r <= rho, A - r**2 / (2 * N), out)


# ------------------------------------------------------ fundamental solution

def test_fundamental_examples():
    assert pt.fundamental_solution(2, (1.0, 0.0)) == 0.0
    assert pt.fundamental_solution(2, (math.e, 0.0)) == pytest.approx(-1 / (2 * math.pi))
    assert pt.fundamental_solution(3, (0.0, 1.0, 0.0)) == pytest.approx(1 / (4 * math.pi))
    with pytest.raises(SingularPoint):
        pt.fundamental_solution(2, (0.0, 0.0))


@pytest.mark.parametrize("N", [2, 3])
def test_fundamental_is_harmonic_with_unit_flux(N):
    rng = np.random.default_rng(N)
    h = 1e-3
    for _ in range(20):
        x = rng.normal(size=N)
        x *= rng.uniform(0.5, 2.0) / np.linalg.norm(x)
        lap = sum(pt.fundamental_solution(N, x + h * e) + pt.fundamental_solution(N, x - h * e)
                  - 2 * pt.fundamental_solution(N, x) for e in np.eye(N)) / h**2
        assert abs(lap) < 1e-5
    # outward flux of grad E through the unit sphere equals -1 (so -Laplace E = delta)
    dr = (pt.fundamental_solution(N, np.r_[1 + h, np.zeros(N - 1)])
          - pt.fundamental_solution(N, np.r_[1 - h, np.zeros(N - 1)])) / (2 * h)
    area = 2 * math.pi if N == 2 else 4 * math.pi
    assert dr * area == pytest.approx(-1.0, rel=1e-5)


# ----------------------------------------------------------------- Green

def test_green_symmetry_on_random_pairs():
    rng = np.random.default_rng(0)
    R = 1.7
    for N in (2, 3):
        x = rng.normal(size=(1000, N))
        y = rng.normal(size=(1000, N))
        x *= (R * rng.uniform(0, 1, 1000) ** (1 / N) / np.linalg.norm(x, axis=1))[:, None]
        y *= (R * rng.uniform(0, 1, 1000) ** (1 / N) / np.linalg.norm(y, axis=1))[:, None]
        a = pt.green_many(R, x, y, N)
        b = pt.green_many(R, y, x, N)
        assert np.max(np.abs(a - b)) <= 1e-12
        assert np.all(a > 0)


def test_green_example_value():
    g = pt.green_disk(1.0, (0.5, 0.0), (-0.5, 0.0))
    assert g == pytest.approx(math.log(1.25) / (2 * math.pi), rel=1e-14)


def test_green_at_centre_source():
    R, x = 2.0, np.array([0.3, -0.4, 0.5])
    assert pt.green_disk(R, x, np.zeros(3), 3) == pytest.approx(1 / (4 * math.pi * np.linalg.norm(x)) - 1 / (4 * math.pi * R))
    assert pt.green_disk(R, x[:2], np.zeros(2)) == pytest.approx(math.log(R / np.linalg.norm(x[:2])) / (2 * math.pi))


def test_green_vanishes_at_boundary():
    y = np.array([0.2, -0.3])
    for t in (0.9, 0.99, 0.999999):
        for ang in np.linspace(0, 2 * np.pi, 7):
            x = t * np.array([np.cos(ang), np.sin(ang)])
            g = pt.green_disk(1.0, x, y)
            assert g >= 0
    x = 0.999999 * np.array([1.0, 0.0])
    assert pt.green_disk(1.0, x, y) < 1e-5


def test_green_errors():
    with pytest.raises(SingularPair):
        pt.green_disk(1.0, (0.1, 0.1), (0.1, 0.1))
    with pytest.raises(PreconditionFailed):
        pt.green_disk(1.0, (1.5, 0.0), (0.1, 0.1))


# ------------------------------------------------------------ densities

def test_density_weights_reproduce_area():
    sq = cx.Polytope([(-0.5, -0.5), (0.5, -0.5), (0.5, 0.5), (-0.5, 0.5)])
    assert pt.make_density(sq).weights.sum() == pytest.approx(1.0, rel=1e-12)
    disk = pt.make_density(cx.Ball((0.1, 0.2), 0.3))
    assert disk.weights.sum() == pytest.approx(math.pi * 0.09, rel=1e-12)
    ball = pt.make_density(cx.Ball((0, 0), 0.5), dim=3)
    assert ball.weights.sum() == pytest.approx(4 / 3 * math.pi * 0.125, rel=1e-12)


def test_density_parsing():
    assert pt.parse_f("const:2")(np.zeros((3, 2))).tolist() == [2.0, 2.0, 2.0]
    assert pt.parse_f("radial:1,2")(np.array([[1.0, 1.0]]))[0] == 5.0
    for bad in ("const:-1", "radial:1", "wave:3"):
        with pytest.raises(PreconditionFailed):
            pt.parse_f(bad)
    with pytest.raises(PreconditionFailed):
        pt.make_density(cx.Segment((0, 0), (1, 0)))


# --------------------------------------------------------------- solver

def test_radial_solution_matches_oracle_formula():
    r = np.linspace(0, 2, 50)
    for N in (2, 3):
        assert np.allclose(pt.radial_indicator_solution(r, 0.5, 2.0, N), radial_oracle(r, 0.5, 2.0, N), atol=1e-14)


@pytest.mark.parametrize("N, R", [(2, 1.0), (3, 1.0), (2, 10.0)])
def test_indicator_source_matches_radial_oracle(N, R):
    rho = 0.4
    f = pt.make_density(cx.Ball((0, 0), rho), 1.0, dim=N)
    radii = np.array([0.0, 0.2, 0.4, 0.6, 0.9]) * R if R > 1 else np.array([0.0, 0.2, 0.4, 0.6, 0.9])
    pts = np.zeros((radii.size, N))
    pts[:, 0] = radii
    got = pt.solve_U_R(R, f, pts)
    want = radial_oracle(radii, rho, R, N)
    assert np.max(np.abs(got - want) / np.abs(want)) <= 0.01


def test_solution_vanishes_near_sphere():
    R = 1.0
    for f in (pt.make_density(cx.Ball((0.1, 0.0), 0.3), "radial:1,2"),
              pt.make_density(cx.regular_polygon((0, 0.1), 0.4, 6), 1.0)):
        ang = np.linspace(0, 2 * np.pi, 64, endpoint=False)
        edge = (1 - 1e-3) * R * np.column_stack([np.cos(ang), np.sin(ang)])
        inner = np.column_stack([np.linspace(-0.5, 0.5, 21), np.zeros(21)])
        assert np.max(np.abs(pt.solve_U_R(R, f, edge))) <= 0.01 * np.max(pt.solve_U_R(R, f, inner))


def test_discrete_laplacian_residual():
    # the stencil width balances truncation error against amplified quadrature error
    R, rho, h = 1.0, 0.3, 2e-2
    f = pt.make_density(cx.regular_polygon((0, 0), rho, 5), 1.0)
    for x0, expected in (((0.6, 0.1), 0.0), ((0.0, 0.05), -1.0)):
        x0 = np.array(x0)
        stencil = np.array([x0, x0 + (h, 0), x0 - (h, 0), x0 + (0, h), x0 - (0, h)])
        U = pt.solve_U_R(R, f, stencil)
        lap = (U[1:].sum() - 4 * U[0]) / h**2
        assert lap == pytest.approx(expected, abs=0.02)


def test_monotone_in_radius():
    f = pt.make_density(cx.Ball((0.2, 0.0), 0.3), "radial:1,1")
    pts = np.array([[0.0, 0.0], [0.3, 0.2], [-0.4, 0.1]])
    vals = [pt.solve_U_R(R, f, pts) for R in (0.8, 1.0, 2.0, 5.0)]
    assert all(np.all(b >= a) for a, b in zip(vals, vals[1:]))


def test_support_outside_ball():
    f = pt.make_density(cx.Ball((0.8, 0.0), 0.5))
    with pytest.raises(SupportOutsideBall):
        pt.solve_U_R(1.0, f, [[0.0, 0.0]])


# ----------------------------------------------------------------- scan

def test_scan_exponent_and_volume_ratio():
    f = pt.make_density(cx.Ball((0, 0), 0.2), 1.0, n=32)
    rep = pt.j_bound_scan([10, 20, 40, 80], f)
    assert rep.exponent_volume == pytest.approx(2.0, rel=0.05)
    assert rep.exponent_bound == pytest.approx(2.0, rel=0.05)
    assert all(row.volume_ratio == pytest.approx(math.pi, rel=1e-3) for row in rep.rows)


def test_scan_cone_family_positive():
    f = pt.make_density(cx.Ball((0, 0), 0.2), 1.0, n=32)
    Rs = [10, 20, 40]
    samples = [(pt.cone_like(R, R / 2), pt.measured_area(pt.cone_like(R, R / 2))) for R in Rs]
    rep = pt.j_bound_scan(Rs, f, volume_samples=samples)
    assert min(row.volume_ratio for row in rep.rows) > 0


def test_scan_requires_increasing_radii():
    f = pt.make_density(cx.Ball((0, 0), 0.2), 1.0, n=16)
    with pytest.raises(PreconditionFailed):
        pt.j_bound_scan([20, 10], f)
