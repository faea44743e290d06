from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gnp_lab import convex as cx
from gnp_lab import domain as dm
from gnp_lab import gnp
from gnp_lab.errors import BoundaryNotCovered, NotGraph, NotStarPolar, PatchOverlap, SingularMap

ORIGIN = (0.0, 0.0)


def rotation(deg: float) -> np.ndarray:
    a = np.deg2rad(deg)
    return np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])


# ------------------------------------------------------------------ C-GNP

def test_cusp_chain_against_axis_segment():
    rep = gnp.check_c_gnp(dm.cusp_chain(6), cx.Segment((0, 0), (1, 0)))
    assert rep.passed and rep.worst_margin >= -1e-9
    assert rep.condition_breakdown["2"] is None
    assert rep.skipped_nonsmooth > 0


def test_disk_against_inner_ball():
    rep = gnp.check_c_gnp(dm.star_circle(1.0), cx.Ball(ORIGIN, 0.5))
    assert rep.passed
    assert rep.condition_margins["4"] == pytest.approx(0.5, abs=1e-12)


def test_far_disk_fails_with_closed_form_margin():
    omega = dm.BallUnion([((3, 0), 1)])
    C = cx.Ball(ORIGIN, 0.1)
    rep = gnp.check_c_gnp(omega, C)
    assert not rep.passed and rep.witness is not None
    assert rep.condition_breakdown["1"] is False and rep.condition_breakdown["4"] is False
    # oracle: inward ray from (3 + cos t, sin t) toward (3, 0), distance to the origin in closed form
    t = np.linspace(0, 2 * np.pi, 100001)
    x = np.column_stack([3 + np.cos(t), np.sin(t)])
    d = -np.column_stack([np.cos(t), np.sin(t)])
    s = np.maximum(-(x * d).sum(axis=1), 0.0)
    dist = np.hypot(*(x + s[:, None] * d).T)
    assert rep.condition_margins["4"] == pytest.approx(0.1 - dist.max(), abs=1e-6)


@given(st.floats(0.05, 1.0), st.floats(0.0, 2 * np.pi), st.floats(0.0, 0.95))
@settings(max_examples=25)
def test_balls_centred_in_C_pass(r_c, angle, frac):
    C = cx.Ball(ORIGIN, r_c)
    center = frac * r_c * np.array([np.cos(angle), np.sin(angle)])
    omega = dm.BallUnion([(center, r_c * 2.5)])
    assert gnp.check_c_gnp(omega, C, 256).passed


# ------------------------------------------------------------------- C-SP

def test_sp_disk_passes():
    assert gnp.check_c_sp(dm.star_circle(1.0), cx.Ball(ORIGIN, 0.5)).passed


def test_sp_far_disk_matches_pair_scan():
    omega = dm.BallUnion([((3, 0), 1)])
    C = cx.Ball(ORIGIN, 0.1)
    rep = gnp.check_c_sp(omega, C)
    assert not rep.passed and rep.witness is not None
    # exhaustive scan over 10^3 boundary x 10^3 interior points as the oracle
    rng = np.random.default_rng(3)
    t = np.linspace(0, 2 * np.pi, 1000, endpoint=False)
    xs = np.column_stack([3 + np.cos(t), np.sin(t)])
    rr = np.sqrt(rng.uniform(0, 1, 1000)) * 0.999
    a = rng.uniform(0, 2 * np.pi, 1000)
    ys = np.column_stack([3 + rr * np.cos(a), rr * np.sin(a)])
    u = ys[None, :, :] - xs[:, None, :]
    u /= np.hypot(u[..., 0], u[..., 1])[..., None]
    sup = -(u * xs[:, None, :]).sum(-1) + 0.1
    assert sup.min() < 0
    assert rep.worst_margin <= sup.min() + 1e-2


# -------------------------------------------------------------- eps ball

def test_eps_constant_radius():
    rep = gnp.check_eps_ball_gnp(dm.star_circle(1.0), 0.01)
    assert rep.passed and rep.worst_margin == pytest.approx(1e-4, abs=1e-15)


@pytest.mark.parametrize("G, eps", [
    (lambda t: 1 + 0.3 * np.cos(t), 0.1),
    (lambda t: 1 + 0.001 * np.sin(t), 0.05),
])
def test_eps_matches_dense_grid(G, eps):
    th = np.linspace(0, 2 * np.pi, 100000, endpoint=False)
    g = G(th)
    h = 1e-6
    gp = (G(th + h) - G(th - h)) / (2 * h)
    lhs = ((g * gp) ** 2 / (g**2 + gp**2)).max()
    rep = gnp.check_eps_ball_gnp(dm.StarPolar.from_function(G), eps)
    assert rep.passed == (eps**2 - lhs >= 0)
    assert rep.worst_margin == pytest.approx(eps**2 - lhs, abs=1e-8)


def test_eps_requires_star_polar():
    with pytest.raises(NotStarPolar):
        gnp.check_eps_ball_gnp(dm.cusp_chain(2), 0.1)


@given(st.floats(0.0, 0.3), st.integers(1, 4), st.floats(0.01, 0.5), st.floats(0.0, 0.3))
@settings(max_examples=40)
def test_eps_monotone(amp, k, eps, extra):
    omega = dm.StarPolar.from_function(lambda t: 1 + amp * np.cos(k * t))
    if omega.dense_extrema()[0] <= eps + extra:
        return
    if gnp.check_eps_ball_gnp(omega, eps).passed:
        assert gnp.check_eps_ball_gnp(omega, eps + extra).passed


@given(st.floats(0.0, 0.2), st.integers(1, 3), st.floats(0.02, 0.4))
@settings(max_examples=20)
def test_eps_pass_implies_ray_condition(amp, k, eps):
    omega = dm.StarPolar.from_function(lambda t: 1 + amp * np.sin(k * t))
    if omega.dense_extrema()[0] <= eps:
        return
    if gnp.check_eps_ball_gnp(omega, eps, tol=1e-9).passed:
        rep = gnp.check_c_gnp(omega, cx.Ball(omega.center, eps), 512, tol=1e-9)
        assert rep.condition_breakdown["4"]


# ------------------------------------------------------------------ graphs

def test_graph_saturating_circle():
    x0, x1 = 0.02, 1.98
    omega = dm.Graph.from_function(lambda x: np.sqrt(1 - (x - 1) ** 2),
                                   lambda x: -(x - 1) / np.sqrt(1 - (x - 1) ** 2), x0, x1, 401)
    x, foot = gnp.graph_feet(omega)
    assert np.max(np.abs(foot - 1)) <= 1e-12


def test_graph_constant_profile():
    omega = dm.Graph.from_function(lambda x: np.full_like(x, 0.5), x_lo=-1, x_hi=1)
    x, foot = gnp.graph_feet(omega)
    assert np.allclose(foot, x)
    assert gnp.check_graph_gnp(omega).passed


def test_comb_feet_follow_profile_formula():
    comb = dm.triangle_comb(10)
    x, foot = gnp.graph_feet(comb, 4096)
    h = 1e-9
    g = dm.comb_profile(x, 10)
    gp = (dm.comb_profile(x + h, 10) - dm.comb_profile(x - h, 10)) / (2 * h)
    assert np.allclose(foot, x + g * gp, atol=1e-6)
    rep = gnp.check_graph_gnp(comb, segment=(0.0, 1.0), n=4096)
    assert rep.details["foot_min"] == pytest.approx(foot.min())


def test_graph_requires_graph():
    with pytest.raises(NotGraph):
        gnp.check_graph_gnp(dm.star_circle(1.0))


# ------------------------------------------------------------- pair class

def test_pair_far_disks():
    pair = dm.DisjointPair(dm.BallUnion([(ORIGIN, 1)]), dm.BallUnion([((4, 0), 1)]), 1.0)
    rep = gnp.check_pair_class(pair, cx.Ball(ORIGIN, 0.1), cx.Ball((4, 0), 0.1))
    assert rep.passed and rep.details["separation"] == pytest.approx(2.0)


@pytest.mark.parametrize("delta, ok", [(0.5, False), (0.1, True)])
def test_shrinking_pair(delta, ok):
    pair = dm.shrinking_pair(10)
    rep = gnp.check_pair_class(pair, cx.Ball(ORIGIN, 0.1), cx.Ball((2, 0), 0.1), delta=delta)
    assert rep.passed is ok
    assert rep.details["separation"] == pytest.approx(0.2, abs=1e-12)
    rep = gnp.check_pair_class(pair, cx.Ball(ORIGIN, 0.1), cx.Ball((2, 0), 0.1), mode="projection", delta=delta)
    assert rep.passed is ok


# ------------------------------------------------------------ local class

def _two_small_disks():
    # radius 0.6 so that each patch body of radius 0.5 sits inside its disk
    return dm.BallUnion([(ORIGIN, 0.6), ((3, 0), 0.6)])


def test_local_class_two_disks():
    patches = [(ORIGIN, 1.0, cx.Ball(ORIGIN, 0.5)), ((3, 0), 1.0, cx.Ball((3, 0), 0.5))]
    assert gnp.check_local_class(_two_small_disks(), patches).passed
    assert gnp.check_local_class(_two_small_disks(), patches, mode="nc").passed


def test_local_class_uncovered_and_overlap():
    small = [(ORIGIN, 0.3, cx.Ball(ORIGIN, 0.15)), ((3, 0), 0.3, cx.Ball((3, 0), 0.15))]
    with pytest.raises(BoundaryNotCovered):
        gnp.check_local_class(_two_small_disks(), small)
    with pytest.raises(PatchOverlap):
        gnp.check_local_class(_two_small_disks(), [(ORIGIN, 2.0, cx.Ball(ORIGIN, 1)), ((3, 0), 2.0, cx.Ball((3, 0), 1))])


def test_local_class_single_patch_reduces_to_global():
    omega = dm.star_circle(1.0)
    loc = gnp.check_local_class(omega, [(ORIGIN, 2.0, cx.Ball(ORIGIN, 1.0))])
    glob = gnp.check_c_gnp(omega, cx.Ball(ORIGIN, 1.0))
    assert loc.passed == glob.passed


# -------------------------------------------------------------- affine maps

def test_affine_identity_and_rotation():
    omega, C = dm.star_circle(1.0), cx.Ball(ORIGIN, 0.5)
    base = gnp.check_c_gnp(omega, C)
    same = gnp.affine_map_check(omega, C, np.eye(2), (0, 0))
    assert same.passed == base.passed and same.worst_margin == pytest.approx(base.worst_margin, abs=1e-12)
    rot = gnp.affine_map_check(omega, C, rotation(30), (0.4, -1.1))
    assert rot.passed and rot.worst_margin == pytest.approx(base.worst_margin, abs=1e-9)


def test_affine_anisotropic_rerun():
    rep = gnp.affine_map_check(dm.star_circle(1.0), cx.Ball(ORIGIN, 0.5), np.diag([2.0, 1.0]), (0, 0))
    assert rep.details["pre_pass"] is True
    assert rep.details["mapped_body"] == "polytope"


def test_affine_singular():
    with pytest.raises(SingularMap):
        gnp.affine_map_check(dm.star_circle(1.0), cx.Ball(ORIGIN, 0.5), [[1, 2], [2, 4]], (0, 0))


@given(st.floats(0, 360), st.floats(-3, 3), st.floats(-3, 3))
@settings(max_examples=15)
def test_isometry_invariance(deg, tx, ty):
    omega = dm.StarPolar.from_function(lambda t: 1 + 0.1 * np.cos(2 * t))
    C = cx.Ball(ORIGIN, 0.3)
    M = rotation(deg)
    base = gnp.check_c_gnp(omega, C, 256)
    moved = gnp.check_c_gnp(dm.Mapped(omega, M, (tx, ty)), cx.transform(C, M, (tx, ty)), 256)
    assert moved.passed == base.passed
    assert moved.condition_margins["4"] == pytest.approx(base.condition_margins["4"], abs=1e-9)
    sp0 = gnp.check_c_sp(omega, C, 128, 256)
    sp1 = gnp.check_c_sp(dm.Mapped(omega, M, (tx, ty)), cx.transform(C, M, (tx, ty)), 128, 256)
    assert sp0.passed == sp1.passed
