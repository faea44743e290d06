from __future__ import annotations

import numpy as np
import pytest

from gnp_lab import _kernels as kn

pytestmark = pytest.mark.skipif(not kn.HAVE_NUMBA, reason="numba not importable")


def both(fn, *args):
    saved = kn.backend()
    try:
        kn.set_backend("numpy")
        a = fn(*args)
        kn.set_backend("numba")
        b = fn(*args)
    finally:
        kn.set_backend(saved)
    return a, b


def test_directed_hausdorff_backends_agree():
    rng = np.random.default_rng(1)
    a, b = rng.normal(size=(700, 2)), rng.normal(size=(300, 2))
    (va, ia), (vb, ib) = both(kn.directed_hausdorff, a, b)
    assert va == pytest.approx(vb, rel=1e-14) and ia == ib


def test_cone_margins_backends_agree():
    rng = np.random.default_rng(2)
    xs, ys = rng.normal(size=(80, 2)), rng.normal(size=(200, 2))
    verts = np.array([[0.0, 0.0], [0.3, 0.1], [0.1, 0.4]])
    (ma, ia), (mb, ib) = both(kn.cone_margins, xs, ys, verts, 0.05)
    assert np.allclose(ma, mb, rtol=0, atol=1e-13)
    assert np.array_equal(ia, ib)


def test_points_in_polygon_backends_agree():
    rng = np.random.default_rng(3)
    t = np.linspace(0, 2 * np.pi, 57, endpoint=False)
    poly = np.column_stack([(1 + 0.3 * np.cos(5 * t)) * np.cos(t), (1 + 0.3 * np.cos(5 * t)) * np.sin(t)])
    pts = rng.uniform(-1.5, 1.5, size=(5000, 2))
    a, b = both(kn.points_in_polygon, pts, poly)
    assert np.array_equal(a, b)
    assert a[np.hypot(*pts.T) < 0.6].all() and not a[np.hypot(*pts.T) > 1.35].any()


def test_dp_backends_agree():
    levels = np.linspace(0, 1.5, 40) ** 2
    x = np.linspace(-1, 1, 31)
    mid = 0.5 * (x[1:] + x[:-1])
    lo, hi = -2 * (1 + mid), 2 * (1 - mid)
    (oa, pa), (ob, pb) = both(kn.dp_solve, levels, x[1] - x[0], lo, hi, 1.0, 0, 0)
    assert oa == pytest.approx(ob, rel=1e-12)
    assert np.array_equal(pa, pb)


def test_pair_ratio_backends_agree():
    rng = np.random.default_rng(4)
    c = rng.normal(size=(150, 2))
    phi = c * 1.7 + 0.01 * rng.normal(size=c.shape)
    a, b = both(kn.pair_ratio_bounds, c, phi)
    assert np.allclose(a, b, rtol=1e-13)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kn.set_backend("gpu")
