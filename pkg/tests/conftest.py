from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from gnp_lab import convex as cx

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

coord = st.floats(-3.0, 3.0, allow_nan=False, allow_infinity=False)
point = st.tuples(coord, coord)


@st.composite
def convex_bodies(draw, box: float = 3.0):
    c = st.floats(-box, box, allow_nan=False, allow_infinity=False)
    kind = draw(st.sampled_from(["ball", "segment", "polytope"]))
    if kind == "ball":
        return cx.Ball((draw(c), draw(c)), draw(st.floats(0.0, box)))
    if kind == "segment":
        a = (draw(c), draw(c))
        b = (draw(c), draw(c))
        if np.hypot(a[0] - b[0], a[1] - b[1]) < 1e-3:
            b = (a[0] + 1.0, a[1])
        return cx.Segment(a, b)
    pts = np.array(draw(st.lists(st.tuples(c, c), min_size=3, max_size=8)))
    try:
        return cx.hull(pts)
    except Exception:
        return cx.regular_polygon((pts[0, 0], pts[0, 1]), 1.0, 5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "SUMMARY", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
