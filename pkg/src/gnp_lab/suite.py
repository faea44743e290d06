"""Named bundles of checks with fixed seeds, shared by the CLI and the acceptance tests."""
from __future__ import annotations

import math

import numpy as np

from . import convex as cx
from . import domain as dm
from . import gnp, metric, potential, thickness, varopt
from ._config import resolve_tol

DEFAULT_SEED = 7
SUITES = ("gallery", "equivalence", "counterexamples", "full")


def _item(name: str, passed: bool, expected: str, **data) -> dict:
    return {"name": name, "pass": bool(passed), "expected": expected, **data}


# ------------------------------------------------------------------ gallery

def gallery_items(seed: int = DEFAULT_SEED) -> list[dict]:
    items = []
    r = gnp.check_c_gnp(dm.cusp_chain(6), cx.Segment((0.0, 0.0), (1.0, 0.0)))
    items.append(_item("cusp_chain_gnp", r.passed and r.worst_margin >= -1e-9, "pass", margin=r.worst_margin))

    inv = dm.Involute()
    sp = gnp.check_c_sp(inv, cx.Ball((0.0, 0.0), 1.0))
    g = gnp.check_c_gnp(inv, cx.Ball((0.0, 0.0), 1.0))
    fails = int(g.details.get("failing_normals", 0))
    items.append(_item("involute_sp", sp.passed and fails == 0, "pass", sp_margin=sp.worst_margin,
                       cond4_margin=g.condition_margins.get("4"), cond4_failures=fails))

    r = gnp.check_graph_gnp(dm.triangle_comb(10), segment=(0.0, 1.0))
    items.append(_item("triangle_comb_feet", r.passed, "pass", margin=r.worst_margin,
                       violations=int(r.details.get("violations", 0))))

    r = gnp.check_c_gnp(dm.two_disk(1.0), cx.Segment((-1.0, 0.0), (1.0, 0.0)))
    items.append(_item("two_disk_gnp", r.passed, "pass", margin=r.worst_margin))

    r = gnp.check_c_gnp(dm.star_circle(1.0), cx.Ball((0.0, 0.0), 0.5))
    items.append(_item("star_circle_gnp", r.passed, "pass", margin=r.worst_margin))

    C = cx.Ball((0.0, 0.0), 0.5)
    r = gnp.check_c_gnp(dm.offset_of_convex(C, 0.3), C)
    items.append(_item("offset_disk_gnp", r.passed, "pass", margin=r.worst_margin))
    return items


# -------------------------------------------------------------- equivalence

def equivalence_pairs(seed: int = DEFAULT_SEED) -> list[tuple[str, dm.ShapeDomain, cx.ConvexBody]]:
    """Twelve (domain, convex body) pairs: gallery shapes plus seeded random stars."""
    ell = dm.StarPolar.from_function(lambda t: 1 / np.sqrt(np.cos(t) ** 2 + (np.sin(t) / 0.5) ** 2), 256)
    bumpy = dm.StarPolar.from_function(lambda t: 1 + 0.3 * np.cos(3 * t), 128)
    square = cx.regular_polygon((0.0, 0.0), 0.5, 4, math.pi / 4)
    pairs = [
        ("star_circle_ball", dm.star_circle(1.0), cx.Ball((0.0, 0.0), 0.5)),
        ("offset_disk", dm.offset_of_convex(cx.Ball((0.0, 0.0), 0.5), 0.3), cx.Ball((0.0, 0.0), 0.5)),
        ("offset_square", dm.offset_of_convex(square, 0.3), square),
        ("bumpy_small_ball", bumpy, cx.Ball((0.0, 0.0), 0.2)),
        ("bumpy_large_ball", bumpy, cx.Ball((0.0, 0.0), 0.8)),
        ("ellipse_long_segment", ell, cx.Segment((-0.8, 0.0), (0.8, 0.0))),
        ("ellipse_short_segment", ell, cx.Segment((-0.5, 0.0), (0.5, 0.0))),
        ("far_ball", dm.BallUnion([((3.0, 0.0), 1.0)]), cx.Ball((0.0, 0.0), 0.1)),
        ("involute_ball", dm.Involute(), cx.Ball((0.0, 0.0), 1.0)),
        ("two_disk_segment", dm.two_disk(1.0), cx.Segment((-1.0, 0.0), (1.0, 0.0))),
    ]
    rng = np.random.default_rng(seed)
    for k in range(2):
        amp = rng.uniform(0.05, 0.3, size=3)
        ph = rng.uniform(0, 2 * math.pi, size=3)
        modes = rng.choice(np.arange(2, 7), size=3, replace=False)
        G = (lambda t, amp=amp, ph=ph, modes=modes:
             1 + sum(a * np.cos(m * t + p) for a, m, p in zip(amp, modes, ph)) / 2)
        pairs.append((f"random_star_{k}", dm.StarPolar.from_function(G, 128),
                      cx.Ball((0.0, 0.0), float(rng.uniform(0.1, 0.6)))))
    return pairs


def equivalence_items(seed: int = DEFAULT_SEED, tol: float | None = None) -> list[dict]:
    tol = resolve_tol(tol)
    items = []
    for name, om, C in equivalence_pairs(seed):
        a = gnp.check_c_gnp(om, C, tol=tol)
        b = gnp.check_c_sp(om, C, tol=tol)
        m4 = a.condition_margins["4"]
        decisive = abs(m4) > 10 * tol and abs(b.worst_margin) > 10 * tol
        v4 = m4 >= -tol
        agree = (v4 == b.passed) if decisive else True
        items.append(_item(f"equivalence_{name}", agree, "agree", decisive=decisive,
                           cond4_margin=m4, cond4_pass=v4, sp_margin=b.worst_margin, sp_pass=b.passed))
    return items


# ---------------------------------------------------------- counterexamples

def collapsing_intervals_report(n_values=(2, 4, 8, 16, 32, 64, 100)) -> metric.ConvergenceReport:
    seq = [dm.collapsing_intervals(n) for n in n_values]
    limit = dm.Intervals1D([(1.0, 2.0)])
    box = (np.array([-0.5]), np.array([2.5]))
    return metric.convergence_report(seq, limit, box=box, h=1e-3, indices=list(n_values))


def counterexample_items(seed: int = DEFAULT_SEED) -> list[dict]:
    items = []
    rep = collapsing_intervals_report()
    gap = rep.boundary_distances[-1]
    items.append(_item("collapsing_intervals_boundary_gap", (not rep.boundary_limit_matches) and gap >= 0.9,
                       "boundary limit differs", boundary_gap=gap,
                       closure_limit_matches=rep.closure_limit_matches,
                       boundary_limit_matches=rep.boundary_limit_matches,
                       hausdorff_final=rep.hausdorff[-1]))

    ns = [2, 4, 10, 20, 40]
    seps = [gnp.pair_separation(dm.shrinking_pair(n)) for n in ns]
    ok_sep = all(abs(s - 2 / n) <= 1e-6 for s, n in zip(seps, ns))
    pair10 = dm.shrinking_pair(10)
    C1 = cx.Ball((0.0, 0.0), 0.5)
    C2 = cx.Ball((2.0, 0.0), 0.5)
    rep = gnp.check_pair_class(pair10, C1, C2, mode="projection", delta=0.5)
    items.append(_item("shrinking_pair_noncompact", ok_sep and not rep.passed, "separation to 0 and class failure",
                       separations=seps, delta_check_margin=rep.worst_margin))

    ell = cx.ellipse_polytope((0.0, 0.0), 1.0, 0.1, 256)
    field = thickness.compute_thickness(ell, dm.offset_of_convex(ell, 0.5), n=512)
    margin, verdict = thickness.bilipschitz_margin(field)
    lo, hi = thickness.empirical_ratio_bounds(field)
    items.append(_item("ellipse_bilipschitz_blowup", (not verdict) and lo < 0.5, "verdict false and min ratio < 0.5",
                       margin=margin, L_nu=field.L_nu, min_ratio=lo, max_ratio=hi))

    r = gnp.affine_map_check(dm.star_circle(1.0), cx.Ball((0.0, 0.0), 0.5), [[2.0, 0.0], [0.0, 1.0]], [0.0, 0.0])
    items.append(_item("non_similarity_map", not r.passed, "property lost", margin=r.worst_margin,
                       pre_margin=r.details.get("pre_margin"), post_margin=r.details.get("post_margin")))
    return items


# ------------------------------------------------------------------ extras

def pair_sequence(n_values=range(1, 6), delta: float = 0.5):
    """Two disks whose radius deficit shrinks sixteenfold per step; limit radius 1."""
    seq = []
    for n in n_values:
        r = 1 - 0.8 * 16.0 ** (-n)
        seq.append(dm.DisjointPair(dm.star_circle(r, center=(-1.5, 0.0)), dm.star_circle(r, center=(1.5, 0.0)), delta))
    limit = dm.DisjointPair(dm.star_circle(1.0, center=(-1.5, 0.0)), dm.star_circle(1.0, center=(1.5, 0.0)), delta)
    return seq, limit


def concentric_report(h: float = 1 / 256) -> metric.ConvergenceReport:
    ns = list(range(2, 33))
    seq = [dm.star_circle(1 - 1 / n) for n in ns]
    box = (np.array([-1.25, -1.25]), np.array([1.25, 1.25]))
    return metric.convergence_report(seq, dm.star_circle(1.0), box=box, h=h, indices=ns)


def pair_report(h: float = 1 / 128) -> metric.ConvergenceReport:
    ns = list(range(1, 6))
    seq, limit = pair_sequence(ns)
    box = (np.array([-2.75, -1.25]), np.array([2.75, 1.25]))
    return metric.convergence_report(seq, limit, box=box, h=h, indices=ns)


def _crossings_equal(rep: metric.ConvergenceReport) -> bool:
    c = rep.crossing
    return c["H"] == c["K"] == c["L"]


def full_extras(seed: int = DEFAULT_SEED) -> list[dict]:
    items = []
    rep = concentric_report()
    items.append(_item("convergence_concentric", _crossings_equal(rep) and rep.modes_agree, "modes agree",
                       crossing=rep.crossing, hausdorff_final=rep.hausdorff[-1]))
    rep = pair_report()
    items.append(_item("convergence_separated_pair", _crossings_equal(rep) and rep.modes_agree, "modes agree",
                       crossing=rep.crossing, separation=rep.separation))

    C = cx.Ball((0.0, 0.0), 1.0)
    field = thickness.compute_thickness(C, dm.offset_of_convex(C, 0.3), n=256)
    items.append(_item("thickness_offset_circle", abs(field.margin - 0.7) <= 1e-3, "margin 0.7",
                       K=field.K, M=field.M, L_nu=field.L_nu, margin=field.margin))

    rng = np.random.default_rng(seed)
    doms = [metric.random_feasible_G(rng, 0.02) for _ in range(20)]
    rows = metric.verify_G_bound(doms, [0.02] * len(doms))
    items.append(_item("radius_lower_bound", all(r.satisfied for r in rows), "all satisfied",
                       min_G=min(r.min_G for r in rows), bound=rows[0].bound))

    box = varopt.canonical_box(41)
    res = varopt.minimize_perimeter(box, (0.0, 0.0), lam=1.0)
    _, dp = varopt.dp_oracle(box, (0.0, 0.0), 41, 101, 1.0)
    items.append(_item("varopt_vs_oracle", res.objective <= dp + 0.02 * abs(dp), "within 2 percent",
                       descent=res.objective, oracle=dp))

    dens = potential.make_density(cx.Ball((0.0, 0.0), 0.5), 1.0, 48)
    radii = np.array([0.0, 0.25, 0.6, 0.9])
    pts = np.column_stack([radii, np.zeros_like(radii)])
    U = potential.solve_U_R(1.0, dens, pts)
    ref = potential.radial_indicator_solution(radii, 0.5, 1.0)
    err = float(np.max(np.abs(U - ref)) / np.max(np.abs(ref)))
    items.append(_item("potential_radial", err <= 0.01, "within 1 percent", rel_error=err))
    return items


def run_suite(name: str, seed: int = DEFAULT_SEED, tol: float | None = None) -> dict:
    if name not in SUITES:
        from .errors import PreconditionFailed

        raise PreconditionFailed(f"unknown suite {name!r}; choose from {list(SUITES)}")
    items: list[dict] = []
    if name in ("gallery", "full"):
        items += gallery_items(seed)
    if name in ("equivalence", "full"):
        items += equivalence_items(seed, tol)
    if name in ("counterexamples", "full"):
        items += counterexample_items(seed)
    if name == "full":
        items += full_extras(seed)
    items.sort(key=lambda it: it["name"])
    return {"suite": name, "seed": int(seed), "pass": all(it["pass"] for it in items),
            "failed": [it["name"] for it in items if not it["pass"]], "items": items}
