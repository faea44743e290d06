"""End-to-end acceptance criteria, one test per criterion.

Each test records a one-line PASS/FAIL summary with its wall time; the
summaries are printed together at the end of the session (see conftest).
"""
from __future__ import annotations

import math
import subprocess
import sys
import time
from contextlib import contextmanager

import numpy as np

from gnp_lab import convex as cx
from gnp_lab import domain as dm
from gnp_lab import gnp, metric, potential, suite, thickness, varopt

SUMMARY: list[str] = []


@contextmanager
def criterion(number: int, title: str, budget: float):
    """Time the block; the block fills ``checks`` with (label, ok) pairs."""
    checks: list[tuple[str, bool]] = []
    t0 = time.perf_counter()
    yield checks
    elapsed = time.perf_counter() - t0
    checks.append((f"runtime {elapsed:.1f}s < {budget:g}s", elapsed < budget))
    ok = all(c for _, c in checks)
    failed = [label for label, c in checks if not c]
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {title} ({elapsed:.1f}s)"
    if failed:
        line += " | failed: " + "; ".join(failed)
    SUMMARY.append(line)
    print(line)
    assert ok, line


def test_criterion_01_gallery_conformance():
    with criterion(1, "gallery conformance", 5.0) as checks:
        r = gnp.check_c_gnp(dm.cusp_chain(6), cx.Segment((0.0, 0.0), (1.0, 0.0)))
        checks.append((f"cusp chain margin {r.worst_margin:.3g}", r.passed and r.worst_margin >= -1e-9))
        inv = dm.Involute()
        unit = cx.Ball((0.0, 0.0), 1.0)
        sp = gnp.check_c_sp(inv, unit)
        checks.append(("involute normal-cone report emitted", "pass" in sp.to_dict()))
        g = gnp.check_c_gnp(inv, unit, n=1024)
        fails = int(g.details.get("failing_normals", -1))
        checks.append((f"involute inward-normal failures {fails}", fails == 0))


def test_criterion_02_checker_equivalence():
    with criterion(2, "normal-ray vs normal-cone equivalence", 30.0) as checks:
        items = suite.equivalence_items()
        bad = [it["name"] for it in items if not it["pass"]]
        decisive = sum(bool(it["decisive"]) for it in items)
        checks.append((f"{len(items)} pairs", len(items) == 12))
        checks.append((f"disagreements {bad} ({decisive} decisive)", not bad))


def test_criterion_03_comb_divergence():
    with criterion(3, "comb perimeter divergence and feet", 10.0) as checks:
        ns = np.array([1e2, 1e3, 1e4])
        P = np.array([dm.triangle_comb(int(n)).upper_length() for n in ns])
        # slope c plus the constant contributed by the first teeth
        A = np.column_stack([np.log(ns), np.ones_like(ns)])
        coef, *_ = np.linalg.lstsq(A, P, rcond=None)
        r2 = 1 - np.sum((P - A @ coef) ** 2) / np.sum((P - P.mean()) ** 2)
        checks.append((f"c*ln(n) fit c = {coef[0]:.3f}, R^2 = {r2:.6f}", coef[0] > 0 and r2 > 0.99))
        for n in ns.astype(int):
            rep = gnp.check_graph_gnp(dm.triangle_comb(int(n)), segment=(0.0, 1.0))
            lo, hi = rep.details["foot_min"], rep.details["foot_max"]
            checks.append((f"n={n} feet in [{lo:.3f}, {hi:.3f}], {rep.details['violations']} outside [0,1]",
                           lo >= -1e-9 and hi <= 1 + 1e-9))


def test_criterion_04_convergence_equivalence():
    with criterion(4, "convergence mode equivalence", 60.0) as checks:
        h = 1 / 256
        for name, rep in (("concentric", suite.concentric_report(h)), ("separated pair", suite.pair_report())):
            c = rep.crossing
            checks.append((f"{name} crossings {c}", c["H"] == c["K"] == c["L"]))
            checks.append((f"{name} per-index agreement", bool(rep.modes_agree) and all(rep.per_index_agree)))
        box = (np.array([-1.25, -1.25]), np.array([1.25, 1.25]))
        worst = 0.0
        for n in range(2, 33):
            d, err = metric.open_set_distance(dm.star_circle(1 - 1 / n), dm.star_circle(1.0), box=box, h=h)
            worst = max(worst, abs(d - 1 / n) - err)
        checks.append((f"open-set distance vs 1/n excess {worst:.2e}", worst <= 0))


def test_criterion_05_counterexamples():
    with criterion(5, "counterexample sequences", 10.0) as checks:
        rep = suite.collapsing_intervals_report()
        gap = rep.boundary_distances[-1]
        checks.append((f"boundary gap {gap:.3f}", gap >= 0.9))
        checks.append(("boundary limit differs", not rep.boundary_limit_matches))
        ns = [2, 4, 10, 20, 40, 100]
        seps = [gnp.pair_separation(dm.shrinking_pair(n)) for n in ns]
        checks.append(("separation 2/n", all(abs(s - 2 / n) <= 1e-6 for s, n in zip(seps, ns))))
        r = gnp.check_pair_class(dm.shrinking_pair(10), cx.Ball((0.0, 0.0), 0.5), cx.Ball((2.0, 0.0), 0.5),
                                 mode="projection", delta=0.5)
        checks.append((f"delta 0.5 class fails at n=10 (margin {r.worst_margin:.3g})", not r.passed))


def test_criterion_06_radius_lower_bound():
    with criterion(6, "radius lower bound 1 - 4 eps", 60.0) as checks:
        eps = 0.02
        rng = np.random.default_rng(suite.DEFAULT_SEED)
        doms = [metric.random_feasible_G(rng, eps) for _ in range(100)]
        rows = metric.verify_G_bound(doms, [eps] * len(doms), tol=1e-9)
        worst = min(r.min_G for r in rows)
        checks.append((f"min G {worst:.4f} vs bound {1 - 4 * eps:.2f}", all(r.satisfied for r in rows)))


def test_criterion_07_thickness_bilipschitz():
    with criterion(7, "thickness and bilipschitz", 20.0) as checks:
        C = cx.Ball((0.0, 0.0), 1.0)
        f = thickness.compute_thickness(C, dm.offset_of_convex(C, 0.3), n=512)
        checks.append((f"K {f.K:.2e}", f.K <= 1e-6))
        checks.append((f"M {f.M:.9f}", abs(f.M - 0.3) <= 1e-6))
        checks.append((f"L_nu {f.L_nu:.6f}", abs(f.L_nu - 1.0) <= 1e-3))
        margin, _ = thickness.bilipschitz_margin(f)
        checks.append((f"margin {margin:.6f}", abs(margin - 0.7) <= 1e-3))
        lo, hi = thickness.empirical_ratio_bounds(f)
        checks.append((f"ratios [{lo:.9f}, {hi:.9f}]", abs(lo - 1.3) <= 1e-6 and abs(hi - 1.3) <= 1e-6))

        ell = cx.ellipse_polytope((0.0, 0.0), 1.0, 0.1, 256)
        g = thickness.compute_thickness(ell, dm.offset_of_convex(ell, 0.5), n=512)
        margin, verdict = thickness.bilipschitz_margin(g)
        lo, _ = thickness.empirical_ratio_bounds(g)
        checks.append((f"ellipse verdict {verdict} (margin {margin:.3g})", not verdict))
        checks.append((f"ellipse min ratio {lo:.4f} < 0.5", lo < 0.5))


def _random_body(rng: np.random.Generator) -> cx.ConvexBody:
    kind = rng.integers(3)
    if kind == 0:
        c = rng.uniform(0.0, 1.0, 2)
        r = rng.uniform(0.0, min(*c, *(1 - c)))
        return cx.Ball(c, r)
    if kind == 1:
        a, b = rng.uniform(0.0, 1.0, (2, 2))
        if np.hypot(*(a - b)) < 1e-6:
            b = np.array([1.0, 1.0]) - a
        return cx.Segment(a, b)
    while True:
        try:
            return cx.hull(rng.uniform(0.0, 1.0, (int(rng.integers(3, 9)), 2)))
        except Exception:
            continue


def _extent_points(C: cx.ConvexBody) -> np.ndarray:
    if isinstance(C, cx.Ball):
        t = np.linspace(0, 2 * np.pi, 64, endpoint=False)
        return C.center + C.radius * np.column_stack([np.cos(t), np.sin(t)])
    v, _ = cx.vertices(C)
    return v


def test_criterion_08_projection_pair_bound():
    with criterion(8, "projection pair bound", 10.0) as checks:
        rng = np.random.default_rng(suite.DEFAULT_SEED)
        worst = -np.inf
        for _ in range(10_000):
            K, L = _random_body(rng), _random_body(rng)
            x, y = rng.uniform(0.0, 1.0, (2, 2))
            pts = np.vstack([_extent_points(K), _extent_points(L), x, y])
            # a ball's diameter is exact; the polygonal sample only underestimates it
            diam = max([float(np.max(np.linalg.norm(pts[:, None] - pts[None], axis=-1)))]
                       + [2 * B.radius for B in (K, L) if isinstance(B, cx.Ball)])
            gap = np.linalg.norm(cx.project(K, x) - cx.project(L, y))
            worst = max(worst, gap - 4 * diam - np.linalg.norm(x - y))
        checks.append((f"worst excess {worst:.3g}", worst <= 1e-12))


def test_criterion_09_variational_solver():
    with criterion(9, "variational solver vs grid oracle", 120.0) as checks:
        box = varopt.canonical_box(101)
        for lam in (0.0, 1.0, 2.0):
            res = varopt.minimize_perimeter(box, (0.0, 0.0), lam=lam)
            _, dp = varopt.dp_oracle(box, (0.0, 0.0), 101, 201, lam)
            rel = abs(res.objective - dp) / max(abs(dp), 1e-300)
            checks.append((f"lambda={lam:g} descent {res.objective:.6f} oracle {dp:.6f}", rel <= 0.02))
            if lam == 0.0:
                checks.append(("flat minimizer with P = 2", bool(np.all(res.u.u == 0.0)) and res.perimeter == 2.0))
        x = np.linspace(0.0, 2.0, 2001)
        feet = varopt.foot(x, -2 * (x - 1))
        checks.append(("circle feet at 1", float(np.max(np.abs(feet - 1))) <= 1e-12))
        xs = np.linspace(-1.0, 1.0, 2001)
        u = np.maximum(1 - xs**2, 0.0)
        u[[0, -1]] = 0.0
        P = varopt.perimeter_u(varopt.GridFunction(-1.0, 1.0, u, (0.0, 0.0)))
        checks.append((f"semicircle perimeter {P:.7f}", abs(P - math.pi) <= 1e-4))


def _radial_reference(r, rho, R):
    # -Laplace U = 1 inside |x| < rho, 0 outside, U(R) = 0, matched in value and flux at rho
    B = rho**2 / 2
    A = rho**2 / 4 + B * math.log(R / rho)
    return np.where(r <= rho, A - r**2 / 4, B * np.log(R / np.maximum(r, 1e-300)))


def test_criterion_10_potential():
    with criterion(10, "Green function and potential", 60.0) as checks:
        rng = np.random.default_rng(suite.DEFAULT_SEED)
        R = 2.0
        r = R * np.sqrt(rng.uniform(0.0, 0.98, (2, 1000)))
        t = rng.uniform(0.0, 2 * np.pi, (2, 1000))
        x = np.column_stack([r[0] * np.cos(t[0]), r[0] * np.sin(t[0])])
        y = np.column_stack([r[1] * np.cos(t[1]), r[1] * np.sin(t[1])])
        asym = float(np.max(np.abs(potential.green_many(R, x, y) - potential.green_many(R, y, x))))
        checks.append((f"Green asymmetry {asym:.2e}", asym <= 1e-12))

        rho, R = 0.4, 1.0
        f = potential.make_density(cx.Ball((0.0, 0.0), rho), 1.0)
        radii = np.array([0.0, 0.2, 0.4, 0.6, 0.9])
        pts = np.column_stack([radii, np.zeros_like(radii)])
        got = potential.solve_U_R(R, f, pts)
        want = _radial_reference(radii, rho, R)
        err = float(np.max(np.abs(got - want) / np.abs(want)))
        checks.append((f"radial solution rel error {err:.2e}", err <= 0.01))

        scan = potential.j_bound_scan([10, 20, 40, 80], potential.make_density(cx.Ball((0.0, 0.0), 0.2), 1.0, n=32))
        checks.append((f"scan exponent {scan.exponent_volume:.4f}", abs(scan.exponent_volume - 2) <= 0.1))


def test_criterion_11_determinism(tmp_path):
    with criterion(11, "deterministic full suite", 300.0) as checks:
        outs = []
        for k in range(2):
            path = tmp_path / f"full_{k}.json"
            proc = subprocess.run([sys.executable, "-m", "gnp_lab.cli", "suite", "full", "--seed", "7",
                                   "--json", str(path)], capture_output=True, text=True)
            checks.append((f"run {k} exit {proc.returncode}", proc.returncode in (0, 1) and path.exists()))
            outs.append(path.read_bytes() if path.exists() else b"")
        checks.append(("byte-identical reports", outs[0] == outs[1] and len(outs[0]) > 0))
