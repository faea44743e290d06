"""Membership predicates for normal-property shape classes.

Every checker samples the boundary, evaluates a signed margin per sample
(positive means satisfied with slack) and folds the samples into a
:class:`CheckReport`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import convex as cx
from . import domain as dm
from ._config import resolve_tol
from ._kernels import cone_margins
from .errors import (
    BoundaryNotCovered,
    EmptyBoundary,
    NotGraph,
    NotStarPolar,
    PatchOverlap,
    PreconditionFailed,
    SingularMap,
)


def _floats(v) -> list[float] | None:
    if v is None:
        return None
    return [float(a) if np.isfinite(a) else None for a in np.asarray(v, dtype=float).ravel()]


@dataclass
class CheckReport:
    passed: bool
    worst_margin: float
    witness: dict | None = None
    condition_breakdown: dict = field(default_factory=dict)
    condition_margins: dict = field(default_factory=dict)
    samples_used: int = 0
    skipped_nonsmooth: int = 0
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "pass": bool(self.passed),
            "worst_margin": float(self.worst_margin),
            "witness": self.witness,
            "condition_breakdown": {k: (None if v is None else bool(v)) for k, v in self.condition_breakdown.items()},
            "condition_margins": {k: float(v) for k, v in self.condition_margins.items()},
            "samples_used": int(self.samples_used),
            "skipped_nonsmooth": int(self.skipped_nonsmooth),
            "details": self.details,
        }


def _witness(condition: str, point, normal=None, offending=None, value=None) -> dict:
    return {"condition": condition, "point": _floats(point), "normal": _floats(normal),
            "offending": _floats(offending), "value": None if value is None else float(value)}


def ambient_ball(omega: dm.ShapeDomain, C: cx.ConvexBody | None = None) -> tuple[np.ndarray, float]:
    """A ball D comfortably containing the domain (and C when given)."""
    lo, hi = omega.bbox()
    if C is not None:
        clo, chi = cx.bounding_box(C)
        lo, hi = np.minimum(lo, clo), np.maximum(hi, chi)
    center = 0.5 * (lo + hi)
    return center, 1.5 * float(np.hypot(*(hi - lo))) / 2 + 1e-6


def _ray_exit(origins: np.ndarray, dirs: np.ndarray, center: np.ndarray, radius: float) -> np.ndarray:
    w = origins - center
    b = (w * dirs).sum(axis=1)
    c = (w * w).sum(axis=1) - radius**2
    return -b + np.sqrt(np.maximum(b * b - c, 0.0))


# ----------------------------------------------------------------- C-GNP

def outward_ray_runs(omega: dm.ShapeDomain, origins, dirs, t_end, steps: int = 256) -> tuple[np.ndarray, np.ndarray]:
    """Count membership runs along each ray and the length of Ω beyond the first run."""
    origins = np.asarray(origins, float)
    dirs = np.asarray(dirs, float)
    t_end = np.asarray(t_end, float)
    frac = (np.arange(steps) + 1.0) / steps
    t = t_end[:, None] * frac[None, :]
    pts = origins[:, None, :] + t[..., None] * dirs[:, None, :]
    inside = omega.contains(pts.reshape(-1, 2)).reshape(t.shape)
    starts = inside & ~np.concatenate([np.zeros((inside.shape[0], 1), bool), inside[:, :-1]], axis=1)
    runs = starts.sum(axis=1)
    first_end = np.argmax(inside & ~np.concatenate([inside[:, 1:], np.zeros((inside.shape[0], 1), bool)], axis=1), axis=1)
    after = np.arange(steps)[None, :] > first_end[:, None]
    extra = (inside & after).sum(axis=1) * (t_end / steps)
    return runs, np.where(runs > 1, extra, 0.0)


def check_c_gnp(omega: dm.ShapeDomain, C: cx.ConvexBody, n: int = 1024, tol: float | None = None,
                interior_n: int = 32, ray_steps: int = 256) -> CheckReport:
    """Four-condition normal-property check of ``omega`` against the convex body ``C``.

    Condition 2 (Lipschitz boundary) is informational only: the report
    carries the fraction of non-smooth samples but the flag never fails.
    """
    tol = resolve_tol(tol)
    bs = dm.sample_boundary(omega, n)
    if len(bs) == 0:
        raise EmptyBoundary("domain boundary produced no samples")
    margins: dict[str, float] = {}
    flags: dict[str, bool | None] = {}
    witness = None

    # (1) interior of C inside the domain
    inner = cx.interior_grid(C, interior_n, tol)
    if inner.shape[0]:
        outside = ~omega.contains(inner)
        if outside.any():
            depth = cx.depth_many(C, inner[outside])
            k = int(np.argmax(depth))
            margins["1"] = -float(depth[k])
            witness = _witness("1", inner[outside][k], value=margins["1"])
        else:
            margins["1"] = 0.0
    else:
        margins["1"] = 0.0
    flags["1"] = margins["1"] >= -tol

    # (2) informational
    flags["2"] = None
    nonsmooth = int((~bs.smooth).sum())

    # (3) outward rays from the boundary of C meet the domain in one run
    cb = cx.sample_boundary(C, max(16, n // 2))
    center, radius = ambient_ball(omega, C)
    if len(cb.points):
        t_end = _ray_exit(cb.points, cb.normals, center, radius)
        runs, extra = outward_ray_runs(omega, cb.points, cb.normals, t_end, ray_steps)
        bad = runs > 1
        margins["3"] = -float(extra.max()) if bad.any() else 0.0
        if bad.any() and witness is None:
            k = int(np.argmax(extra))
            witness = _witness("3", cb.points[k], cb.normals[k], value=margins["3"])
    else:
        margins["3"] = 0.0
    flags["3"] = margins["3"] >= -tol

    # (4) inward normal rays meet C
    sm = bs.smooth
    pts, nrm = bs.points[sm], bs.normals[sm]
    if pts.shape[0] == 0:
        raise EmptyBoundary("no smooth boundary samples to test")
    clearance, closest = cx.ray_clearance(C, pts, nrm)
    k = int(np.argmin(clearance))
    margins["4"] = float(clearance[k])
    flags["4"] = margins["4"] >= -tol
    if not flags["4"] and witness is None:
        witness = _witness("4", pts[k], nrm[k], closest[k], margins["4"])

    passed = all(v for v in flags.values() if v is not None)
    worst = margins["4"] if passed else min(margins.values())
    if witness is None and not passed:  # pragma: no cover - every failing branch sets one
        witness = _witness("?", pts[k])
    return CheckReport(
        passed=passed,
        worst_margin=worst,
        witness=None if passed else witness,
        condition_breakdown=flags,
        condition_margins=margins,
        samples_used=int(len(bs)),
        skipped_nonsmooth=nonsmooth,
        details={"nonsmooth_fraction": nonsmooth / max(len(bs), 1),
                 "failing_normals": int((clearance < -tol).sum()),
                 "ambient_center": _floats(center), "ambient_radius": radius},
    )


# ------------------------------------------------------------------ C-SP

def interior_samples(omega: dm.ShapeDomain, budget: int = 2048) -> np.ndarray:
    """Grid points of the bounding box that fall inside the domain, about ``budget`` of them."""
    lo, hi = omega.bbox()
    side = int(np.sqrt(budget))
    gx, gy = np.meshgrid(np.linspace(lo[0], hi[0], side + 2)[1:-1], np.linspace(lo[1], hi[1], side + 2)[1:-1])
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    inside = omega.contains(pts)
    frac = max(inside.mean(), 1e-3)
    if inside.sum() < budget // 2:
        side = int(min(np.sqrt(budget / frac), 4 * np.sqrt(budget)))
        gx, gy = np.meshgrid(np.linspace(lo[0], hi[0], side + 2)[1:-1], np.linspace(lo[1], hi[1], side + 2)[1:-1])
        pts = np.column_stack([gx.ravel(), gy.ravel()])
        inside = omega.contains(pts)
    return pts[inside]


def _local_cone_margin(C: cx.ConvexBody, x: np.ndarray, nu: np.ndarray, n_dir: int = 256) -> tuple[np.ndarray, np.ndarray]:
    """Minimum of h_C(u) - u.x over unit u in the open inward half-plane at x.

    Points x + s u with small s lie in the domain for every such u, so this
    is the cone margin against interior points arbitrarily close to x.
    """
    base = np.arctan2(nu[:, 1], nu[:, 0])
    off = (np.arange(n_dir) + 0.5) / n_dir * np.pi - np.pi / 2
    ang = base[:, None] + off[None, :]
    u = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
    val = cx.support_many(C, u.reshape(-1, 2)).reshape(ang.shape) - (u * x[:, None, :]).sum(-1)
    k = np.argmin(val, axis=1)
    lo = np.take_along_axis(ang, k[:, None], 1)[:, 0] - np.pi / n_dir
    hi = lo + 2 * np.pi / n_dir
    lo = np.maximum(lo, base - np.pi / 2)
    hi = np.minimum(hi, base + np.pi / 2)

    def f(a):
        uu = np.column_stack([np.cos(a), np.sin(a)])
        return cx.support_many(C, uu) - (uu * x).sum(1)

    for _ in range(50):
        m1 = lo + (hi - lo) / 3
        m2 = hi - (hi - lo) / 3
        left = f(m1) < f(m2)
        hi = np.where(left, m2, hi)
        lo = np.where(left, lo, m1)
    a = 0.5 * (lo + hi)
    best = np.minimum(f(a), val.min(axis=1))
    arg = np.where(f(a) <= val.min(axis=1), a, np.take_along_axis(ang, k[:, None], 1)[:, 0])
    return best, np.column_stack([np.cos(arg), np.sin(arg)])


def check_c_sp(omega: dm.ShapeDomain, C: cx.ConvexBody, n_boundary: int = 512, n_interior: int = 2048,
               tol: float | None = None, local_probes: bool = True) -> CheckReport:
    """Normal-cone emptiness: no point of the domain lies in the cone at a boundary point.

    The margin of a pair (x, y) is sup over C of u.(c - x) with u the unit
    vector from x to y; the pair is a violation when it is negative. Interior
    points are a membership-filtered grid plus, at every smooth sample, the
    limit of points approaching x from inside along each inward direction.
    """
    tol = resolve_tol(tol)
    bs = dm.sample_boundary(omega, n_boundary)
    if len(bs) == 0:
        raise EmptyBoundary("domain boundary produced no samples")
    ys = interior_samples(omega, n_interior)
    verts, rad = cx.vertices(C)
    grid_m, grid_arg = cone_margins(bs.points, ys, verts, rad)
    per_x = grid_m.copy()
    offending = np.full(bs.points.shape, np.nan)
    ok = grid_arg >= 0
    offending[ok] = ys[grid_arg[ok]]
    sm = bs.smooth
    if local_probes and sm.any():
        loc, udir = _local_cone_margin(C, bs.points[sm], bs.normals[sm])
        better = loc < per_x[sm]
        idx = np.flatnonzero(sm)[better]
        per_x[idx] = loc[better]
        scale = 1e-6 * max(1.0, float(np.hypot(*(np.subtract(*omega.bbox()[::-1])))))
        offending[idx] = bs.points[idx] + scale * udir[better]
    finite = np.isfinite(per_x)
    if not finite.any():
        raise EmptyBoundary("no interior samples found")
    k = int(np.argmin(np.where(finite, per_x, np.inf)))
    worst = float(per_x[k])
    passed = worst >= -tol
    return CheckReport(
        passed=passed,
        worst_margin=worst,
        witness=None if passed else _witness("sp", bs.points[k], bs.normals[k] if sm[k] else None, offending[k], worst),
        condition_breakdown={"sp": passed},
        condition_margins={"sp": worst},
        samples_used=int(len(bs) + ys.shape[0]),
        skipped_nonsmooth=int((~sm).sum()),
        details={"interior_samples": int(ys.shape[0]), "violating_boundary_points": int((per_x < -tol).sum())},
    )


# --------------------------------------------------------- polar inequality

def polar_defect(omega: dm.StarPolar, n: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(theta, (G G')^2 / (G^2 + G'^2)) on a dense grid: squared center-to-normal-line distance."""
    n = n or max(4096, 8 * omega.n_theta)
    th = 2 * np.pi * np.arange(n) / n
    g = omega.radius(th)
    gp = omega.radius_derivative(th)
    return th, (g * gp) ** 2 / (g**2 + gp**2)


def check_eps_ball_gnp(omega: dm.ShapeDomain, eps: float, tol: float | None = None, n: int | None = None) -> CheckReport:
    tol = resolve_tol(tol)
    if not isinstance(omega, dm.StarPolar):
        raise NotStarPolar(f"expected a star-polar domain, got {type(omega).__name__}")
    th, lhs = polar_defect(omega, n)
    g = omega.radius(th)
    if g.min() <= eps:
        raise PreconditionFailed(f"radius function dips to {g.min():.6g}, not above eps = {eps}")
    k = int(np.argmax(lhs))
    margin = float(eps**2 - lhs[k])
    passed = margin >= -tol
    point = omega.center + g[k] * np.array([np.cos(th[k]), np.sin(th[k])])
    return CheckReport(
        passed=passed,
        worst_margin=margin,
        witness=None if passed else _witness("eps", point, value=margin),
        condition_breakdown={"eps": passed},
        condition_margins={"eps": margin},
        samples_used=int(th.size),
        details={"eps": float(eps), "max_defect": float(lhs[k]), "theta_at_max": float(th[k])},
    )


# ------------------------------------------------------------------ graphs

def graph_feet(omega: dm.Graph, n: int = 1024) -> tuple[np.ndarray, np.ndarray]:
    """(x, foot) at smooth samples of the upper curve, foot = x + phi phi'."""
    xs, ps, ss, sm = omega._upper_samples(max(n // 2, 1))
    keep = sm & (ps > 0)
    return xs[keep], xs[keep] + ps[keep] * ss[keep]


def check_graph_gnp(omega: dm.ShapeDomain, segment: tuple[float, float] = (-1.0, 1.0), n: int = 1024,
                    tol: float | None = None) -> CheckReport:
    """Axis foot of every inward normal from the upper graph must land in ``segment``."""
    tol = resolve_tol(tol)
    if not isinstance(omega, dm.Graph):
        raise NotGraph(f"expected a graph domain, got {type(omega).__name__}")
    x, foot = graph_feet(omega, n)
    if x.size == 0:
        raise EmptyBoundary("graph has no smooth samples")
    lo, hi = segment
    margin = np.minimum(hi - foot, foot - lo)
    k = int(np.argmin(margin))
    passed = bool(margin[k] >= -tol)
    phi_k = float(omega.profile(x[k]))
    return CheckReport(
        passed=passed,
        worst_margin=float(margin[k]),
        witness=None if passed else _witness("graph", [x[k], phi_k], offending=[foot[k], 0.0], value=margin[k]),
        condition_breakdown={"graph": passed},
        condition_margins={"graph": float(margin[k])},
        samples_used=int(x.size),
        details={"segment": [float(lo), float(hi)], "foot_min": float(foot.min()), "foot_max": float(foot.max()),
                 "violations": int((margin < -tol).sum())},
    )


# ------------------------------------------------------------- pair classes

def pair_separation(pair: dm.DisjointPair, mode: str = "distance", n: int = 2048) -> float:
    """Distance from the first closure to the second (or to the hull of the second)."""
    if mode == "distance":
        return dm.closure_distance(pair.first, pair.second, n)
    if mode != "projection":
        raise PreconditionFailed(f"unknown pair mode {mode!r}")
    if isinstance(pair.second, dm.BallUnion) and len(pair.second.radii) == 1:
        body: cx.ConvexBody = cx.Ball(pair.second.centers[0], pair.second.radii[0])
    else:
        body = cx.hull(pair.second.sample_boundary(n).points)
    pts = pair.first.sample_boundary(n).points
    if isinstance(pair.first, dm.BallUnion) and len(pair.first.radii) == 1:
        d = cx.distance_many(body, pair.first.centers) - pair.first.radii[0]
        return float(max(d.min(), 0.0))
    return float(cx.distance_many(body, pts).min())


def check_pair_class(omega: dm.ShapeDomain, C1: cx.ConvexBody, C2: cx.ConvexBody, mode: str = "distance",
                     delta: float | None = None, n: int = 1024, tol: float | None = None) -> CheckReport:
    tol = resolve_tol(tol)
    if not isinstance(omega, dm.DisjointPair):
        raise PreconditionFailed("pair-class check needs a disjoint pair domain")
    delta = omega.delta if delta is None else float(delta)
    r1 = check_c_gnp(omega.first, C1, n, tol)
    r2 = check_c_gnp(omega.second, C2, n, tol)
    sep = pair_separation(omega, mode)
    margins = {"first": r1.worst_margin, "second": r2.worst_margin, "separation": sep - delta}
    flags = {"first": r1.passed, "second": r2.passed, "separation": sep - delta >= -tol}
    passed = all(flags.values())
    witness = None
    if not passed:
        if not flags["first"]:
            witness = r1.witness
        elif not flags["second"]:
            witness = r2.witness
        else:
            witness = _witness("separation", None, value=sep - delta)
    return CheckReport(
        passed=passed,
        worst_margin=float(min(margins.values())),
        witness=witness,
        condition_breakdown=flags,
        condition_margins=margins,
        samples_used=r1.samples_used + r2.samples_used,
        skipped_nonsmooth=r1.skipped_nonsmooth + r2.skipped_nonsmooth,
        details={"separation": sep, "delta": delta, "mode": mode},
    )


# ----------------------------------------------------------- local classes

def check_local_class(omega: dm.ShapeDomain, patches, mode: str = "gnp", n: int = 1024,
                      tol: float | None = None) -> CheckReport:
    """Per-patch check: each ``(center, radius, body)`` patch must see the body's normal property.

    Patches are pairwise disjoint closed balls that together cover the boundary.
    """
    tol = resolve_tol(tol)
    if mode not in ("gnp", "nc"):
        raise PreconditionFailed(f"unknown local mode {mode!r}")
    patches = [(np.asarray(a, float).reshape(2), float(r), B) for a, r, B in patches]
    for i in range(len(patches)):
        for j in range(i + 1, len(patches)):
            ai, ri, _ = patches[i]
            aj, rj, _ = patches[j]
            if np.hypot(*(ai - aj)) <= ri + rj + tol:
                raise PatchOverlap(f"patches {i} and {j} intersect")
    bs = dm.sample_boundary(omega, n)
    cover = np.full(len(bs), -np.inf)
    for a, r, _ in patches:
        cover = np.maximum(cover, r - np.hypot(*(bs.points - a).T))
    cov_margin = float(cover.min())
    if cov_margin < -tol:
        k = int(np.argmin(cover))
        raise BoundaryNotCovered(f"boundary point {bs.points[k].tolist()} lies {-cov_margin:.6g} outside every patch")
    flags: dict[str, bool] = {}
    margins: dict[str, float] = {"coverage": cov_margin}
    flags["coverage"] = True
    witness = None
    used = 0
    for i, (a, r, B) in enumerate(patches):
        piece = dm.Clipped(omega, a, r)
        rep = check_c_gnp(piece, B, n, tol) if mode == "gnp" else check_c_sp(piece, B, n, tol=tol)
        flags[f"patch{i}"] = rep.passed
        margins[f"patch{i}"] = rep.worst_margin
        used += rep.samples_used
        if not rep.passed and witness is None:
            witness = rep.witness
    passed = all(flags.values())
    return CheckReport(passed, float(min(margins.values())), witness, flags, margins, used,
                       details={"mode": mode, "patches": len(patches)})


# ------------------------------------------------------------ affine maps

def affine_map_check(omega: dm.ShapeDomain, C: cx.ConvexBody, M, t, n: int = 1024,
                     tol: float | None = None, n_ellipse: int = 128) -> CheckReport:
    """Re-run the normal-property check after mapping both the domain and C by x -> M x + t."""
    M = np.asarray(M, dtype=np.float64).reshape(2, 2)
    if abs(np.linalg.det(M)) <= 1e-9:
        raise SingularMap(f"|det M| = {abs(np.linalg.det(M)):.3g} is not above 1e-9")
    before = check_c_gnp(omega, C, n, tol)
    mapped_C = cx.transform(C, M, t, max(64, n_ellipse))
    after = check_c_gnp(dm.Mapped(omega, M, t), mapped_C, n, tol)
    after.details = {**after.details, "pre_margin": before.worst_margin, "pre_pass": before.passed,
                     "post_margin": after.worst_margin, "mapped_body": cx.to_dict(mapped_C)["kind"]}
    return after
