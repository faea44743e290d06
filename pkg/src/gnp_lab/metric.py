"""Hausdorff-type distances and set-convergence diagnostics.

Three notions of convergence are compared on one shared raster: distance of
complements (H), inclusion of probe compacts (K) and L1 distance of
indicator functions (L).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import distance_transform_edt
from scipy.spatial import cKDTree

from . import convex as cx
from . import domain as dm
from . import gnp
from ._config import resolve_tol
from ._kernels import directed_hausdorff
from .errors import EmptySet, PreconditionFailed, ResolutionTooCoarse


# ---------------------------------------------------------------- point sets

def _pts(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        return a.reshape(-1, 1)
    return a if a.ndim == 2 else a.reshape(a.shape[0], -1)


def _directed_kdtree(a: np.ndarray, b: np.ndarray) -> float:
    _, j = cKDTree(b).query(a)
    d2 = ((a - b[j]) ** 2).sum(axis=1)
    return float(np.sqrt(d2.max()))


def hausdorff_distance(A, B, method: str = "brute") -> float:
    """max of the two directed sup-inf distances between finite point sets.

    ``method="kdtree"`` finds nearest neighbours with a k-d tree and then
    recomputes the winning distances with the brute-force formula, so both
    methods return the same floats.
    """
    a, b = _pts(A), _pts(B)
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise EmptySet("Hausdorff distance needs two nonempty sets")
    if method == "kdtree":
        return max(_directed_kdtree(a, b), _directed_kdtree(b, a))
    if method != "brute":
        raise ValueError(f"unknown method {method!r}")
    return max(directed_hausdorff(a, b)[0], directed_hausdorff(b, a)[0])


def _mask_hausdorff(a: np.ndarray, b: np.ndarray, h: float) -> float:
    """Hausdorff distance between two raster cell sets, in length units."""
    if not a.any() or not b.any():
        raise EmptySet("raster set is empty")
    if np.array_equal(a, b):
        return 0.0
    to_b = distance_transform_edt(~b)
    to_a = distance_transform_edt(~a)
    return float(max(to_b[a].max(), to_a[b].max()) * h)


# ------------------------------------------------------------------- rasters

def shared_box(domains, pad: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    los, his = zip(*(d.bbox() for d in domains))
    lo = np.min(np.array(los), axis=0) - pad
    hi = np.max(np.array(his), axis=0) + pad
    return lo, hi


def _check_resolution(h: float, *domains) -> None:
    for d in domains:
        f = d.feature_size()
        if h > f:
            raise ResolutionTooCoarse(f"h = {h:.4g} exceeds the feature size {f:.4g} of a {d.kind} domain")


def open_set_distance(omega1: dm.ShapeDomain, omega2: dm.ShapeDomain, box=None, h: float | None = None,
                      check_resolution: bool = True) -> tuple[float, float]:
    """Hausdorff distance between the complements of two open sets inside ``box``.

    Returns ``(distance, error_bound)`` with the raster error bound h*sqrt(2).
    """
    if box is None:
        lo, hi = shared_box([omega1, omega2])
        span = float(np.max(hi - lo))
        box = (lo - 0.05 * span, hi + 0.05 * span)
    lo, hi = (np.asarray(b, float) for b in box)
    if h is None:
        h = float(np.max(hi - lo)) / 256
    if check_resolution:
        _check_resolution(h, omega1, omega2)
    g1 = dm.characteristic_grid(omega1, h, (lo, hi))
    g2 = dm.characteristic_grid(omega2, h, (lo, hi))
    return _mask_hausdorff(~g1.mask, ~g2.mask, h), h * np.sqrt(2)


# ------------------------------------------------------------ convergence

@dataclass
class ConvergenceReport:
    indices: list
    h: float
    hausdorff: list
    k_verdicts: list
    l1: list
    thresholds: dict
    crossing: dict
    modes_agree: bool
    per_index_agree: list
    closure_distances: list
    boundary_distances: list
    closure_limit_matches: bool
    boundary_limit_matches: bool
    separation: list | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "indices": [int(i) for i in self.indices],
            "h": float(self.h),
            "hausdorff": [float(v) for v in self.hausdorff],
            "k_verdicts": [[bool(v) for v in row] for row in self.k_verdicts],
            "l1": [float(v) for v in self.l1],
            "thresholds": {k: float(v) for k, v in self.thresholds.items()},
            "crossing": {k: (None if v is None else int(v)) for k, v in self.crossing.items()},
            "modes_agree": bool(self.modes_agree),
            "per_index_agree": [bool(v) for v in self.per_index_agree],
            "closure_distances": [float(v) for v in self.closure_distances],
            "boundary_distances": [float(v) for v in self.boundary_distances],
            "closure_limit_matches": bool(self.closure_limit_matches),
            "boundary_limit_matches": bool(self.boundary_limit_matches),
            "separation": None if self.separation is None else [float(v) for v in self.separation],
            **({"extra": self.extra} if self.extra else {}),
        }


def _boundary_points(omega: dm.ShapeDomain, n: int) -> np.ndarray:
    return omega.sample_boundary(n).points


def _eventual_crossing(ok: list[bool], indices: list) -> int | None:
    """First index from which the statistic stays under its threshold."""
    pos = None
    for i in range(len(ok) - 1, -1, -1):
        if not ok[i]:
            break
        pos = i
    return None if pos is None else indices[pos]


def _limit_matches(dist: list[float], thr: float) -> bool:
    """Final distance is under the threshold, or has dropped below a quarter of its peak while decreasing."""
    d = np.asarray(dist, float)
    if d[-1] <= thr:
        return True
    tail = d[len(d) * 2 // 3:]
    decreasing = bool(np.all(np.diff(tail) <= thr))
    return decreasing and d[-1] <= 0.25 * d.max()


def convergence_report(seq, limit: dm.ShapeDomain, box=None, h: float | None = None, probes=None,
                       indices=None, n_boundary: int = 2048, check_resolution: bool = False) -> ConvergenceReport:
    """Compare H-, K- and L-convergence of ``seq`` to ``limit`` on one raster.

    ``probes`` is a list of ``(mask, inside)`` pairs on the shared raster:
    ``inside`` probes must be covered by the sequence members, outside probes
    must avoid them. The default ladder erodes the limit and its complement by
    2h, 4h and 8h.
    """
    seq = list(seq)
    if len(seq) < 3:
        raise PreconditionFailed("convergence report needs at least 3 sequence members")
    indices = list(range(len(seq))) if indices is None else list(indices)
    dim = limit.dim
    if box is None:
        lo, hi = shared_box(seq + [limit])
        span = float(np.max(hi - lo))
        box = (lo - 0.1 * span, hi + 0.1 * span)
    lo, hi = (np.asarray(b, float) for b in box)
    if dim == 1:
        lo, hi = lo[:1], hi[:1]
    if h is None:
        h = float(np.max(hi - lo)) / 256
    if check_resolution:
        _check_resolution(h, limit, *seq)
    lim_grid = dm.characteristic_grid(limit, h, (lo, hi))
    lim_mask = lim_grid.mask
    masks = [dm.characteristic_grid(o, h, (lo, hi)).mask for o in seq]

    if probes is None:
        probes = []
        inner_dist = distance_transform_edt(lim_mask) * h
        outer_dist = distance_transform_edt(~lim_mask) * h
        for r in (2 * h, 4 * h, 8 * h):
            probes.append((inner_dist > r, True))
            probes.append((outer_dist > r, False))

    perim = limit.perimeter_estimate()
    thresholds = {"H": 2 * h, "L": 4 * h * perim, "K": 1.0}
    H, L, K, kstat = [], [], [], []
    for m in masks:
        H.append(_mask_hausdorff(~m, ~lim_mask, h))
        L.append(float(np.logical_xor(m, lim_mask).sum()) * h**dim)
        row = [bool(np.all(m[p])) if inside else bool(not np.any(m[p])) for p, inside in probes]
        K.append(row)
        kstat.append(all(row))
    okH = [v <= thresholds["H"] for v in H]
    okL = [v <= thresholds["L"] for v in L]
    crossing = {"H": _eventual_crossing(okH, indices), "K": _eventual_crossing(kstat, indices),
                "L": _eventual_crossing(okL, indices)}
    per_index = [a == b == c for a, b, c in zip(okH, kstat, okL)]

    # closures on the raster (cells plus cells hit by boundary samples); boundaries from analytic samples
    def closure_mask(o, m):
        out = m.copy()
        pts = _boundary_points(o, n_boundary)
        if dim == 1:
            idx = np.floor((pts[:, 0] - lo[0]) / h).astype(int)
            idx = idx[(idx >= 0) & (idx < out.shape[0])]
            out[idx] = True
        else:
            ix = np.floor((pts[:, 0] - lo[0]) / h).astype(int)
            iy = np.floor((pts[:, 1] - lo[1]) / h).astype(int)
            ok = (ix >= 0) & (ix < out.shape[1]) & (iy >= 0) & (iy < out.shape[0])
            out[iy[ok], ix[ok]] = True
        return out

    lim_closure = closure_mask(limit, lim_mask)
    lim_bd = _boundary_points(limit, n_boundary)
    clos, bds = [], []
    for o, m in zip(seq, masks):
        clos.append(_mask_hausdorff(closure_mask(o, m), lim_closure, h))
        bds.append(hausdorff_distance(_boundary_points(o, n_boundary), lim_bd, method="kdtree"))
    spacing = perim / max(lim_bd.shape[0], 1) if dim == 2 else 0.0
    match_thr = 2 * h + spacing

    separation = None
    if all(isinstance(o, dm.DisjointPair) for o in seq):
        separation = [gnp.pair_separation(o) for o in seq]

    return ConvergenceReport(
        indices=indices, h=h, hausdorff=H, k_verdicts=K, l1=L, thresholds=thresholds, crossing=crossing,
        modes_agree=bool(per_index[-1]), per_index_agree=per_index,
        closure_distances=clos, boundary_distances=bds,
        closure_limit_matches=_limit_matches(clos, match_thr),
        boundary_limit_matches=_limit_matches(bds, match_thr),
        separation=separation,
        extra={"final_verdicts": {"H": bool(okH[-1]), "K": bool(kstat[-1]), "L": bool(okL[-1])}},
    )


# --------------------------------------------------------- 1 - 4 eps bound

@dataclass
class GBoundRow:
    min_G: float
    bound: float
    satisfied: bool

    def to_dict(self) -> dict:
        return {"min_G": float(self.min_G), "bound": float(self.bound), "satisfied": bool(self.satisfied)}


def verify_G_bound(seq, eps_seq, contact=None, tol: float | None = None, n: int = 4096) -> list[GBoundRow]:
    """Compare min G against 1 - 4 eps for radius functions passing the eps-ball check."""
    tol = resolve_tol(tol)
    seq = list(seq)
    contact = [True] * len(seq) if contact is None else list(contact)
    rows = []
    for omega, eps, touch in zip(seq, eps_seq, contact):
        if not isinstance(omega, dm.StarPolar):
            raise PreconditionFailed("radius bound needs star-polar domains")
        g_min, g_max = omega.dense_extrema(n)
        if touch and abs(g_max - 1.0) > 1e-9:
            raise PreconditionFailed(f"contact requires max G = 1, got {g_max:.12g}")
        rep = gnp.check_eps_ball_gnp(omega, eps, tol)
        if not rep.passed:
            raise PreconditionFailed(f"eps-ball check fails at eps = {eps} (margin {rep.worst_margin:.3g})")
        bound = 1 - 4 * eps
        rows.append(GBoundRow(g_min, bound, g_min >= bound - tol))
    return rows


def random_feasible_G(rng: np.random.Generator, eps: float, n_theta: int = 64, modes: int = 4,
                      max_tries: int = 10_000) -> dm.StarPolar:
    """Rejection-sample a smooth radius function with max 1 that passes the eps-ball check."""
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    k = np.arange(1, modes + 1)
    for _ in range(max_tries):
        scale = rng.uniform(0.0, 3.0 * eps)
        a = rng.normal(size=modes) / k**2
        b = rng.normal(size=modes) / k**2
        G = 1 + scale * (np.cos(np.outer(theta, k)) @ a + np.sin(np.outer(theta, k)) @ b) / max(np.abs(a).sum() + np.abs(b).sum(), 1e-12)
        omega = dm.StarPolar((0.0, 0.0), G)
        G = G / omega.dense_extrema()[1]
        omega = dm.StarPolar((0.0, 0.0), G)
        if omega.dense_extrema()[0] <= eps:
            continue
        if gnp.check_eps_ball_gnp(omega, eps).passed:
            return omega
    raise PreconditionFailed("rejection sampler found no feasible radius function")


# ----------------------------------------------------------- dilation limit

@dataclass
class DilationRow:
    scale: float
    eps: float
    volume: float

    def to_dict(self) -> dict:
        return {"scale": float(self.scale), "eps": float(self.eps), "volume": float(self.volume)}


def _polar_extent(omega: dm.ShapeDomain, n: int) -> tuple[float, float]:
    if isinstance(omega, dm.StarPolar) and np.allclose(omega.center, 0.0):
        return omega.dense_extrema(n)
    r = np.hypot(*omega.sample_boundary(n).points.T)
    return float(r.min()), float(r.max())


def _area(omega: dm.ShapeDomain) -> float:
    if isinstance(omega, dm.StarPolar):
        th = 2 * np.pi * np.arange(4096) / 4096
        return float(0.5 * (omega.radius(th) ** 2).mean() * 2 * np.pi)
    lo, hi = omega.bbox()
    h = float(np.max(hi - lo)) / 400
    return dm.characteristic_grid(omega, h).measure()


def dilation_limit_experiment(seq, C: cx.ConvexBody, n: int = 2048, tol: float | None = None,
                              check: bool = True) -> list[DilationRow]:
    """Rescale each domain by 1 / (max polar radius about O) and measure the ball sandwich.

    eps_n is the smallest value with B(O, 1 - eps) inside and B(O, 1) outside
    the rescaled domain, i.e. 1 - min|x| / max|x| over its boundary.
    """
    tol = resolve_tol(tol)
    ball_C = cx.Ball((0.0, 0.0), cx.outer_radius(C))
    rows = []
    prev_vol = -np.inf
    for omega in seq:
        if check:
            rep = gnp.check_c_gnp(omega, ball_C, min(n, 1024), tol)
            if not rep.passed:
                raise PreconditionFailed(f"sequence member fails the ball normal-property check (margin {rep.worst_margin:.3g})")
        vol = _area(omega)
        if vol <= prev_vol:
            raise PreconditionFailed("volumes must increase along the sequence")
        prev_vol = vol
        r_min, r_max = _polar_extent(omega, n)
        rows.append(DilationRow(1.0 / r_max, 1.0 - r_min / r_max, vol))
    return rows
