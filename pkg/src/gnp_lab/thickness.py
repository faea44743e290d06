"""Thickness of a domain over a convex core and the bilipschitz test for c -> c + d(c) nu(c)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import convex as cx
from . import domain as dm
from ._kernels import pair_ratio_bounds
from .errors import GNPViolated, PreconditionFailed, RayNeverExits
from .gnp import ambient_ball


@dataclass(frozen=True)
class ThicknessField:
    base: cx.ConvexBody
    points: np.ndarray
    normals: np.ndarray
    d: np.ndarray
    chains: tuple
    coverage: float
    K: float
    M: float
    L_nu: float

    @property
    def margin(self) -> float:
        return 1.0 - (self.K + self.M * self.L_nu)

    @property
    def image(self) -> np.ndarray:
        return self.points + self.d[:, None] * self.normals

    def to_dict(self) -> dict:
        return {
            "base": cx.to_dict(self.base),
            "samples": [{"c": p.tolist(), "nu": v.tolist(), "d": float(t)}
                        for p, v, t in zip(self.points, self.normals, self.d)],
            "stats": {"K": self.K, "M": self.M, "L_nu": self.L_nu, "margin": self.margin},
            "coverage": self.coverage,
        }


def _adjacent_quotients(values: np.ndarray, pts: np.ndarray, chains) -> float:
    """max over neighbouring samples of |delta values| / |delta points|."""
    best = 0.0
    for idx, closed in chains:
        if len(idx) < 2:
            continue
        nxt = np.roll(idx, -1) if closed else idx[1:]
        cur = idx if closed else idx[:-1]
        dv = values[nxt] - values[cur]
        dv = np.abs(dv) if dv.ndim == 1 else np.hypot(dv[:, 0], dv[:, 1])
        dc = np.hypot(*(pts[nxt] - pts[cur]).T)
        ok = dc > 0
        if ok.any():
            best = max(best, float((dv[ok] / dc[ok]).max()))
    return best


def cast_exits(omega: dm.ShapeDomain, origins: np.ndarray, dirs: np.ndarray, t_max: np.ndarray,
               steps: int = 512, bisect: int = 60) -> np.ndarray:
    """First exit parameter of each ray from the domain, by coarse march then bisection."""
    frac = (np.arange(steps) + 1.0) / steps
    t = t_max[:, None] * frac[None, :]
    pts = origins[:, None, :] + t[..., None] * dirs[:, None, :]
    inside = omega.contains(pts.reshape(-1, 2)).reshape(t.shape)
    if inside[:, -1].any():
        k = int(np.flatnonzero(inside[:, -1])[0])
        raise RayNeverExits(f"ray from {origins[k].tolist()} is still inside at t = {t_max[k]:.6g}")
    entries = inside & ~np.concatenate([np.ones((inside.shape[0], 1), bool), inside[:, :-1]], axis=1)
    if entries.any():
        k = int(np.flatnonzero(entries.any(axis=1))[0])
        raise GNPViolated(f"outward ray from {origins[k].tolist()} re-enters the domain")
    first_out = np.argmin(inside, axis=1)
    lo = np.where(first_out > 0, t[np.arange(t.shape[0]), np.maximum(first_out - 1, 0)], 0.0)
    hi = t[np.arange(t.shape[0]), first_out]
    if np.any(first_out == 0):
        probe = origins + (1e-12 * t_max)[:, None] * dirs
        dead = ~omega.contains(probe) & (first_out == 0)
        if dead.any():
            k = int(np.flatnonzero(dead)[0])
            raise GNPViolated(f"thickness vanishes at {origins[k].tolist()}")
    for _ in range(bisect):
        mid = 0.5 * (lo + hi)
        ins = omega.contains(origins + mid[:, None] * dirs)
        lo = np.where(ins, mid, lo)
        hi = np.where(ins, hi, mid)
    return 0.5 * (lo + hi)


def compute_thickness(C: cx.ConvexBody, omega: dm.ShapeDomain, n: int = 512, steps: int = 512) -> ThicknessField:
    """Thickness d(c) along the outward normal at n boundary samples of C.

    Polytope samples avoid vertices and segment samples skip the end caps;
    ``coverage`` is the fraction of the boundary carrying samples.
    """
    cb = cx.sample_boundary(C, n)
    if len(cb.points) < 2:
        raise PreconditionFailed("convex body has no boundary normals to sample")
    center, radius = ambient_ball(omega, C)
    w = cb.points - center
    b = (w * cb.normals).sum(axis=1)
    t_max = -b + np.sqrt(np.maximum(b * b - (w * w).sum(axis=1) + radius**2, 0.0))
    d = cast_exits(omega, cb.points, cb.normals, t_max, steps)
    K = _adjacent_quotients(d, cb.points, cb.chains)
    L_nu = _adjacent_quotients(cb.normals, cb.points, cb.chains)
    return ThicknessField(C, cb.points, cb.normals, d, cb.chains, cb.coverage, K, float(d.max()), L_nu)


def bilipschitz_margin(field: ThicknessField) -> tuple[float, bool]:
    m = field.margin
    return m, m > 0


def lipschitz_upper(field: ThicknessField) -> float:
    return 1.0 + field.K + field.M * field.L_nu


def empirical_ratio_bounds(field: ThicknessField) -> tuple[float, float]:
    """min and max of |Phi(c_i) - Phi(c_j)| / |c_i - c_j| over all sample pairs."""
    if field.points.shape[0] < 2:
        raise PreconditionFailed("ratio bounds need at least two samples")
    return pair_ratio_bounds(field.points, field.image)
