"""Open planar (and 1-D) domains, the example gallery, boundary sampling and rasters.

Every domain answers three questions: which points are inside (``contains``),
what its boundary looks like with analytic inward normals
(``sample_boundary``), and how it transforms under dilation or an affine map.
Normals are never obtained by differencing samples.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.spatial import cKDTree

from . import convex as cx
from ._config import resolve_tol
from ._kernels import points_in_polygon
from .errors import DegenerateDomain, NonPositiveParam, UnknownGallery


# ------------------------------------------------------------ boundary data

@dataclass(frozen=True)
class BoundarySample:
    point: np.ndarray
    inward_normal: np.ndarray | None
    smooth: bool
    param: float


@dataclass(frozen=True)
class BoundarySet:
    """Column-oriented boundary samples.

    ``normals`` holds NaN rows where ``smooth`` is false. ``chains`` lists
    index arrays in boundary order together with a closed flag, so polyline
    lengths can be rebuilt.
    """

    points: np.ndarray
    normals: np.ndarray
    smooth: np.ndarray
    param: np.ndarray
    chains: tuple = ()

    def __len__(self) -> int:
        return int(self.points.shape[0])

    def __getitem__(self, i: int) -> BoundarySample:
        nrm = self.normals[i] if self.smooth[i] else None
        return BoundarySample(self.points[i], nrm, bool(self.smooth[i]), float(self.param[i]))

    def __iter__(self) -> Iterator[BoundarySample]:
        return (self[i] for i in range(len(self)))

    def polyline_length(self) -> float:
        total = 0.0
        for idx, closed in self.chains:
            p = self.points[idx]
            if closed and len(idx) > 1:
                p = np.vstack([p, p[:1]])
            if len(p) > 1:
                total += float(np.hypot(*np.diff(p, axis=0).T).sum())
        return total

    @staticmethod
    def concat(parts: Sequence["BoundarySet"]) -> "BoundarySet":
        parts = [p for p in parts if len(p)]
        if not parts:
            return _empty_boundary()
        offsets = np.cumsum([0] + [len(p) for p in parts[:-1]])
        chains = tuple((idx + off, closed) for p, off in zip(parts, offsets) for idx, closed in p.chains)
        return BoundarySet(
            np.vstack([p.points for p in parts]),
            np.vstack([p.normals for p in parts]),
            np.concatenate([p.smooth for p in parts]),
            np.concatenate([p.param for p in parts]),
            chains,
        )

    def subset(self, mask: np.ndarray) -> "BoundarySet":
        keep = np.flatnonzero(mask)
        remap = np.full(len(self), -1)
        remap[keep] = np.arange(keep.size)
        chains = []
        for idx, closed in self.chains:
            kept = mask[idx]
            if kept.all():
                chains.append((remap[idx], closed))
                continue
            # split into runs of kept samples; a split chain is never closed
            runs = np.split(idx, np.flatnonzero(np.diff(kept.astype(int)) != 0) + 1)
            if closed and kept[0] and kept[-1] and len(runs) > 1:
                runs = [np.concatenate([runs[-1], runs[0]])] + runs[1:-1]
            for r in runs:
                if mask[r[0]]:
                    chains.append((remap[r], False))
        return BoundarySet(self.points[keep], self.normals[keep], self.smooth[keep], self.param[keep], tuple(chains))


def _empty_boundary() -> BoundarySet:
    return BoundarySet(np.zeros((0, 2)), np.zeros((0, 2)), np.zeros(0, bool), np.zeros(0), ())


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.hypot(v[:, 0], v[:, 1])[:, None]


# ---------------------------------------------------------------- base class

class ShapeDomain:
    kind: str = "abstract"
    dim: int = 2

    def contains(self, pts) -> np.ndarray:
        raise NotImplementedError

    def sample_boundary(self, n: int) -> BoundarySet:
        raise NotImplementedError

    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def feature_size(self) -> float:
        """Smallest length scale the domain declares (used to reject coarse rasters)."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def dilate(self, factor: float, center=(0.0, 0.0)) -> "ShapeDomain":
        c = np.asarray(center, float)
        return Mapped(self, factor * np.eye(2), (1 - factor) * c)

    def perimeter_estimate(self, n: int = 4096) -> float:
        return self.sample_boundary(n).polyline_length()

    def outer_radius(self, center=(0.0, 0.0), n: int = 4096) -> float:
        pts = self.sample_boundary(n).points
        return float(np.hypot(*(pts - np.asarray(center, float)).T).max())


def _as_pts(pts) -> np.ndarray:
    return np.asarray(pts, dtype=np.float64).reshape(-1, 2)


# ---------------------------------------------------------------- star polar

def _fourier_coeffs(samples: np.ndarray) -> np.ndarray:
    n = samples.shape[0]
    c = np.fft.rfft(samples) / n
    c[1:] *= 2.0
    if n % 2 == 0:
        c[-1] /= 2.0
    return c


def _fourier_eval(coeffs: np.ndarray, theta: np.ndarray, deriv: int = 0) -> np.ndarray:
    """Evaluate the real trigonometric series (or its derivative) by angle-addition recurrence."""
    theta = np.asarray(theta, dtype=np.float64)
    k = np.arange(coeffs.shape[0])
    w = coeffs * (1j * k) ** deriv
    live = np.abs(w) > 1e-15 * max(np.abs(coeffs).max(), 1e-300)
    top = int(np.flatnonzero(live).max()) if live.any() else 0
    out = np.full(theta.shape, w[0].real)
    c1, s1 = np.cos(theta), np.sin(theta)
    ck, sk = np.ones_like(theta), np.zeros_like(theta)
    for j in range(1, top + 1):
        ck, sk = ck * c1 - sk * s1, sk * c1 + ck * s1
        if live[j]:
            out += w[j].real * ck - w[j].imag * sk
    return out


class StarPolar(ShapeDomain):
    """{center + r(cos t, sin t) : 0 <= r < G(t)} with G held on a uniform t-grid.

    Between grid points G is the trigonometric interpolant of the samples, so
    G' is spectral and any band-limited radius function is represented exactly.
    """

    kind = "star_polar"

    def __init__(self, center, G):
        G = np.asarray(G, dtype=np.float64).ravel()
        if G.size < 16:
            raise DegenerateDomain(f"star-polar grid needs >= 16 samples, got {G.size}")
        if not np.all(G > 0):
            raise DegenerateDomain("star-polar radius must be positive at every sample")
        self.center = np.asarray(center, dtype=np.float64).reshape(2)
        self.G = G
        self._coeffs = _fourier_coeffs(G)

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], n: int = 128, center=(0.0, 0.0)) -> "StarPolar":
        theta = 2 * np.pi * np.arange(n) / n
        return cls(center, fn(theta))

    @property
    def n_theta(self) -> int:
        return int(self.G.size)

    def radius(self, theta) -> np.ndarray:
        return _fourier_eval(self._coeffs, theta)

    def radius_derivative(self, theta) -> np.ndarray:
        return _fourier_eval(self._coeffs, theta, 1)

    def contains(self, pts) -> np.ndarray:
        d = _as_pts(pts) - self.center
        r = np.hypot(d[:, 0], d[:, 1])
        return r < self.radius(np.arctan2(d[:, 1], d[:, 0]))

    def sample_boundary(self, n: int) -> BoundarySet:
        th = 2 * np.pi * np.arange(n) / n
        g = self.radius(th)
        gp = self.radius_derivative(th)
        er = np.column_stack([np.cos(th), np.sin(th)])
        et = np.column_stack([-np.sin(th), np.cos(th)])
        pts = self.center + g[:, None] * er
        nrm = (gp[:, None] * et - g[:, None] * er) / np.sqrt(g**2 + gp**2)[:, None]
        return BoundarySet(pts, nrm, np.ones(n, bool), th, ((np.arange(n), True),))

    def dense_extrema(self, n: int = 4096) -> tuple[float, float]:
        g = self.radius(2 * np.pi * np.arange(n) / n)
        return float(g.min()), float(g.max())

    def bbox(self):
        r = self.dense_extrema()[1]
        return self.center - r, self.center + r

    def feature_size(self) -> float:
        return self.dense_extrema()[0]

    def outer_radius(self, center=(0.0, 0.0), n: int = 4096) -> float:
        if np.allclose(center, self.center):
            return self.dense_extrema(n)[1]
        return super().outer_radius(center, n)

    def dilate(self, factor: float, center=(0.0, 0.0)) -> "StarPolar":
        c = np.asarray(center, float)
        return StarPolar(c + factor * (self.center - c), factor * self.G)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "center": self.center.tolist(), "G": self.G.tolist()}


# --------------------------------------------------------------------- graph

class Graph(ShapeDomain):
    """{(x, y) : x_lo < x < x_hi, |y| < phi(x)}, phi piecewise linear on knots ``x``.

    Optional ``dphi`` supplies exact slopes at the knots; the boundary is then
    sampled at the knots only and normals use those slopes. Zeros of phi
    inside the interval pinch the domain; the samples there are corners.
    """

    kind = "graph"

    def __init__(self, x, phi, dphi=None):
        x = np.asarray(x, dtype=np.float64).ravel()
        phi = np.asarray(phi, dtype=np.float64).ravel()
        if x.size < 2 or x.size != phi.size:
            raise DegenerateDomain("graph needs matching x and phi arrays with >= 2 knots")
        if not np.all(np.diff(x) > 0):
            raise DegenerateDomain("graph knots must be strictly increasing")
        if np.any(phi < 0) or not np.all(np.isfinite(phi)):
            raise DegenerateDomain("graph profile must be finite and nonnegative")
        if not np.any(phi > 0):
            raise DegenerateDomain("graph profile vanishes identically")
        self.x = x
        self.phi = phi
        self.dphi = None if dphi is None else np.asarray(dphi, dtype=np.float64).ravel()
        if self.dphi is not None and self.dphi.size != x.size:
            raise DegenerateDomain("dphi must match the knots")

    @classmethod
    def from_function(cls, fn, dfn=None, x_lo: float = -1.0, x_hi: float = 1.0, m: int = 201) -> "Graph":
        x = np.linspace(x_lo, x_hi, m)
        with np.errstate(all="ignore"):
            return cls(x, fn(x), None if dfn is None else dfn(x))

    @property
    def interval(self) -> tuple[float, float]:
        return float(self.x[0]), float(self.x[-1])

    def profile(self, xq) -> np.ndarray:
        return np.interp(xq, self.x, self.phi, left=0.0, right=0.0)

    def contains(self, pts) -> np.ndarray:
        p = _as_pts(pts)
        inside_x = (p[:, 0] > self.x[0]) & (p[:, 0] < self.x[-1])
        return inside_x & (np.abs(p[:, 1]) < self.profile(p[:, 0]))

    def upper_length(self) -> float:
        return float(np.hypot(np.diff(self.x), np.diff(self.phi)).sum())

    def _upper_samples(self, n_target: int):
        """Upper-curve samples (x, phi, slope, smooth) in increasing x."""
        x, phi = self.x, self.phi
        if self.dphi is not None:
            slope = self.dphi.copy()
            smooth = (phi > 0) & np.isfinite(slope)
            return x.copy(), phi.copy(), np.where(smooth, slope, np.nan), smooth
        seg_slope = np.diff(phi) / np.diff(x)
        seg_len = np.hypot(np.diff(x), np.diff(phi))
        total = seg_len.sum()
        per_seg = np.maximum(1, np.ceil(n_target * seg_len / total).astype(int))
        xs, ps, ss, sm = [], [], [], []
        for i in range(x.size - 1):
            xs.append([x[i]])
            ps.append([phi[i]])
            ss.append([np.nan])
            sm.append([False])
            s = (np.arange(per_seg[i]) + 0.5) / per_seg[i]
            xi = x[i] + s * (x[i + 1] - x[i])
            pi = phi[i] + s * (phi[i + 1] - phi[i])
            live = (pi > 0) | (seg_slope[i] != 0)
            xs.append(xi[live])
            ps.append(pi[live])
            ss.append(np.full(live.sum(), seg_slope[i]))
            sm.append(np.ones(live.sum(), bool))
        xs.append([x[-1]])
        ps.append([phi[-1]])
        ss.append([np.nan])
        sm.append([False])
        xs, ps, ss, sm = (np.concatenate(a) for a in (xs, ps, ss, sm))
        # interior knots where the slope does not jump and phi > 0 are smooth
        knot_pos = np.flatnonzero(np.isin(xs, x[1:-1]) & ~sm)
        for k in knot_pos:
            i = int(np.searchsorted(x, xs[k]))
            if phi[i] > 0 and abs(seg_slope[i - 1] - seg_slope[i]) <= 1e-12 * max(1.0, abs(seg_slope[i])):
                ss[k] = seg_slope[i]
                sm[k] = True
        # drop knots sitting inside flat zero stretches: they are not boundary points
        keep = np.ones(xs.size, bool)
        zero_seg = (phi[:-1] == 0) & (phi[1:] == 0)
        for k in np.flatnonzero(~sm):
            i = int(np.searchsorted(x, xs[k]))
            left_zero = i > 0 and zero_seg[i - 1]
            right_zero = i < zero_seg.size and zero_seg[i]
            at_end = i == 0 or i == x.size - 1
            if (left_zero or at_end) and (right_zero or at_end) and not (at_end and phi[i] > 0):
                keep[k] = False
        return xs[keep], ps[keep], ss[keep], sm[keep]

    def sample_boundary(self, n: int) -> BoundarySet:
        xs, ps, ss, sm = self._upper_samples(max(n // 2, 1))
        up = np.column_stack([xs, ps])
        with np.errstate(invalid="ignore"):
            n_up = _unit(np.column_stack([ss, -np.ones_like(ss)]))
            n_lo = _unit(np.column_stack([ss, np.ones_like(ss)]))
        n_up[~sm] = np.nan
        n_lo[~sm] = np.nan
        on_axis = ps == 0
        lo_pts = up[~on_axis][::-1] * np.array([1.0, -1.0])
        parts = [BoundarySet(up, n_up, sm, xs, ((np.arange(xs.size), False),)),
                 BoundarySet(lo_pts, n_lo[~on_axis][::-1], sm[~on_axis][::-1], xs[~on_axis][::-1],
                             ((np.arange(lo_pts.shape[0]), False),))]
        for end, inward in ((0, 1.0), (-1, -1.0)):
            h = self.phi[end]
            if h > 0:
                k = max(2, int(np.ceil(n * h / max(self.perimeter_bound(), 1e-12))))
                y = h * (2 * (np.arange(k) + 0.5) / k - 1)
                pts = np.column_stack([np.full(k, self.x[end]), y])
                nrm = np.tile([inward, 0.0], (k, 1))
                parts.append(BoundarySet(pts, nrm, np.ones(k, bool), np.full(k, self.x[end]), ((np.arange(k), False),)))
        out = BoundarySet.concat(parts)
        if len(out) == 0:
            raise DegenerateDomain("graph has no boundary")
        return out

    def perimeter_bound(self) -> float:
        return 2 * self.upper_length() + 2 * (self.phi[0] + self.phi[-1])

    def perimeter_estimate(self, n: int = 4096) -> float:
        return self.perimeter_bound()

    def bbox(self):
        h = float(self.phi.max())
        return np.array([self.x[0], -h]), np.array([self.x[-1], h])

    def feature_size(self) -> float:
        return float(np.diff(self.x).min())

    def dilate(self, factor: float, center=(0.0, 0.0)) -> ShapeDomain:
        c = np.asarray(center, float)
        if c[1] != 0.0:
            return super().dilate(factor, center)
        dphi = self.dphi
        return Graph(c[0] + factor * (self.x - c[0]), factor * self.phi, dphi)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "x": self.x.tolist(), "phi": self.phi.tolist()}
        if self.dphi is not None:
            d["dphi"] = [v if np.isfinite(v) else None for v in self.dphi.tolist()]
        return d


# ---------------------------------------------------------------- ball union

class BallUnion(ShapeDomain):
    kind = "ball_union"

    def __init__(self, balls):
        centers, radii = [], []
        for c, r in balls:
            if not r > 0:
                raise DegenerateDomain(f"ball radius must be positive, got {r}")
            centers.append(np.asarray(c, dtype=np.float64).reshape(2))
            radii.append(float(r))
        if not radii:
            raise DegenerateDomain("ball union is empty")
        self.centers = np.array(centers)
        self.radii = np.array(radii)

    def contains(self, pts) -> np.ndarray:
        p = _as_pts(pts)
        out = np.zeros(p.shape[0], bool)
        for c, r in zip(self.centers, self.radii):
            out |= np.hypot(*(p - c).T) < r
        return out

    def _crossings(self, i: int) -> np.ndarray:
        """Angles on circle i where it meets another circle."""
        angles = []
        ci, ri = self.centers[i], self.radii[i]
        for j, (cj, rj) in enumerate(zip(self.centers, self.radii)):
            if j == i:
                continue
            d = np.hypot(*(cj - ci))
            if d == 0 or d > ri + rj + 1e-12 or d < abs(ri - rj) - 1e-12:
                continue
            base = np.arctan2(cj[1] - ci[1], cj[0] - ci[0])
            cosang = np.clip((ri**2 + d**2 - rj**2) / (2 * ri * d), -1.0, 1.0)
            a = np.arccos(cosang)
            angles.extend([base - a, base + a] if a > 0 else [base])
        return np.mod(np.array(angles, dtype=np.float64), 2 * np.pi)

    def sample_boundary(self, n: int, tol: float | None = None) -> BoundarySet:
        tol = resolve_tol(tol)
        circ = self.radii / self.radii.sum()
        parts = []
        for i, (c, r) in enumerate(zip(self.centers, self.radii)):
            k = max(8, int(np.ceil(n * circ[i])))
            th = 2 * np.pi * np.arange(k) / k
            cross = self._crossings(i)
            th_all = np.unique(np.concatenate([th, cross]))
            pts = c + r * np.column_stack([np.cos(th_all), np.sin(th_all)])
            covered = np.zeros(th_all.size, bool)
            corner = np.zeros(th_all.size, bool)
            for j, (cj, rj) in enumerate(zip(self.centers, self.radii)):
                if j == i:
                    continue
                dj = np.hypot(*(pts - cj).T)
                covered |= dj < rj - tol
                corner |= np.abs(dj - rj) <= tol
            keep = ~covered
            if not keep.any():
                continue
            nrm = (c - pts) / r
            smooth = ~corner
            nrm[~smooth] = np.nan
            piece = BoundarySet(pts, nrm, smooth, th_all, ((np.arange(th_all.size), True),))
            parts.append(piece.subset(keep))
        out = BoundarySet.concat(parts)
        if len(out) == 0:
            raise DegenerateDomain("ball union has empty boundary")
        return out

    def bbox(self):
        return (self.centers - self.radii[:, None]).min(axis=0), (self.centers + self.radii[:, None]).max(axis=0)

    def feature_size(self) -> float:
        return float(self.radii.min())

    def outer_radius(self, center=(0.0, 0.0), n: int = 4096) -> float:
        return float((np.hypot(*(self.centers - np.asarray(center, float)).T) + self.radii).max())

    def dilate(self, factor: float, center=(0.0, 0.0)) -> "BallUnion":
        c = np.asarray(center, float)
        return BallUnion([(c + factor * (ci - c), factor * ri) for ci, ri in zip(self.centers, self.radii)])

    def to_dict(self) -> dict:
        return {"kind": self.kind,
                "balls": [{"center": c.tolist(), "radius": float(r)} for c, r in zip(self.centers, self.radii)]}


# ------------------------------------------------------------- disjoint pair

def closure_distance(a: ShapeDomain, b: ShapeDomain, n: int = 2048) -> float:
    """Distance between the closures of two planar domains.

    Exact for single balls; otherwise the nearest pair of boundary samples,
    returning 0 when either domain contains a boundary sample of the other.
    """
    if isinstance(a, BallUnion) and isinstance(b, BallUnion):
        d = np.hypot(*(a.centers[:, None, :] - b.centers[None, :, :]).transpose(2, 0, 1))
        gap = d - a.radii[:, None] - b.radii[None, :]
        return float(max(gap.min(), 0.0))
    pa, pb = a.sample_boundary(n).points, b.sample_boundary(n).points
    if a.contains(pb).any() or b.contains(pa).any():
        return 0.0
    d, _ = cKDTree(pb).query(pa)
    return float(d.min())


class DisjointPair(ShapeDomain):
    kind = "disjoint_pair"

    def __init__(self, first: ShapeDomain, second: ShapeDomain, delta: float, tol: float | None = None):
        if not delta > 0:
            raise NonPositiveParam(f"separation delta must be positive, got {delta}")
        self.first = first
        self.second = second
        self.delta = float(delta)
        self.separation = closure_distance(first, second)
        if self.separation < self.delta - resolve_tol(tol):
            raise DegenerateDomain(f"components are {self.separation:.6g} apart, below delta {self.delta:.6g}")

    def contains(self, pts) -> np.ndarray:
        return self.first.contains(pts) | self.second.contains(pts)

    def sample_boundary(self, n: int) -> BoundarySet:
        return BoundarySet.concat([self.first.sample_boundary(n // 2), self.second.sample_boundary(n - n // 2)])

    def bbox(self):
        a, b = self.first.bbox(), self.second.bbox()
        return np.minimum(a[0], b[0]), np.maximum(a[1], b[1])

    def feature_size(self) -> float:
        return min(self.first.feature_size(), self.second.feature_size(), self.delta)

    def dilate(self, factor: float, center=(0.0, 0.0)) -> "DisjointPair":
        return DisjointPair(self.first.dilate(factor, center), self.second.dilate(factor, center), factor * self.delta)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "first": self.first.to_dict(), "second": self.second.to_dict(), "delta": self.delta}


# ----------------------------------------------------------------- intervals

class Intervals1D(ShapeDomain):
    """Finite union of disjoint open intervals on the x-axis.

    Points are given as ``(n, 2)`` arrays (the y coordinate is ignored) or as
    1-D coordinate arrays.
    """

    kind = "intervals_1d"
    dim = 1

    def __init__(self, intervals):
        iv = sorted((float(a), float(b)) for a, b in intervals)
        if not iv:
            raise DegenerateDomain("interval union is empty")
        for a, b in iv:
            if not (np.isfinite(a) and np.isfinite(b) and a < b):
                raise DegenerateDomain(f"bad interval ({a}, {b})")
        for (a0, b0), (a1, b1) in zip(iv, iv[1:]):
            if a1 < b0:
                raise DegenerateDomain("intervals overlap")
        self.intervals = iv

    @staticmethod
    def _coords(pts) -> np.ndarray:
        p = np.asarray(pts, dtype=np.float64)
        return p[..., 0].ravel() if (p.ndim == 2 and p.shape[1] == 2) else p.ravel()

    def contains(self, pts) -> np.ndarray:
        x = self._coords(pts)
        out = np.zeros(x.shape, bool)
        for a, b in self.intervals:
            out |= (x > a) & (x < b)
        return out

    def endpoints(self) -> np.ndarray:
        return np.unique(np.array([v for iv in self.intervals for v in iv]))

    def sample_boundary(self, n: int = 16) -> BoundarySet:
        pts, nrm = [], []
        for a, b in self.intervals:
            pts += [[a, 0.0], [b, 0.0]]
            nrm += [[1.0, 0.0], [-1.0, 0.0]]
        pts = np.array(pts)
        return BoundarySet(pts, np.array(nrm), np.ones(len(pts), bool), pts[:, 0].copy(), ())

    def length(self) -> float:
        return float(sum(b - a for a, b in self.intervals))

    def bbox(self):
        return np.array([self.intervals[0][0], 0.0]), np.array([self.intervals[-1][1], 0.0])

    def feature_size(self) -> float:
        return float(min(b - a for a, b in self.intervals))

    def perimeter_estimate(self, n: int = 0) -> float:
        return float(2 * len(self.intervals))

    def dilate(self, factor: float, center=(0.0, 0.0)) -> "Intervals1D":
        c = float(np.asarray(center, float).ravel()[0])
        return Intervals1D([(c + factor * (a - c), c + factor * (b - c)) for a, b in self.intervals])

    def to_dict(self) -> dict:
        return {"kind": self.kind, "intervals": [list(iv) for iv in self.intervals]}


# ------------------------------------------------------------------ involute

_INVOLUTE_T = brentq(lambda t: np.tan(t) - t, 4.0, 4.6)


class Involute(ShapeDomain):
    """Region enclosed by the unit-circle involute and its mirror image.

    The two arcs start at the cusp (1, 0) and meet again on the negative
    x-axis where tan t = t; past that crossing they would leave the boundary,
    so both are trimmed there. Membership uses an even-odd test on a dense
    polygon through the arcs.
    """

    kind = "involute"
    t_max = float(_INVOLUTE_T)

    def __init__(self, n_poly: int = 4096):
        self.n_poly = int(n_poly)
        t = np.linspace(0.0, self.t_max, self.n_poly // 2 + 1)
        upper = self.curve(t)
        lower = upper[::-1][1:-1] * np.array([1.0, -1.0])
        self._poly = np.vstack([upper, lower])

    @staticmethod
    def curve(t) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        return np.column_stack([np.cos(t) + t * np.sin(t), np.sin(t) - t * np.cos(t)])

    @staticmethod
    def mirrored_curve(t) -> np.ndarray:
        """Second parametrization, valid for t in (2 pi - t_max, 2 pi)."""
        t = np.asarray(t, dtype=np.float64)
        s = 2 * np.pi - t
        return np.column_stack([np.cos(t) - s * np.sin(t), np.sin(t) + s * np.cos(t)])

    def contains(self, pts) -> np.ndarray:
        return points_in_polygon(_as_pts(pts), self._poly)

    def sample_boundary(self, n: int) -> BoundarySet:
        k = max(n // 2 - 1, 4)
        t = self.t_max * np.arange(1, k + 1) / (k + 1)
        up = self.curve(t)
        n_up = np.column_stack([-np.sin(t), np.cos(t)])
        t2 = 2 * np.pi - t[::-1]
        lo = self.mirrored_curve(t2)
        # mirror image of the upper normal, s = 2 pi - t2
        s = 2 * np.pi - t2
        n_lo = np.column_stack([-np.sin(s), -np.cos(s)])
        cusp = np.array([[1.0, 0.0]])
        corner = self.curve([self.t_max])
        pts = np.vstack([cusp, up, corner, lo])
        nrm = np.vstack([[np.nan, np.nan], n_up, [np.nan, np.nan], n_lo])
        smooth = np.concatenate([[False], np.ones(k, bool), [False], np.ones(k, bool)])
        param = np.concatenate([[0.0], t, [self.t_max], t2])
        return BoundarySet(pts, nrm, smooth, param, ((np.arange(pts.shape[0]), True),))

    def bbox(self):
        return self._poly.min(axis=0), self._poly.max(axis=0)

    def feature_size(self) -> float:
        return 1.0

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n_poly": self.n_poly}


# ------------------------------------------------------------ offset of C

class Offset(ShapeDomain):
    """Open d-neighbourhood {x : dist(x, C) < d} of a convex body."""

    kind = "offset"

    def __init__(self, body: cx.ConvexBody, d: float):
        if not d > 0:
            raise NonPositiveParam(f"offset distance must be positive, got {d}")
        self.body = body
        self.d = float(d)

    def contains(self, pts) -> np.ndarray:
        return cx.distance_many(self.body, _as_pts(pts)) < self.d

    def sample_boundary(self, n: int) -> BoundarySet:
        C, d = self.body, self.d
        if isinstance(C, cx.Ball):
            th = 2 * np.pi * np.arange(n) / n
            e = np.column_stack([np.cos(th), np.sin(th)])
            return BoundarySet(C.center + (C.radius + d) * e, -e, np.ones(n, bool), th, ((np.arange(n), True),))
        if isinstance(C, cx.Segment):
            e = C.b - C.a
            nrm = np.array([-e[1], e[0]]) / np.hypot(*e)
            normals = np.vstack([-nrm, nrm])
            edges = [(C.a, C.b), (C.b, C.a)]
        else:
            verts = C.vertices
            normals = C.edge_normals
            edges = list(zip(verts, np.roll(verts, -1, axis=0)))
        perim = sum(np.hypot(*(b - a)) for a, b in edges) + 2 * np.pi * d
        pts, nrms = [], []
        m = len(edges)
        for k in range(m):
            a, b = edges[k]
            nk = normals[k]
            cnt = max(1, int(round(n * np.hypot(*(b - a)) / perim)))
            s = (np.arange(cnt) + 0.5) / cnt
            pts.append(a + s[:, None] * (b - a) + d * nk)
            nrms.append(np.tile(-nk, (cnt, 1)))
            # rounded corner at the end vertex b, between normal k and k+1
            nn = normals[(k + 1) % m]
            a0 = np.arctan2(nk[1], nk[0])
            a1 = np.arctan2(nn[1], nn[0])
            sweep = np.mod(a1 - a0, 2 * np.pi)
            arc_cnt = max(1, int(round(n * d * sweep / perim)))
            ang = a0 + sweep * np.arange(arc_cnt + 1) / (arc_cnt + 1)
            ang = ang[1:] if arc_cnt else ang[:0]
            e = np.column_stack([np.cos(ang), np.sin(ang)])
            pts.append(b + d * e)
            nrms.append(-e)
        pts = np.vstack(pts)
        return BoundarySet(pts, np.vstack(nrms), np.ones(pts.shape[0], bool),
                           np.arange(pts.shape[0], dtype=float), ((np.arange(pts.shape[0]), True),))

    def bbox(self):
        lo, hi = cx.bounding_box(self.body)
        return lo - self.d, hi + self.d

    def feature_size(self) -> float:
        return self.d

    def dilate(self, factor: float, center=(0.0, 0.0)) -> "Offset":
        return Offset(cx.scale(self.body, factor, center), factor * self.d)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "body": cx.to_dict(self.body), "d": self.d}


# ----------------------------------------------------------------- clipping

class Clipped(ShapeDomain):
    """Intersection of a domain with the open ball B(center, radius)."""

    kind = "clipped"

    def __init__(self, base: ShapeDomain, center, radius: float):
        if not radius > 0:
            raise NonPositiveParam("clip radius must be positive")
        self.base = base
        self.center = np.asarray(center, dtype=np.float64).reshape(2)
        self.radius = float(radius)

    def contains(self, pts) -> np.ndarray:
        p = _as_pts(pts)
        return self.base.contains(p) & (np.hypot(*(p - self.center).T) < self.radius)

    def sample_boundary(self, n: int, tol: float | None = None) -> BoundarySet:
        tol = resolve_tol(tol)
        inner = self.base.sample_boundary(n)
        r = np.hypot(*(inner.points - self.center).T)
        part1 = inner.subset(r < self.radius - tol)
        th = 2 * np.pi * np.arange(n) / n
        e = np.column_stack([np.cos(th), np.sin(th)])
        pts = self.center + self.radius * e
        inside = self.base.contains(pts)
        arc = BoundarySet(pts, -e, np.ones(n, bool), th, ((np.arange(n), True),)).subset(inside)
        out = BoundarySet.concat([part1, arc])
        if len(out) == 0:
            raise DegenerateDomain("clipped domain has empty boundary")
        return out

    def bbox(self):
        lo, hi = self.base.bbox()
        return np.maximum(lo, self.center - self.radius), np.minimum(hi, self.center + self.radius)

    def feature_size(self) -> float:
        return min(self.base.feature_size(), self.radius)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "base": self.base.to_dict(), "center": self.center.tolist(), "radius": self.radius}


# ------------------------------------------------------------------- affine

class Mapped(ShapeDomain):
    """Image of a domain under x -> M x + t; normals follow the inverse transpose."""

    kind = "mapped"

    def __init__(self, base: ShapeDomain, M, t):
        self.base = base
        self.M = np.asarray(M, dtype=np.float64).reshape(2, 2)
        self.t = np.asarray(t, dtype=np.float64).reshape(2)
        det = np.linalg.det(self.M)
        if abs(det) <= 1e-9:
            raise DegenerateDomain("affine map is singular")
        self._Minv = np.linalg.inv(self.M)

    def contains(self, pts) -> np.ndarray:
        return self.base.contains((_as_pts(pts) - self.t) @ self._Minv.T)

    def sample_boundary(self, n: int) -> BoundarySet:
        b = self.base.sample_boundary(n)
        pts = b.points @ self.M.T + self.t
        nrm = b.normals @ self._Minv  # rows times M^{-1} == M^{-T} applied to each normal
        with np.errstate(invalid="ignore"):
            nrm = _unit(nrm)
        return BoundarySet(pts, nrm, b.smooth.copy(), b.param.copy(), b.chains)

    def bbox(self):
        lo, hi = self.base.bbox()
        corners = np.array([[lo[0], lo[1]], [lo[0], hi[1]], [hi[0], lo[1]], [hi[0], hi[1]]]) @ self.M.T + self.t
        return corners.min(axis=0), corners.max(axis=0)

    def feature_size(self) -> float:
        return self.base.feature_size() * float(np.linalg.svd(self.M, compute_uv=False).min())

    def dilate(self, factor: float, center=(0.0, 0.0)) -> "Mapped":
        c = np.asarray(center, float)
        return Mapped(self.base, factor * self.M, factor * self.t + (1 - factor) * c)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "base": self.base.to_dict(), "M": self.M.tolist(), "t": self.t.tolist()}


def affine_image(omega: ShapeDomain, M, t) -> ShapeDomain:
    return Mapped(omega, M, t)


# ------------------------------------------------------------------ gallery

def comb_height(n: int) -> float:
    """Height of the n-th tooth of the triangle comb."""
    return float(np.sqrt((1 - 1 / n) / (2 * n * (n + 1))))


def comb_profile(x, n_max: int) -> np.ndarray:
    """The piecewise-linear comb profile g on (1/(n_max+1), 1]."""
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    for n in range(1, n_max + 1):
        a = comb_height(n)
        lo, mid, hi = 1 / (n + 1), 0.5 * (1 / n + 1 / (n + 1)), 1 / n
        rise = (x >= lo) & (x <= mid)
        fall = (x > mid) & (x <= hi)
        out = np.where(rise, 2 * n * a * ((n + 1) * x - 1), out)
        out = np.where(fall, 2 * (n + 1) * a * (1 - n * x), out)
    return out


def comb_series(n_max: int) -> float:
    n = np.arange(1, n_max + 1, dtype=np.float64)
    a2 = (1 - 1 / n) / (2 * n * (n + 1))
    return float(np.sqrt(a2 + 1 / (4 * n**2 * (n + 1) ** 2)).sum())


def triangle_comb(n_max: int) -> Graph:
    """Mirrored comb of triangles over [1/(n+1), 1/n], n = 2..n_max.

    The first tooth has zero height and is dropped, as is the empty stretch
    left of the last tooth; the knots are the tooth feet and apexes.
    """
    if n_max < 2:
        raise NonPositiveParam("triangle_comb needs n_max >= 2")
    knots = [1.0 / (n_max + 1)]
    heights = [0.0]
    for n in range(n_max, 1, -1):
        mid = 0.5 * (1 / n + 1 / (n + 1))
        knots += [mid, 1.0 / n]
        heights += [2 * n * comb_height(n) * ((n + 1) * mid - 1), 0.0]
    return Graph(np.array(knots), np.array(heights))


def star_circle(radius: float, n_theta: int = 64, center=(0.0, 0.0)) -> StarPolar:
    return StarPolar(center, np.full(n_theta, float(radius)))


def cusp_chain(n_max: int) -> BallUnion:
    return BallUnion([((3 / 2 ** (n + 1), 0.0), 1 / 2 ** (n + 1)) for n in range(1, int(n_max) + 1)])


def two_disk(R: float) -> BallUnion:
    return BallUnion([((-1.0, 0.0), R), ((1.0, 0.0), R)])


def shrinking_pair(n: int, delta: float | None = None) -> DisjointPair:
    r = 1 - 1 / n
    sep = 2 - 2 * r
    return DisjointPair(BallUnion([((0.0, 0.0), r)]), BallUnion([((2.0, 0.0), r)]), sep if delta is None else delta)


def collapsing_intervals(n: int) -> Intervals1D:
    """(-1/n, 1/n) together with (1, 2): the small piece shrinks to the point 0."""
    return Intervals1D([(-1 / n, 1 / n), (1.0, 2.0)])


def offset_of_convex(C: cx.ConvexBody, d: float) -> Offset:
    return Offset(C, d)


GALLERY = {
    "involute": (lambda **kw: Involute(**kw), {}),
    "cusp_chain": (lambda n_max: cusp_chain(int(n_max)), {"n_max": 6}),
    "triangle_comb": (lambda n_max: triangle_comb(int(n_max)), {"n_max": 10}),
    "two_disk": (lambda R: two_disk(R), {"R": 1.0}),
    "star_circle": (lambda radius: star_circle(radius), {"radius": 1.0}),
    "offset_of_convex": (offset_of_convex, {}),
    "shrinking_pair": (lambda n, delta=None: shrinking_pair(int(n), delta), {"n": 10}),
    "collapsing_intervals": (lambda n: collapsing_intervals(int(n)), {"n": 5}),
    "remark222_intervals": (lambda n: collapsing_intervals(int(n)), {"n": 5}),
}


def make_gallery(name: str, **params) -> ShapeDomain:
    """Build a named example domain; missing parameters take the defaults above."""
    if name not in GALLERY:
        raise UnknownGallery(f"unknown gallery domain {name!r}; choose from {sorted(GALLERY)}")
    fn, defaults = GALLERY[name]
    kwargs = {**defaults, **params}
    for k, v in kwargs.items():
        if isinstance(v, (int, float)) and not isinstance(v, bool) and not v > 0:
            raise NonPositiveParam(f"parameter {k} must be positive, got {v}")
    if name == "offset_of_convex" and ("C" not in kwargs or "d" not in kwargs):
        raise NonPositiveParam("offset_of_convex needs a body C and a distance d")
    return fn(**kwargs)


# --------------------------------------------------------------- sampling API

def sample_boundary(omega: ShapeDomain, n: int) -> BoundarySet:
    if n < 16 and omega.dim == 2:
        raise DegenerateDomain(f"boundary sampling needs n >= 16, got {n}")
    return omega.sample_boundary(n)


def dilate(omega: ShapeDomain, factor: float, center=(0.0, 0.0)) -> ShapeDomain:
    if not factor > 0:
        raise NonPositiveParam(f"dilation factor must be positive, got {factor}")
    return omega.dilate(factor, center)


# ------------------------------------------------------------------- raster

@dataclass(frozen=True)
class CharacteristicGrid:
    """Cell-centre membership on a uniform grid; ``mask`` is (ny, nx) or (nx,)."""

    lo: np.ndarray
    h: float
    mask: np.ndarray
    dim: int = 2
    centers: tuple = field(default=(), repr=False)

    @property
    def shape(self) -> tuple:
        return self.mask.shape

    def measure(self) -> float:
        return float(self.mask.sum()) * self.h**self.dim


def grid_axes(lo, hi, h: float, dim: int = 2) -> tuple[np.ndarray, ...]:
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    axes = []
    for k in range(dim):
        n = max(1, int(np.ceil((hi[k] - lo[k]) / h - 1e-9)))
        axes.append(lo[k] + h * (np.arange(n) + 0.5))
    return tuple(axes)


def characteristic_grid(omega: ShapeDomain, h: float, box=None) -> CharacteristicGrid:
    """Rasterize membership of cell centres; ``box`` defaults to the padded bbox."""
    if not h > 0:
        raise NonPositiveParam("raster resolution must be positive")
    if box is None:
        lo, hi = omega.bbox()
        lo, hi = lo - 2 * h, hi + 2 * h
    else:
        lo, hi = (np.asarray(b, float) for b in box)
    if omega.dim == 1:
        (xs,) = grid_axes(lo[:1], hi[:1], h, 1)
        return CharacteristicGrid(lo[:1].copy(), float(h), omega.contains(xs), 1, (xs,))
    xs, ys = grid_axes(lo, hi, h, 2)
    gx, gy = np.meshgrid(xs, ys)
    mask = omega.contains(np.column_stack([gx.ravel(), gy.ravel()])).reshape(gx.shape)
    return CharacteristicGrid(np.asarray(lo[:2], float).copy(), float(h), mask, 2, (xs, ys))


# --------------------------------------------------------------------- json

def to_dict(omega: ShapeDomain) -> dict:
    return omega.to_dict()


def from_dict(d: dict) -> ShapeDomain:
    try:
        kind = d["kind"]
    except (KeyError, TypeError):
        raise DegenerateDomain("domain JSON needs a 'kind' field") from None
    try:
        if kind == "star_polar":
            return StarPolar(d.get("center", [0.0, 0.0]), d["G"])
        if kind == "graph":
            dphi = d.get("dphi")
            if dphi is not None:
                dphi = [np.nan if v is None else v for v in dphi]
            return Graph(d["x"], d["phi"], dphi)
        if kind == "ball_union":
            return BallUnion([(b["center"], b["radius"]) for b in d["balls"]])
        if kind == "disjoint_pair":
            return DisjointPair(from_dict(d["first"]), from_dict(d["second"]), d["delta"])
        if kind == "intervals_1d":
            return Intervals1D(d["intervals"])
        if kind == "involute":
            return Involute(d.get("n_poly", 4096))
        if kind == "offset":
            return Offset(cx.from_dict(d["body"]), d["d"])
        if kind == "clipped":
            return Clipped(from_dict(d["base"]), d["center"], d["radius"])
        if kind == "mapped":
            return Mapped(from_dict(d["base"]), d["M"], d["t"])
        if kind == "gallery":
            params = dict(d.get("params", {}))
            if "C" in params:
                params["C"] = cx.from_dict(params["C"])
            return make_gallery(d["name"], **params)
    except KeyError as exc:
        raise DegenerateDomain(f"domain of kind {kind!r} is missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise DegenerateDomain(f"malformed domain of kind {kind!r}: {exc}") from None
    raise DegenerateDomain(f"unknown domain kind {kind!r}")
