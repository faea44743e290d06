"""Fundamental solutions, the Dirichlet Green function of a ball, and quadrature for U_R."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import roots_legendre

from . import convex as cx
from . import domain as dm
from .errors import PreconditionFailed, SingularPair, SingularPoint, SupportOutsideBall

SINGULAR_EPS = 1e-14


def _check_dim(N: int) -> None:
    if N not in (2, 3):
        raise PreconditionFailed(f"dimension must be 2 or 3, got {N}")


def _kernel(N: int, r):
    """E_N as a function of distance, vectorized, no singularity checks."""
    if N == 2:
        return -np.log(r) / (2 * math.pi)
    return 1.0 / (4 * math.pi * r)


def fundamental_solution(N: int, x) -> float:
    """-ln|x| / (2 pi) in the plane, 1 / (4 pi |x|) in space."""
    _check_dim(N)
    r = float(np.linalg.norm(np.asarray(x, dtype=np.float64)))
    if r <= SINGULAR_EPS:
        raise SingularPoint("fundamental solution evaluated at the origin")
    return float(_kernel(N, r))


def _image_distance(R: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    # | |y| x / R - R y / |y| |^2 = |x|^2 |y|^2 / R^2 - 2 x.y + R^2, smooth through y = 0
    xx = (x * x).sum(axis=-1)
    yy = (y * y).sum(axis=-1)
    xy = (x * y).sum(axis=-1)
    return np.sqrt(np.maximum(xx * yy / (R * R) - 2 * xy + R * R, 0.0))


def green_many(R: float, x: np.ndarray, y: np.ndarray, N: int = 2) -> np.ndarray:
    """Broadcasting Green function of -Laplace on B(O, R); callers exclude x = y."""
    d = np.sqrt(((x - y) ** 2).sum(axis=-1))
    return _kernel(N, d) - _kernel(N, _image_distance(R, x, y))


def green_disk(R: float, x, y, N: int = 2) -> float:
    """Green function of -Laplace on B(O, R) with zero boundary values.

    The image term is written through its squared norm, which is symmetric in
    (x, y) and has the correct limit R at y = 0, so no clamping is needed.
    """
    _check_dim(N)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != (N,) or y.shape != (N,):
        raise PreconditionFailed(f"points must have {N} coordinates")
    if np.linalg.norm(x) >= R or np.linalg.norm(y) >= R:
        raise PreconditionFailed("both points must lie inside the ball")
    if np.linalg.norm(x - y) <= SINGULAR_EPS:
        raise SingularPair("green function evaluated on the diagonal")
    return float(green_many(R, x, y, N))


# ---------------------------------------------------------------- densities

@dataclass(frozen=True)
class SourceDensity:
    """Nonnegative source f on a convex support with a quadrature rule."""

    support: cx.ConvexBody
    f: Callable[[np.ndarray], np.ndarray]
    nodes: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    dim: int = 2
    label: str = "f"

    @property
    def spacing(self) -> float:
        return (self.weights.sum() / self.weights.size) ** (1.0 / self.dim)

    def indicator(self, pts: np.ndarray) -> np.ndarray:
        if self.dim == 2:
            return cx.contains(self.support, pts, 0.0)
        b = self.support
        return np.linalg.norm(pts - np.append(b.center, 0.0), axis=-1) <= b.radius

    def field(self, pts: np.ndarray) -> np.ndarray:
        """f times the support indicator at arbitrary points."""
        out = np.zeros(pts.shape[0])
        ok = self.indicator(pts)
        if ok.any():
            out[ok] = self.f(pts[ok])
        return out

    def total(self) -> float:
        return float(self.weights @ self.values)

    @property
    def measure(self) -> float:
        if self.dim == 3:
            return 4.0 / 3.0 * math.pi * self.support.radius ** 3
        return cx.area(self.support)


def _gl(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    t, w = roots_legendre(n)
    return 0.5 * (b - a) * t + 0.5 * (b + a), 0.5 * (b - a) * w


def _disk_rule(center, radius: float, n_r: int, n_a: int) -> tuple[np.ndarray, np.ndarray]:
    r, wr = _gl(n_r, 0.0, radius)
    a = 2 * math.pi * (np.arange(n_a) + 0.5) / n_a
    rr, aa = np.meshgrid(r, a, indexing="ij")
    pts = np.stack([center[0] + rr * np.cos(aa), center[1] + rr * np.sin(aa)], axis=-1).reshape(-1, 2)
    w = (wr[:, None] * r[:, None] * np.full(n_a, 2 * math.pi / n_a)[None, :]).ravel()
    return pts, w


def _ball3_rule(center, radius: float, n_r: int, n_a: int) -> tuple[np.ndarray, np.ndarray]:
    r, wr = _gl(n_r, 0.0, radius)
    ct, wt = _gl(max(n_a // 2, 2), -1.0, 1.0)
    a = 2 * math.pi * (np.arange(n_a) + 0.5) / n_a
    rr, cc, aa = np.meshgrid(r, ct, a, indexing="ij")
    st = np.sqrt(1 - cc * cc)
    pts = np.stack([rr * st * np.cos(aa), rr * st * np.sin(aa), rr * cc], axis=-1).reshape(-1, 3)
    pts = pts + np.asarray(center, dtype=np.float64)
    w = wr[:, None, None] * r[:, None, None] ** 2 * wt[None, :, None] * (2 * math.pi / n_a)
    return pts, np.broadcast_to(w, rr.shape).ravel()


def _triangle_rule(a, b, c, n: int) -> tuple[np.ndarray, np.ndarray]:
    # collapsed square (Duffy) map of a tensor Gauss-Legendre rule
    s, ws = _gl(n, 0.0, 1.0)
    ss, tt = np.meshgrid(s, s, indexing="ij")
    u = ss
    v = (1 - ss) * tt
    pts = (a[None, :] * (1 - u - v).ravel()[:, None] + b[None, :] * u.ravel()[:, None]
           + c[None, :] * v.ravel()[:, None])
    jac = abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    w = (ws[:, None] * ws[None, :] * (1 - ss)).ravel() * jac
    return pts, w


def support_rule(support: cx.ConvexBody, n: int = 64, dim: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes and weights integrating exactly over the support's geometry."""
    if isinstance(support, cx.Segment):
        raise PreconditionFailed("a segment has zero area and cannot carry a density")
    if dim == 3:
        if not isinstance(support, cx.Ball):
            raise PreconditionFailed("three-dimensional densities need a ball support")
        return _ball3_rule(np.append(support.center, 0.0), support.radius, n // 2, n)
    if isinstance(support, cx.Ball):
        return _disk_rule(support.center, support.radius, n, n)
    v = support.vertices
    g = v.mean(axis=0)
    per = max(4, int(round(n / math.sqrt(len(v)))))
    parts = [_triangle_rule(g, v[i], v[(i + 1) % len(v)], per) for i in range(len(v))]
    return np.concatenate([p for p, _ in parts]), np.concatenate([w for _, w in parts])


def parse_f(text: str) -> Callable[[np.ndarray], np.ndarray]:
    """Density from a short text form: ``const:<c>`` or ``radial:<a>,<b>`` (a + b|y|^2)."""
    kind, _, arg = text.partition(":")
    try:
        if kind == "const":
            c = float(arg or 1.0)
            if c < 0:
                raise PreconditionFailed("density must be nonnegative")
            return lambda p: np.full(p.shape[0], c)
        if kind == "radial":
            a, b = (float(t) for t in arg.split(","))
            if a < 0 or b < 0:
                raise PreconditionFailed("density must be nonnegative")
            return lambda p: a + b * (p * p).sum(axis=-1)
    except ValueError as exc:
        raise PreconditionFailed(f"cannot parse density '{text}'") from exc
    raise PreconditionFailed(f"unknown density form '{text}'")


def make_density(support: cx.ConvexBody, f: Callable | str | float = 1.0, n: int = 64, dim: int = 2) -> SourceDensity:
    if isinstance(f, str):
        label, f = f, parse_f(f)
    elif not callable(f):
        c = float(f)
        label, f = f"const:{c:g}", (lambda p, c=c: np.full(p.shape[0], c))
    else:
        label = getattr(f, "__name__", "f")
    nodes, weights = support_rule(support, n, dim)
    values = np.asarray(f(nodes), dtype=np.float64)
    if np.any(values < 0):
        raise PreconditionFailed("density must be nonnegative")
    dens = SourceDensity(support, f, nodes, weights, values, dim, label)
    if abs(weights.sum() - dens.measure) > 0.01 * dens.measure:
        raise PreconditionFailed("quadrature weights do not reproduce the support measure")
    return dens


# ----------------------------------------------------------------- solver

def _cutoff(t: np.ndarray) -> np.ndarray:
    """C^2 bump: 1 for t <= 0, 0 for t >= 1."""
    t = np.clip(t, 0.0, 1.0)
    return 1.0 - t**3 * (10 - 15 * t + 6 * t * t)


def _local_rule(dim: int, radius: float, n_r: int = 24, n_a: int = 48):
    if dim == 2:
        return _disk_rule((0.0, 0.0), radius, n_r, n_a)
    return _ball3_rule((0.0, 0.0, 0.0), radius, n_r, n_a)


def solve_U_R(R: float, f: SourceDensity, eval_points, chunk: int = 256, cutoff_factor: float = 4.0) -> np.ndarray:
    """U_R(x) = integral of G_R(x, y) f(y) dy at each evaluation point.

    The kernel is split with a smooth cutoff of radius s around x: the far
    part is smooth and uses the support rule, the near part is integrated in
    local polar coordinates where the r or r^2 Jacobian absorbs the singularity.
    """
    N = f.dim
    pts = np.atleast_2d(np.asarray(eval_points, dtype=np.float64))
    if pts.shape[1] != N:
        raise PreconditionFailed(f"evaluation points must have {N} coordinates")
    if N == 2:
        reach = cx.outer_radius(f.support)
    else:
        reach = float(np.linalg.norm(f.support.center)) + f.support.radius
    if reach > R * (1 + 1e-12):
        raise SupportOutsideBall(f"support reaches radius {reach:.6g} > R = {R:.6g}")
    if np.any(np.linalg.norm(pts, axis=1) >= R):
        raise PreconditionFailed("evaluation points must lie inside the ball")
    s = cutoff_factor * f.spacing
    loc_pts, loc_w = _local_rule(N, s)
    loc_r = np.linalg.norm(loc_pts, axis=1)
    loc_chi = _cutoff(loc_r / s)
    out = np.empty(pts.shape[0])
    y = f.nodes
    fw = f.values * f.weights
    for i0 in range(0, pts.shape[0], chunk):
        x = pts[i0:i0 + chunk]
        d = np.sqrt(((x[:, None, :] - y[None, :, :]) ** 2).sum(axis=-1))
        far = 1.0 - _cutoff(d / s)
        with np.errstate(divide="ignore", invalid="ignore"):
            g = _kernel(N, d) - _kernel(N, _image_distance(R, x[:, None, :], y[None, :, :]))
            g = np.where(far > 0, g * far, 0.0)
        val = g @ fw
        # near part: only points whose cutoff disk meets the support
        dist = cx.distance_many(f.support, x[:, :2]) if N == 2 else np.maximum(
            np.linalg.norm(x - np.append(f.support.center, 0.0), axis=1) - f.support.radius, 0.0)
        for j in np.flatnonzero(dist < s):
            yy = x[j] + loc_pts
            fv = f.field(yy)
            if not fv.any():
                continue
            inside = np.linalg.norm(yy, axis=1) < R
            gl = _kernel(N, loc_r) - _kernel(N, _image_distance(R, x[j][None, :], yy))
            val[j] += float(((gl * loc_chi * fv * loc_w)[inside]).sum())
        out[i0:i0 + chunk] = val
    return out


def radial_indicator_solution(r, rho: float, R: float, N: int = 2) -> np.ndarray:
    """Closed form of -Laplace U = indicator(|x| < rho) on B(O, R), U = 0 on the sphere."""
    r = np.asarray(r, dtype=np.float64)
    if N == 2:
        inner = -r**2 / 4 + rho**2 / 4 - rho**2 / 2 * np.log(rho / R)
        with np.errstate(divide="ignore"):
            outer = -rho**2 / 2 * np.log(np.maximum(r, 1e-300) / R)
    else:
        inner = -r**2 / 6 + rho**2 / 2 - rho**3 / (3 * R)
        with np.errstate(divide="ignore"):
            outer = rho**3 / 3 * (1 / np.maximum(r, 1e-300) - 1 / R)
    return np.where(r <= rho, inner, outer)


# ------------------------------------------------------------ growth scan

def ball_volume(N: int, R: float) -> float:
    return math.pi * R**2 if N == 2 else 4.0 / 3.0 * math.pi * R**3


def cone_like(R: float, r_core: float, n_theta: int = 256) -> dm.StarPolar:
    """Star domain touching the sphere of radius R at one point and flattening away from it."""
    a = 0.9 * r_core
    return dm.StarPolar.from_function(lambda th: R - a * (1 - np.cos(th)), n_theta)


def measured_area(omega: dm.ShapeDomain, cells: int = 512) -> float:
    lo, hi = omega.bbox()
    h = float(max(hi - lo)) / cells
    return dm.characteristic_grid(omega, h).measure()


@dataclass
class ScanRow:
    R: float
    fU: float
    volume: float
    volume_ratio: float
    volume_term: float
    bound: float
    c1: float

    def to_dict(self) -> dict:
        return {"R": self.R, "int_fU": self.fU, "volume": self.volume, "vol_over_RN": self.volume_ratio,
                "volume_term": self.volume_term, "bound": self.bound, "c1": self.c1}


@dataclass
class ScanReport:
    rows: list
    N: int
    k: float
    exponent_bound: float
    exponent_volume: float

    def to_dict(self) -> dict:
        return {"N": self.N, "k": self.k, "exponent_bound": self.exponent_bound,
                "exponent_volume": self.exponent_volume, "rows": [r.to_dict() for r in self.rows],
                "min_vol_over_RN": min(r.volume_ratio for r in self.rows)}


def _loglog_slope(x, y) -> float:
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    ok = y > 0
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


def j_bound_scan(R_list, f: SourceDensity, k: float = 1.0, volume_samples=None, c1: float | None = None) -> ScanReport:
    """Lower-bound table -1/2 int f U_R + k^2 Vol over increasing radii.

    ``volume_samples`` pairs each radius with (domain, measured volume); by
    default the disk of radius R is used with its raster-measured area.
    """
    R_list = [float(r) for r in R_list]
    if any(b <= a for a, b in zip(R_list, R_list[1:])):
        raise PreconditionFailed("radii must be strictly increasing")
    N = f.dim
    if volume_samples is not None and len(volume_samples) != len(R_list):
        raise PreconditionFailed("one volume sample per radius is required")
    total_f = f.total()
    rows = []
    for i, R in enumerate(R_list):
        U = solve_U_R(R, f, f.nodes)
        fU = float((f.values * f.weights) @ U)
        if volume_samples is not None:
            vol = float(volume_samples[i][1])
        elif N == 2:
            vol = measured_area(dm.star_circle(R))
        else:
            vol = ball_volume(3, R)
        vt = k * k * vol
        rows.append(ScanRow(R, fU, vol, vol / R**N, vt, -0.5 * fU + vt,
                            2 * R * total_f if c1 is None else float(c1)))
    return ScanReport(rows, N, k, _loglog_slope(R_list, [r.bound for r in rows]),
                      _loglog_slope(R_list, [r.volume_term for r in rows]))
