"""Planar convex bodies: balls, segments and convex polygons.

Every query here is a pure function of an immutable body. Points are length-2
sequences or ``(n, 2)`` arrays; the vectorized helpers (``project_many``,
``ray_clearance`` ...) are what the checkers call in their inner loops.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.spatial import ConvexHull

from ._config import resolve_tol
from .errors import InvalidBody, NotOnBoundary, PreconditionFailed, VertexSingularity


def _vec(p) -> np.ndarray:
    a = np.array(p, dtype=np.float64).reshape(2)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not np.isfinite(self.radius) or self.radius < 0:
            raise InvalidBody(f"ball radius must be >= 0, got {self.radius}")


@dataclass(frozen=True)
class Segment:
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _vec(self.a))
        object.__setattr__(self, "b", _vec(self.b))
        if np.allclose(self.a, self.b, rtol=0.0, atol=0.0):
            raise InvalidBody("segment endpoints must be distinct")


@dataclass(frozen=True)
class Polytope:
    """Strictly convex polygon; vertices are stored counterclockwise."""

    vertices: np.ndarray
    _normals: np.ndarray = field(init=False, repr=False, compare=False)
    _offsets: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=np.float64).reshape(-1, 2)
        if v.shape[0] < 3:
            raise InvalidBody("polytope needs at least 3 vertices")
        e = np.roll(v, -1, axis=0) - v
        cross = e[:, 0] * np.roll(e[:, 1], -1) - e[:, 1] * np.roll(e[:, 0], -1)
        if np.all(cross < 0):
            v = v[::-1].copy()
            e = np.roll(v, -1, axis=0) - v
        elif not np.all(cross > 0):
            raise InvalidBody("polytope vertices are not in strictly convex order")
        lengths = np.hypot(e[:, 0], e[:, 1])
        normals = np.column_stack([e[:, 1], -e[:, 0]]) / lengths[:, None]
        offsets = (normals * v).sum(axis=1)
        for arr in (v, normals, offsets):
            arr.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "_normals", normals)
        object.__setattr__(self, "_offsets", offsets)

    @property
    def edge_normals(self) -> np.ndarray:
        return self._normals

    @property
    def edge_offsets(self) -> np.ndarray:
        return self._offsets


ConvexBody = Union[Ball, Segment, Polytope]


def hull(points) -> Polytope:
    """Convex hull of a point cloud, normalized to a :class:`Polytope`."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    h = ConvexHull(pts)
    return Polytope(pts[h.vertices])


def regular_polygon(center, radius: float, n: int, phase: float = 0.0) -> Polytope:
    th = phase + 2 * np.pi * np.arange(n) / n
    return Polytope(np.asarray(center, float) + radius * np.column_stack([np.cos(th), np.sin(th)]))


def ellipse_polytope(center, a: float, b: float, n: int = 256, angle: float = 0.0) -> Polytope:
    """Inscribed polygon of the ellipse with semi-axes ``a``, ``b``."""
    th = 2 * np.pi * np.arange(n) / n
    pts = np.column_stack([a * np.cos(th), b * np.sin(th)])
    c, s = np.cos(angle), np.sin(angle)
    pts = pts @ np.array([[c, s], [-s, c]])
    return Polytope(np.asarray(center, float) + pts)


def vertices(C: ConvexBody) -> tuple[np.ndarray, float]:
    """(generating points, inflation radius): C = hull(points) + B(0, radius)."""
    if isinstance(C, Ball):
        return C.center.reshape(1, 2), C.radius
    if isinstance(C, Segment):
        return np.vstack([C.a, C.b]), 0.0
    return C.vertices, 0.0


# ------------------------------------------------------------- projection

def _project_segment(a, b, pts):
    ab = b - a
    t = ((pts - a) @ ab) / (ab @ ab)
    t = np.clip(t, 0.0, 1.0)
    return a + t[:, None] * ab


def project_many(C: ConvexBody, pts) -> np.ndarray:
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
    if isinstance(C, Ball):
        d = pts - C.center
        r = np.hypot(d[:, 0], d[:, 1])
        scale = np.where(r > C.radius, C.radius / np.where(r > 0, r, 1.0), 1.0)
        return C.center + d * scale[:, None]
    if isinstance(C, Segment):
        return _project_segment(C.a, C.b, pts)
    inside = (pts @ C.edge_normals.T - C.edge_offsets).max(axis=1) <= 0.0
    out = pts.copy()
    if (~inside).any():
        q = pts[~inside]
        v = C.vertices
        w = np.roll(v, -1, axis=0)
        best = np.full(q.shape[0], np.inf)
        bestp = np.zeros_like(q)
        for a, b in zip(v, w):
            p = _project_segment(a, b, q)
            d = ((q - p) ** 2).sum(axis=1)
            better = d < best
            best[better] = d[better]
            bestp[better] = p[better]
        out[~inside] = bestp
    return out


def project(C: ConvexBody, x) -> np.ndarray:
    """Nearest point of C to x."""
    return project_many(C, x)[0]


def distance_many(C: ConvexBody, pts) -> np.ndarray:
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
    d = pts - project_many(C, pts)
    return np.hypot(d[:, 0], d[:, 1])


def contains(C: ConvexBody, pts, tol: float | None = None) -> np.ndarray:
    """Closed membership with slack ``tol``."""
    return distance_many(C, pts) <= resolve_tol(tol)


def depth_many(C: ConvexBody, pts) -> np.ndarray:
    """Signed depth: distance to the boundary inside, minus distance to C outside."""
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
    if isinstance(C, Ball):
        return C.radius - np.hypot(*(pts - C.center).T)
    if isinstance(C, Segment):
        return -distance_many(C, pts)
    inner = -(pts @ C.edge_normals.T - C.edge_offsets).max(axis=1)
    return np.where(inner >= 0, inner, -distance_many(C, pts))


# -------------------------------------------------------------- support

def support(C: ConvexBody, direction) -> float:
    u = np.asarray(direction, dtype=np.float64).reshape(2)
    if abs(np.hypot(*u) - 1.0) > 1e-12:
        raise PreconditionFailed("support direction must be a unit vector")
    return float(support_many(C, u[None, :])[0])


def support_many(C: ConvexBody, dirs) -> np.ndarray:
    dirs = np.asarray(dirs, dtype=np.float64).reshape(-1, 2)
    pts, r = vertices(C)
    return (dirs @ pts.T).max(axis=1) + r * np.hypot(dirs[:, 0], dirs[:, 1])


def normal_cone_sup(C: ConvexBody, x, y) -> float:
    """sup over c in C of u.(c - x) with u = (y - x)/|y - x| (0 when y == x)."""
    x = np.asarray(x, dtype=np.float64).reshape(2)
    d = np.asarray(y, dtype=np.float64).reshape(2) - x
    n = np.hypot(*d)
    if n == 0.0:
        return 0.0
    u = d / n
    return float(support_many(C, u)[0] - u @ x)


def normal_cone_contains(C: ConvexBody, x, y, tol: float | None = None) -> bool:
    """True iff (y - x).(c - x) <= 0 for every c in C, up to ``tol``.

    The test is evaluated on the unit direction of y - x so the slack is a
    length; y == x is always in the cone.
    """
    return normal_cone_sup(C, x, y) <= resolve_tol(tol)


# ---------------------------------------------------------------- normals

def boundary_normal(C: ConvexBody, c, tol: float | None = None, side: int = 1) -> np.ndarray:
    """Outward unit normal at a boundary point of C.

    For a segment (whose boundary in the plane is the whole segment) ``side``
    picks the left (+1) or right (-1) face.
    """
    tol = resolve_tol(tol)
    c = np.asarray(c, dtype=np.float64).reshape(2)
    if isinstance(C, Ball):
        d = c - C.center
        r = np.hypot(*d)
        if abs(r - C.radius) > tol:
            raise NotOnBoundary(f"point at distance {r} from center, radius {C.radius}")
        if C.radius <= tol:
            raise VertexSingularity("degenerate ball has no normal")
        return d / r
    if isinstance(C, Segment):
        if distance_many(C, c)[0] > tol:
            raise NotOnBoundary("point is not on the segment")
        if min(np.hypot(*(c - C.a)), np.hypot(*(c - C.b))) <= tol:
            raise VertexSingularity("segment endpoint")
        e = (C.b - C.a) / np.hypot(*(C.b - C.a))
        n = np.array([-e[1], e[0]])
        return n if side >= 0 else -n
    v = C.vertices
    if np.min(np.hypot(*(v - c).T)) <= tol:
        raise VertexSingularity("polytope vertex")
    w = np.roll(v, -1, axis=0)
    for k, (a, b) in enumerate(zip(v, w)):
        p = _project_segment(a, b, c[None, :])[0]
        if np.hypot(*(p - c)) <= tol:
            return C.edge_normals[k].copy()
    raise NotOnBoundary("point is not on the polytope boundary")


@dataclass(frozen=True)
class ConvexBoundary:
    """Samples on the boundary of C with outward normals.

    ``chains`` lists index arrays in boundary order with a closed flag; the
    thickness module estimates Lipschitz constants along them.
    """

    points: np.ndarray
    normals: np.ndarray
    chains: tuple
    coverage: float


def sample_boundary(C: ConvexBody, n: int) -> ConvexBoundary:
    if isinstance(C, Ball):
        if C.radius == 0:
            return ConvexBoundary(np.zeros((0, 2)), np.zeros((0, 2)), (), 0.0)
        th = 2 * np.pi * np.arange(n) / n
        nrm = np.column_stack([np.cos(th), np.sin(th)])
        return ConvexBoundary(C.center + C.radius * nrm, nrm, ((np.arange(n), True),), 1.0)
    if isinstance(C, Segment):
        k = max(n // 2, 1)
        s = (np.arange(k) + 0.5) / k
        e = C.b - C.a
        nrm = np.array([-e[1], e[0]]) / np.hypot(*e)
        top = C.a + s[:, None] * e
        bottom = top[::-1]
        pts = np.vstack([top, bottom])
        nrms = np.vstack([np.tile(nrm, (k, 1)), np.tile(-nrm, (k, 1))])
        # the two endpoint caps carry no normal
        return ConvexBoundary(pts, nrms, ((np.arange(k), False), (np.arange(k, 2 * k), False)), 0.5)
    v = C.vertices
    e = np.roll(v, -1, axis=0) - v
    lengths = np.hypot(e[:, 0], e[:, 1])
    counts = np.maximum(1, np.round(n * lengths / lengths.sum()).astype(int))
    pts, nrms = [], []
    for k in range(v.shape[0]):
        s = (np.arange(counts[k]) + 0.5) / counts[k]
        pts.append(v[k] + s[:, None] * e[k])
        nrms.append(np.tile(C.edge_normals[k], (counts[k], 1)))
    pts = np.vstack(pts)
    return ConvexBoundary(pts, np.vstack(nrms), ((np.arange(pts.shape[0]), True),), 1.0)


def interior_grid(C: ConvexBody, n: int = 32, tol: float | None = None) -> np.ndarray:
    """Points strictly inside C (empty for a segment, whose planar interior is empty)."""
    tol = resolve_tol(tol)
    if isinstance(C, Segment) or (isinstance(C, Ball) and C.radius <= tol):
        return np.zeros((0, 2))
    if isinstance(C, Ball):
        r = C.radius * (np.arange(n) + 0.5) / n
        pts = [C.center[None, :]]
        for ri in r:
            m = max(6, int(2 * np.pi * n * ri / C.radius))
            th = 2 * np.pi * np.arange(m) / m
            pts.append(C.center + ri * np.column_stack([np.cos(th), np.sin(th)]))
        pts = np.vstack(pts)
    else:
        lo, hi = C.vertices.min(axis=0), C.vertices.max(axis=0)
        gx, gy = np.meshgrid(np.linspace(lo[0], hi[0], n), np.linspace(lo[1], hi[1], n))
        pts = np.column_stack([gx.ravel(), gy.ravel()])
    return pts[depth_many(C, pts) > tol]


# ------------------------------------------------------------------- rays

def _ray_point_distance(x, nu, p):
    t = np.maximum(0.0, ((p - x) * nu).sum(axis=1))
    q = x + t[:, None] * nu
    return np.hypot(*(p - q).T), q


def _ray_segment(x, nu, a, b):
    """Distance between rays x + t nu (t >= 0) and segment [a, b]; closest ray point."""
    e = b - a
    denom = nu[:, 0] * e[1] - nu[:, 1] * e[0]
    w = a - x
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (w[:, 0] * e[1] - w[:, 1] * e[0]) / denom
        s = (w[:, 0] * nu[:, 1] - w[:, 1] * nu[:, 0]) / denom
    hit = (denom != 0) & (t >= 0) & (s >= 0) & (s <= 1)
    da, qa = _ray_point_distance(x, nu, np.broadcast_to(a, x.shape))
    db, qb = _ray_point_distance(x, nu, np.broadcast_to(b, x.shape))
    px = _project_segment(a, b, x)
    dx = np.hypot(*(x - px).T)
    dist = np.minimum(np.minimum(da, db), dx)
    q = np.where((da <= db)[:, None], qa, qb)
    q = np.where((dx < np.minimum(da, db))[:, None], x, q)
    q = np.where(hit[:, None], x + np.where(hit, t, 0.0)[:, None] * nu, q)
    return np.where(hit, 0.0, dist), q


def ray_clearance(C: ConvexBody, origins, dirs) -> tuple[np.ndarray, np.ndarray]:
    """Signed clearance of rays {x + t nu, t >= 0} against C.

    Positive values are the largest depth inside C reached by the ray,
    negative values minus the ray-to-C distance. Also returns the ray point
    realizing it.
    """
    x = np.asarray(origins, dtype=np.float64).reshape(-1, 2)
    nu = np.asarray(dirs, dtype=np.float64).reshape(-1, 2)
    if isinstance(C, Ball):
        d, q = _ray_point_distance(x, nu, np.broadcast_to(C.center, x.shape))
        return C.radius - d, q
    if isinstance(C, Segment):
        d, q = _ray_segment(x, nu, C.a, C.b)
        return -d, q
    N, h = C.edge_normals, C.edge_offsets
    a = h[None, :] - x @ N.T   # slack at t = 0
    b = nu @ N.T               # rate of slack loss
    with np.errstate(divide="ignore", invalid="ignore"):
        tb = a / b
    t_in = np.max(np.where(b < 0, tb, -np.inf), axis=1, initial=-np.inf)
    t_out = np.min(np.where(b > 0, tb, np.inf), axis=1, initial=np.inf)
    never = np.any((b == 0) & (a < 0), axis=1)
    t_in = np.maximum(t_in, 0.0)
    hit = (t_in <= t_out) & ~never
    out = np.empty(x.shape[0])
    q = np.empty_like(x)
    if hit.any():
        lo, hi = t_in[hit], t_out[hit]
        ah, bh = a[hit], b[hit]
        for _ in range(100):
            m1 = lo + (hi - lo) / 3
            m2 = hi - (hi - lo) / 3
            f1 = (ah - m1[:, None] * bh).min(axis=1)
            f2 = (ah - m2[:, None] * bh).min(axis=1)
            left = f1 < f2
            lo = np.where(left, m1, lo)
            hi = np.where(left, hi, m2)
        t = 0.5 * (lo + hi)
        out[hit] = (ah - t[:, None] * bh).min(axis=1)
        q[hit] = x[hit] + t[:, None] * nu[hit]
    if (~hit).any():
        xm, nm = x[~hit], nu[~hit]
        best = np.full(xm.shape[0], np.inf)
        bq = np.zeros_like(xm)
        v = C.vertices
        for va, vb in zip(v, np.roll(v, -1, axis=0)):
            d, qq = _ray_segment(xm, nm, va, vb)
            better = d < best
            best[better] = d[better]
            bq[better] = qq[better]
        out[~hit] = -best
        q[~hit] = bq
    return out, q


# -------------------------------------------------------------- transforms

def is_similarity(M, tol: float = 1e-12) -> bool:
    M = np.asarray(M, dtype=np.float64)
    g = M.T @ M
    return abs(g[0, 1]) <= tol * max(1.0, abs(g[0, 0])) and abs(g[0, 0] - g[1, 1]) <= tol * max(1.0, abs(g[0, 0]))


def transform(C: ConvexBody, M, t, n_ellipse: int = 128) -> ConvexBody:
    """Image of C under x -> M x + t; a ball under a non-similarity becomes a polygon."""
    M = np.asarray(M, dtype=np.float64).reshape(2, 2)
    t = np.asarray(t, dtype=np.float64).reshape(2)
    if isinstance(C, Ball):
        if is_similarity(M):
            return Ball(M @ C.center + t, C.radius * np.sqrt(abs(np.linalg.det(M))))
        th = 2 * np.pi * np.arange(n_ellipse) / n_ellipse
        circle = C.center + C.radius * np.column_stack([np.cos(th), np.sin(th)])
        return Polytope(circle @ M.T + t)
    if isinstance(C, Segment):
        return Segment(M @ C.a + t, M @ C.b + t)
    return Polytope(C.vertices @ M.T + t)


def scale(C: ConvexBody, factor: float, center=(0.0, 0.0)) -> ConvexBody:
    c = np.asarray(center, dtype=np.float64)
    M = factor * np.eye(2)
    return transform(C, M, c - factor * c)


def outer_radius(C: ConvexBody, center=(0.0, 0.0)) -> float:
    """Radius of the smallest ball centered at ``center`` containing C."""
    pts, r = vertices(C)
    return float(np.hypot(*(pts - np.asarray(center, float)).T).max() + r)


def bounding_box(C: ConvexBody) -> tuple[np.ndarray, np.ndarray]:
    pts, r = vertices(C)
    return pts.min(axis=0) - r, pts.max(axis=0) + r


def area(C: ConvexBody) -> float:
    if isinstance(C, Ball):
        return float(np.pi * C.radius**2)
    if isinstance(C, Segment):
        return 0.0
    x, y = C.vertices.T
    return float(0.5 * (x * np.roll(y, -1) - np.roll(x, -1) * y).sum())


# -------------------------------------------------------------------- json

def to_dict(C: ConvexBody) -> dict:
    if isinstance(C, Ball):
        return {"kind": "ball", "center": C.center.tolist(), "radius": C.radius}
    if isinstance(C, Segment):
        return {"kind": "segment", "a": C.a.tolist(), "b": C.b.tolist()}
    return {"kind": "polytope", "vertices": C.vertices.tolist()}


def from_dict(d: dict) -> ConvexBody:
    try:
        kind = d["kind"]
    except (KeyError, TypeError):
        raise InvalidBody("convex body JSON needs a 'kind' field") from None
    try:
        if kind == "ball":
            return Ball(d["center"], d["radius"])
        if kind == "segment":
            return Segment(d["a"], d["b"])
        if kind == "polytope":
            return Polytope(d["vertices"])
        if kind == "hull":
            return hull(d["points"])
    except KeyError as exc:
        raise InvalidBody(f"convex body of kind {kind!r} is missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise InvalidBody(f"malformed convex body of kind {kind!r}: {exc}") from None
    raise InvalidBody(f"unknown convex body kind {kind!r}")
