"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import from ``GNP_LAB_DISABLE_NUMBA`` and can be
switched at runtime with :func:`set_backend` (the benchmark does this). Both
paths must return identical results up to floating-point reassociation.
"""
from __future__ import annotations

import numpy as np

from ._config import numba_requested

try:
    import numba
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

_BACKEND = "numba" if (HAVE_NUMBA and numba_requested()) else "numpy"


def backend() -> str:
    return _BACKEND


def set_backend(name: str) -> None:
    global _BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not importable")
    _BACKEND = name


_BLOCK = 2048


# ---------------------------------------------------------------- hausdorff

def _directed_hausdorff_np(a, b):
    best = -1.0
    arg = 0
    for start in range(0, a.shape[0], _BLOCK):
        chunk = a[start:start + _BLOCK]
        d2 = ((chunk[:, None, :] - b[None, :, :]) ** 2).sum(axis=-1)
        mins = d2.min(axis=1)
        k = int(np.argmax(mins))
        if mins[k] > best:
            best = float(mins[k])
            arg = start + k
    return np.sqrt(best), arg


if HAVE_NUMBA:

    @njit(cache=True, fastmath=False)
    def _directed_hausdorff_nb(a, b):
        best = -1.0
        arg = 0
        dim = a.shape[1]
        for i in range(a.shape[0]):
            cmin = np.inf
            for j in range(b.shape[0]):
                d2 = 0.0
                for k in range(dim):
                    t = a[i, k] - b[j, k]
                    d2 += t * t
                if d2 < cmin:
                    cmin = d2
                    # early exit: this point cannot raise the max any more
                    if cmin <= best:
                        break
            if cmin > best:
                best = cmin
                arg = i
        return np.sqrt(best), arg


def directed_hausdorff(a: np.ndarray, b: np.ndarray) -> tuple[float, int]:
    """sup over rows of ``a`` of the distance to the nearest row of ``b``."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if _BACKEND == "numba":
        val, arg = _directed_hausdorff_nb(a, b)
        return float(val), int(arg)
    return _directed_hausdorff_np(a, b)


# ------------------------------------------------------------ normal cones

def _cone_margins_np(xs, ys, verts, radius):
    n = xs.shape[0]
    out = np.full(n, np.inf)
    arg = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        d = ys - xs[i]
        norm = np.hypot(d[:, 0], d[:, 1])
        ok = norm > 0.0
        if not ok.any():
            continue
        u = d[ok] / norm[ok, None]
        rel = verts - xs[i]
        sup = (u @ rel.T).max(axis=1) + radius
        k = int(np.argmin(sup))
        out[i] = sup[k]
        arg[i] = int(np.flatnonzero(ok)[k])
    return out, arg


if HAVE_NUMBA:

    @njit(cache=True)
    def _cone_margins_nb(xs, ys, verts, radius):
        n = xs.shape[0]
        out = np.full(n, np.inf)
        arg = np.full(n, -1, dtype=np.int64)
        for i in range(n):
            x0 = xs[i, 0]
            x1 = xs[i, 1]
            for j in range(ys.shape[0]):
                d0 = ys[j, 0] - x0
                d1 = ys[j, 1] - x1
                norm = np.sqrt(d0 * d0 + d1 * d1)
                if norm == 0.0:
                    continue
                u0 = d0 / norm
                u1 = d1 / norm
                sup = -np.inf
                for v in range(verts.shape[0]):
                    s = u0 * (verts[v, 0] - x0) + u1 * (verts[v, 1] - x1)
                    if s > sup:
                        sup = s
                sup += radius
                if sup < out[i]:
                    out[i] = sup
                    arg[i] = j
        return out, arg


def cone_margins(xs: np.ndarray, ys: np.ndarray, verts: np.ndarray, radius: float):
    """For each apex x: min over y of sup_{c in C} u.(c - x), u = (y-x)/|y-x|.

    ``C`` is the convex hull of ``verts`` inflated by ``radius`` (a ball is one
    vertex plus its radius). Returns (margins, argmin index into ys).
    """
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    ys = np.ascontiguousarray(ys, dtype=np.float64)
    verts = np.ascontiguousarray(verts, dtype=np.float64)
    if xs.shape[0] == 0 or ys.shape[0] == 0:
        return np.full(xs.shape[0], np.inf), np.full(xs.shape[0], -1, dtype=np.int64)
    if _BACKEND == "numba":
        return _cone_margins_nb(xs, ys, verts, float(radius))
    return _cone_margins_np(xs, ys, verts, float(radius))


# ------------------------------------------------------- point in polygon

def _points_in_polygon_np(pts, poly):
    x = pts[:, 0][:, None]
    y = pts[:, 1][:, None]
    x0 = poly[:, 0][None, :]
    y0 = poly[:, 1][None, :]
    x1 = np.roll(poly[:, 0], -1)[None, :]
    y1 = np.roll(poly[:, 1], -1)[None, :]
    straddle = (y0 > y) != (y1 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xcross = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    hits = straddle & (x < xcross)
    return (hits.sum(axis=1) % 2) == 1


if HAVE_NUMBA:

    @njit(cache=True)
    def _points_in_polygon_nb(pts, poly):
        n = pts.shape[0]
        m = poly.shape[0]
        out = np.zeros(n, dtype=np.bool_)
        for i in range(n):
            px = pts[i, 0]
            py = pts[i, 1]
            inside = False
            j = m - 1
            for k in range(m):
                yk = poly[k, 1]
                yj = poly[j, 1]
                if (yk > py) != (yj > py):
                    xc = poly[k, 0] + (py - yk) * (poly[j, 0] - poly[k, 0]) / (yj - yk)
                    if px < xc:
                        inside = not inside
                j = k
            out[i] = inside
        return out


def points_in_polygon(pts: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Even-odd membership of ``pts`` (n, 2) in the closed polyline ``poly`` (m, 2)."""
    pts = np.ascontiguousarray(pts, dtype=np.float64).reshape(-1, 2)
    poly = np.ascontiguousarray(poly, dtype=np.float64)
    if _BACKEND == "numba":
        return _points_in_polygon_nb(pts, poly)
    out = np.empty(pts.shape[0], dtype=bool)
    step = max(1, 4_000_000 // max(poly.shape[0], 1))
    for s in range(0, pts.shape[0], step):
        out[s:s + step] = _points_in_polygon_np(pts[s:s + step], poly)
    return out


# ---------------------------------------------------- dynamic programming

def _dp_np(u_levels, phi_levels, dx, lo, hi, lam, start, end, slack):
    m = lo.shape[0] + 1
    L = u_levels.shape[0]
    du = u_levels[None, :] - u_levels[:, None]
    dphi = phi_levels[None, :] - phi_levels[:, None]
    seg = np.sqrt(dx * dx + dphi * dphi) - lam * dx * 0.5 * (phi_levels[:, None] + phi_levels[None, :])
    cost = np.full(L, np.inf)
    cost[start] = 0.0
    back = np.zeros((m - 1, L), dtype=np.int64)
    for i in range(m - 1):
        allowed = (du >= lo[i] * dx - slack) & (du <= hi[i] * dx + slack)
        total = np.where(allowed, cost[:, None] + seg, np.inf)
        back[i] = np.argmin(total, axis=0)
        cost = total[back[i], np.arange(L)]
    return cost[end], back


if HAVE_NUMBA:

    @njit(cache=True)
    def _dp_nb(u_levels, phi_levels, dx, lo, hi, lam, start, end, slack):
        m = lo.shape[0] + 1
        L = u_levels.shape[0]
        cost = np.full(L, np.inf)
        cost[start] = 0.0
        back = np.zeros((m - 1, L), dtype=np.int64)
        new = np.empty(L)
        for i in range(m - 1):
            dlo = lo[i] * dx - slack
            dhi = hi[i] * dx + slack
            for b in range(L):
                best = np.inf
                barg = 0
                for a in range(L):
                    ca = cost[a]
                    if ca == np.inf:
                        continue
                    du = u_levels[b] - u_levels[a]
                    if du < dlo or du > dhi:
                        continue
                    dp = phi_levels[b] - phi_levels[a]
                    c = ca + np.sqrt(dx * dx + dp * dp) - lam * dx * 0.5 * (phi_levels[a] + phi_levels[b])
                    if c < best:
                        best = c
                        barg = a
                new[b] = best
                back[i, b] = barg
            for b in range(L):
                cost[b] = new[b]
        return cost[end], back


def dp_solve(u_levels, dx, lo, hi, lam, start, end, slack=1e-12):
    """Exact DP over (grid node, u-level); returns (objective, level path)."""
    u_levels = np.ascontiguousarray(u_levels, dtype=np.float64)
    phi_levels = np.sqrt(u_levels)
    lo = np.ascontiguousarray(lo, dtype=np.float64)
    hi = np.ascontiguousarray(hi, dtype=np.float64)
    if _BACKEND == "numba":
        obj, back = _dp_nb(u_levels, phi_levels, float(dx), lo, hi, float(lam), int(start), int(end), float(slack))
    else:
        obj, back = _dp_np(u_levels, phi_levels, float(dx), lo, hi, float(lam), int(start), int(end), float(slack))
    path = np.empty(lo.shape[0] + 1, dtype=np.int64)
    path[-1] = end
    for i in range(lo.shape[0] - 1, -1, -1):
        path[i] = back[i, path[i + 1]]
    return float(obj), path


# --------------------------------------------------------- pair ratios

def _pair_ratio_np(c, phi):
    lo, hi = np.inf, -np.inf
    n = c.shape[0]
    for s in range(0, n, _BLOCK):
        cc = c[s:s + _BLOCK]
        pp = phi[s:s + _BLOCK]
        dc = np.sqrt(((cc[:, None, :] - c[None, :, :]) ** 2).sum(-1))
        dp = np.sqrt(((pp[:, None, :] - phi[None, :, :]) ** 2).sum(-1))
        mask = dc > 0
        if mask.any():
            r = dp[mask] / dc[mask]
            lo = min(lo, float(r.min()))
            hi = max(hi, float(r.max()))
    return lo, hi


if HAVE_NUMBA:

    @njit(cache=True)
    def _pair_ratio_nb(c, phi):
        lo = np.inf
        hi = -np.inf
        n = c.shape[0]
        for i in range(n):
            for j in range(i + 1, n):
                a0 = c[i, 0] - c[j, 0]
                a1 = c[i, 1] - c[j, 1]
                dc = np.sqrt(a0 * a0 + a1 * a1)
                if dc == 0.0:
                    continue
                b0 = phi[i, 0] - phi[j, 0]
                b1 = phi[i, 1] - phi[j, 1]
                r = np.sqrt(b0 * b0 + b1 * b1) / dc
                if r < lo:
                    lo = r
                if r > hi:
                    hi = r
        return lo, hi


def pair_ratio_bounds(c: np.ndarray, phi: np.ndarray) -> tuple[float, float]:
    """min and max over pairs of |phi_i - phi_j| / |c_i - c_j|."""
    c = np.ascontiguousarray(c, dtype=np.float64)
    phi = np.ascontiguousarray(phi, dtype=np.float64)
    if _BACKEND == "numba":
        lo, hi = _pair_ratio_nb(c, phi)
        return float(lo), float(hi)
    return _pair_ratio_np(c, phi)
