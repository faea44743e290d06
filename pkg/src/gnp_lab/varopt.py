"""Perimeter minimization for symmetric graph domains under the normal-foot constraint.

The unknown is u = phi^2 on a uniform grid. Perimeter and area are always
evaluated in the phi chart (polyline length of (x, sqrt(u)) and the
trapezoid integral of sqrt(u)), which stays finite where u vanishes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import dp_solve
from .errors import InfeasibleBC, PreconditionFailed

FEAS_TOL = 1e-10


@dataclass(frozen=True)
class GridFunction:
    x_lo: float
    x_hi: float
    u: np.ndarray
    bc: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        u = np.asarray(self.u, dtype=np.float64).ravel()
        if u.size < 21:
            raise PreconditionFailed(f"grid function needs m >= 21 samples, got {u.size}")
        if np.any(u < -FEAS_TOL):
            raise PreconditionFailed("u must be nonnegative")
        if abs(u[0] - self.bc[0]) > FEAS_TOL or abs(u[-1] - self.bc[1]) > FEAS_TOL:
            raise PreconditionFailed("boundary samples must equal the boundary conditions")
        u = np.maximum(u, 0.0)
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "bc", (float(self.bc[0]), float(self.bc[1])))

    @property
    def m(self) -> int:
        return int(self.u.size)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_lo, self.x_hi, self.m)

    @property
    def dx(self) -> float:
        return (self.x_hi - self.x_lo) / (self.m - 1)

    @property
    def phi(self) -> np.ndarray:
        return np.sqrt(self.u)

    def to_dict(self) -> dict:
        return {"x_lo": self.x_lo, "x_hi": self.x_hi, "u": self.u.tolist(), "bc": list(self.bc)}


@dataclass(frozen=True)
class DerivativeBox:
    """Per-interval slope bounds lo <= (u[i+1] - u[i]) / dx <= hi."""

    x_lo: float
    x_hi: float
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=np.float64).ravel()
        hi = np.asarray(self.hi, dtype=np.float64).ravel()
        if lo.shape != hi.shape or np.any(lo > hi):
            raise PreconditionFailed("derivative box needs lo <= hi on every interval")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def m(self) -> int:
        return int(self.lo.size + 1)

    @property
    def dx(self) -> float:
        return (self.x_hi - self.x_lo) / (self.m - 1)


def canonical_box(m: int, x_lo: float = -1.0, x_hi: float = 1.0, minus_sign: bool = False,
                  segment: tuple[float, float] = (-1.0, 1.0)) -> DerivativeBox:
    """Slope box keeping the normal foot inside ``segment``.

    With foot = x + u'/2 the box is u' in [2(c_lo - x), 2(c_hi - x)];
    ``minus_sign`` uses foot = x - u'/2, i.e. u' in [2(x - c_hi), 2(x - c_lo)].
    Bounds are taken at interval midpoints, which is exact for these linear
    bounds because a slope quotient is the mean of u' over its interval.
    """
    x = np.linspace(x_lo, x_hi, m)
    mid = 0.5 * (x[1:] + x[:-1])
    c_lo, c_hi = segment
    if minus_sign:
        return DerivativeBox(x_lo, x_hi, 2 * (mid - c_hi), 2 * (mid - c_lo))
    return DerivativeBox(x_lo, x_hi, 2 * (c_lo - mid), 2 * (c_hi - mid))


def resample_box(box: DerivativeBox, m: int) -> DerivativeBox:
    """Evaluate a box with linear bounds on another grid size."""
    x_old = 0.5 * (np.linspace(box.x_lo, box.x_hi, box.m)[1:] + np.linspace(box.x_lo, box.x_hi, box.m)[:-1])
    x_new = np.linspace(box.x_lo, box.x_hi, m)
    mid = 0.5 * (x_new[1:] + x_new[:-1])
    lo = np.polyval(np.polyfit(x_old, box.lo, 1), mid) if box.m > 2 else np.full(m - 1, box.lo[0])
    hi = np.polyval(np.polyfit(x_old, box.hi, 1), mid) if box.m > 2 else np.full(m - 1, box.hi[0])
    return DerivativeBox(box.x_lo, box.x_hi, lo, hi)


# ----------------------------------------------------------------- measures

def _lengths(phi: np.ndarray, dx: float) -> np.ndarray:
    return np.sqrt(dx * dx + np.diff(phi) ** 2)


def perimeter_u(u: GridFunction) -> float:
    """Polyline length of the graph of sqrt(u)."""
    return math.fsum(_lengths(u.phi, u.dx))


def area_u(u: GridFunction) -> float:
    phi = u.phi
    return math.fsum(0.5 * u.dx * (phi[1:] + phi[:-1]))


def objective(u: GridFunction, lam: float) -> float:
    return perimeter_u(u) - lam * area_u(u)


# --------------------------------------------------------------- envelopes

def envelopes(box: DerivativeBox, bc: tuple[float, float]) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise (min, max) over all feasible grid functions; raises when none exists."""
    dx = box.dx
    m = box.m
    f_lo = np.empty(m)
    f_hi = np.empty(m)
    b_lo = np.empty(m)
    b_hi = np.empty(m)
    f_lo[0] = f_hi[0] = bc[0]
    for i in range(m - 1):
        f_hi[i + 1] = f_hi[i] + box.hi[i] * dx
        f_lo[i + 1] = max(0.0, f_lo[i] + box.lo[i] * dx)
        if f_hi[i + 1] < -FEAS_TOL:
            raise InfeasibleBC(f"no nonnegative continuation at node {i + 1}")
    b_lo[-1] = b_hi[-1] = bc[1]
    for i in range(m - 2, -1, -1):
        b_hi[i] = b_hi[i + 1] - box.lo[i] * dx
        b_lo[i] = max(0.0, b_lo[i + 1] - box.hi[i] * dx)
    if not (f_lo[-1] - FEAS_TOL <= bc[1] <= f_hi[-1] + FEAS_TOL):
        raise InfeasibleBC(f"u(x_hi) = {bc[1]} is outside the reachable range [{f_lo[-1]:.6g}, {f_hi[-1]:.6g}]")
    lower = np.maximum(f_lo, b_lo)
    upper = np.minimum(f_hi, b_hi)
    if np.any(lower > upper + FEAS_TOL):
        raise InfeasibleBC("reachable sets from the two ends do not overlap")
    return lower, upper


def is_feasible(u: np.ndarray, box: DerivativeBox, bc, tol: float = FEAS_TOL) -> bool:
    s = np.diff(u) / box.dx
    return bool(np.all(u >= -tol) and abs(u[0] - bc[0]) <= tol and abs(u[-1] - bc[1]) <= tol
                and np.all(s >= box.lo - tol) and np.all(s <= box.hi + tol))


def _project_values(u: np.ndarray, box: DerivativeBox, bc, lower: np.ndarray) -> np.ndarray:
    dx = box.dx
    if is_feasible(u, box, bc):
        return u.copy()
    s = np.clip(np.diff(u) / dx, box.lo, box.hi)
    target = (bc[1] - bc[0]) / dx
    total = s.sum()
    if total < target:
        room = (box.hi - s).sum()
        s = s + (target - total) / room * (box.hi - s) if room > 0 else s
    elif total > target:
        room = (s - box.lo).sum()
        s = s - (total - target) / room * (s - box.lo) if room > 0 else s
    out = np.empty_like(u)
    out[0] = bc[0]
    out[1:] = bc[0] + np.cumsum(s) * dx
    out[-1] = bc[1]
    # the pointwise max of two box-feasible sequences is box-feasible
    return np.maximum(out, lower)


def project_feasible(u: GridFunction, box: DerivativeBox) -> GridFunction:
    """Move u into the feasible set: clip slopes, rebalance them to hit both
    boundary values, re-integrate, then lift onto the lower envelope.

    Feasible inputs are returned unchanged.
    """
    if box.m != u.m:
        raise PreconditionFailed("box and grid function sizes differ")
    lower, _ = envelopes(box, u.bc)
    return GridFunction(u.x_lo, u.x_hi, _project_values(np.asarray(u.u), box, u.bc, lower), u.bc)


# ------------------------------------------------------------ descent solver

@dataclass
class OptimizeResult:
    u: GridFunction
    perimeter: float
    area: float
    objective: float
    lam: float
    iterations: int
    history: list

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "perimeter": self.perimeter, "area": self.area, "objective": self.objective,
                "iterations": self.iterations, "u": self.u.to_dict()}


def _phi_objective(phi: np.ndarray, dx: float, lam: float) -> float:
    return float(_lengths(phi, dx).sum() - lam * 0.5 * dx * (phi[1:] + phi[:-1]).sum())


def _phi_gradient(phi: np.ndarray, dx: float, lam: float) -> np.ndarray:
    d = np.diff(phi)
    q = d / np.sqrt(dx * dx + d * d)
    g = np.zeros_like(phi)
    g[:-1] -= q
    g[1:] += q
    w = np.full_like(phi, dx)
    w[0] = w[-1] = 0.5 * dx
    return g - lam * w


def _descend(box: DerivativeBox, bc, lam: float, phi0: np.ndarray, max_iter: int, gtol: float):
    dx = box.dx
    lower, _ = envelopes(box, bc)

    def proj(phi):
        return np.sqrt(_project_values(np.maximum(phi, 0.0) ** 2, box, bc, lower))

    phi = proj(phi0)
    prev = phi
    f = _phi_objective(phi, dx, lam)
    history = [f]
    it = 0
    k = 0
    last_alpha = 1.0
    for it in range(1, max_iter + 1):
        # momentum extrapolation, restarted whenever it fails to descend
        y = proj(phi + (k / (k + 3.0)) * (phi - prev)) if k > 0 else phi
        fy = _phi_objective(y, dx, lam)
        g = _phi_gradient(y, dx, lam)
        # backtracking starts from twice the last accepted step, capped at 1
        alpha = min(1.0, 2.0 * last_alpha)
        while True:
            cand = proj(y - alpha * g)
            fc = _phi_objective(cand, dx, lam)
            if fc <= fy + 1e-4 * float(g @ (cand - y)) or alpha < 1e-14:
                break
            alpha *= 0.5
        last_alpha = alpha
        if fc > f:
            if k == 0:
                break
            k = 0
            prev = phi
            continue
        step = np.linalg.norm(cand - phi)
        prev, phi, f = phi, cand, fc
        history.append(f)
        k += 1
        if step < gtol * alpha:
            # stationarity test on the unit-step projected gradient
            if np.linalg.norm(proj(phi - _phi_gradient(phi, dx, lam)) - phi) < gtol or step == 0.0:
                break
    return phi, history, it


def minimize_perimeter(box: DerivativeBox, bc=(0.0, 0.0), m: int | None = None, lam: float = 0.0,
                       area_target: float | None = None, multiplier_sweep=None, max_iter: int = 100_000,
                       gtol: float = 1e-8, u0: np.ndarray | None = None) -> OptimizeResult:
    """Projected descent on P(u) - lam * area(u).

    With ``area_target`` the multiplier runs over ``multiplier_sweep`` and the
    sweep member whose area is closest to the target is returned.
    """
    if m is not None and m != box.m:
        box = resample_box(box, m)
    bc = (float(bc[0]), float(bc[1]))
    lower, upper = envelopes(box, bc)
    if area_target is not None:
        sweep = np.arange(0.0, 5.0 + 1e-12, 0.25) if multiplier_sweep is None else np.asarray(multiplier_sweep, float)
        runs = [minimize_perimeter(box, bc, None, float(l), None, None, max_iter, gtol, u0) for l in sweep]
        return min(runs, key=lambda r: (abs(r.area - area_target), r.lam))
    # the constraint set is not convex in phi, so by default descend from
    # both feasibility envelopes and keep the better stationary point
    starts = [lower, upper] if u0 is None else [np.asarray(u0, float)]
    best = None
    for start in starts:
        run = _descend(box, bc, lam, np.sqrt(np.maximum(start, 0.0)), max_iter, gtol)
        if best is None or run[1][-1] < best[1][-1]:
            best = run
    phi, history, iters = best
    gf = GridFunction(box.x_lo, box.x_hi, phi**2, bc)
    return OptimizeResult(gf, perimeter_u(gf), area_u(gf), objective(gf, lam), lam, iters, history)


# --------------------------------------------------------------- DP oracle

def dp_oracle(box: DerivativeBox, bc=(0.0, 0.0), m: int = 101, u_levels: int = 201, lam: float = 0.0) -> tuple[GridFunction, float]:
    """Global optimum over grid functions whose values lie on a fixed level set.

    The level set holds the distinct node values of both envelopes, so a
    path hugging an envelope is representable exactly, and is filled up to
    ``u_levels`` with values uniform in sqrt(u). Boundary values are always
    present.
    """
    if m > 101 or u_levels > 401:
        raise PreconditionFailed("dp oracle is limited to m <= 101 and u_levels <= 401")
    if m != box.m:
        box = resample_box(box, m)
    bc = (float(bc[0]), float(bc[1]))
    lower, upper = envelopes(box, bc)
    env = np.unique(np.concatenate([lower, upper, bc]))
    if env.size > u_levels // 2:
        env = env[np.linspace(0, env.size - 1, u_levels // 2).round().astype(int)]
    fill = max(u_levels - env.size, 2)
    phi_levels = np.linspace(0.0, np.sqrt(upper.max()), fill)
    levels = np.unique(np.concatenate([phi_levels**2, env, bc]))
    start = int(np.flatnonzero(levels == bc[0])[0])
    end = int(np.flatnonzero(levels == bc[1])[0])
    obj, path = dp_solve(levels, box.dx, box.lo, box.hi, lam, start, end, slack=1e-12)
    if not np.isfinite(obj):
        raise InfeasibleBC("no level path connects the boundary values")
    gf = GridFunction(box.x_lo, box.x_hi, levels[path], bc)
    return gf, objective(gf, lam)


def brute_force_optimum(box: DerivativeBox, bc, levels: np.ndarray, lam: float) -> float:
    """Exhaustive search over level sequences; test oracle for tiny grids."""
    from itertools import product

    best = np.inf
    m = box.m
    for mid in product(range(levels.size), repeat=m - 2):
        u = np.concatenate([[bc[0]], levels[list(mid)], [bc[1]]])
        s = np.diff(u) / box.dx
        if np.any(s < box.lo - 1e-12) or np.any(s > box.hi + 1e-12):
            continue
        phi = np.sqrt(u)
        best = min(best, _phi_objective(phi, box.dx, lam))
    return float(best)


# ------------------------------------------------------ saturating curves

def foot(x, u_prime, sign: int = 1) -> np.ndarray:
    """Axis foot of the inward normal: x + u'/2 (sign=+1) or x - u'/2 (sign=-1)."""
    return np.asarray(x) + sign * 0.5 * np.asarray(u_prime)


def evaluate_saturating_candidates(radii=(0.5, 1.0, 2.0), n: int = 2001) -> dict:
    """Compare candidate boundary curves against the saturation identity foot = 1.

    Each entry reports max |foot - 1| under both sign conventions; nothing
    is asserted here.
    """
    out: dict = {}
    x = np.linspace(0.0, 2.0, n)[1:-1]
    # circle centred (1, 0), radius 1: u = 1 - (x - 1)^2, u' = -2(x - 1)
    up = -2 * (x - 1)
    out["circle_axis"] = {"plus": float(np.abs(foot(x, up, 1) - 1).max()),
                          "minus": float(np.abs(foot(x, up, -1) - 1).max())}
    rows = []
    for R in radii:
        xs = np.linspace(1 - R, 1 + R, n)[1:-1]
        root = np.sqrt(R * R - (xs - 1) ** 2)
        phi = R + root
        dphi = -(xs - 1) / root
        f_plus = xs + phi * dphi
        f_minus = xs - phi * dphi
        rows.append({"R": float(R), "plus": float(np.abs(f_plus - 1).max()),
                     "minus": float(np.abs(f_minus - 1).max()),
                     "profile_x": xs[:: max(1, n // 16)].tolist(),
                     "profile_plus": (f_plus - 1)[:: max(1, n // 16)].tolist()})
    out["circle_raised"] = rows
    xl = np.linspace(-1.0, 1.0, n)
    for name, up_line in (("line_right", 2 * (xl - 1)), ("line_left", 2 * (xl + 1))):
        out[name] = {
            "plus_foot_range": [float(foot(xl, up_line, 1).min()), float(foot(xl, up_line, 1).max())],
            "minus_foot_range": [float(foot(xl, up_line, -1).min()), float(foot(xl, up_line, -1).max())],
        }
    return out
