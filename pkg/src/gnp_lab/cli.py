"""Command-line entry point ``gnp-lab``.

Exit status: 0 when every requested check passes, 1 when a check fails
(the report is still written), 2 for configuration or precondition errors.
"""
from __future__ import annotations

import argparse
import csv
import glob
import json
import math
import os
import re
import sys
from importlib import resources

import jsonschema
import numpy as np

from . import SCHEMA_VERSION, __version__
from . import convex as cx
from . import domain as dm
from . import gnp, metric, potential, suite, thickness, varopt
from ._config import resolve_tol
from .errors import GnpLabError
from .svg import PALETTE, Figure, draw_boundary, draw_convex


class ConfigError(Exception):
    """Bad command-line input; mapped to exit status 2."""


# ------------------------------------------------------------------ json io

def load_schema(name: str) -> dict:
    text = resources.files("gnp_lab").joinpath("schemas", f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def _validate(doc, schema_name: str, label: str) -> None:
    validator = jsonschema.Draft202012Validator(load_schema(schema_name))
    err = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if err is not None:
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"{label}: field '{where}': {err.message}")


def _read_json(path: str, label: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"{label}: file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{label}: malformed JSON in {path} (line {exc.lineno}, column {exc.colno}): {exc.msg}") from None


def read_convex(path: str) -> cx.ConvexBody:
    doc = _read_json(path, "convex")
    _validate(doc, "convex", f"convex body {path}")
    return cx.from_dict(doc)


def read_domain(path: str) -> dm.ShapeDomain:
    doc = _read_json(path, "domain")
    _validate(doc, "domain", f"domain {path}")
    return dm.from_dict(doc)


def jsonable(obj, digits: int = 12):
    """Plain JSON types with floats rounded to ``digits`` significant digits; NaN and inf become null."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v, digits) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v, digits) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return None
        return 0.0 if v == 0 else float(f"{v:.{digits}g}")
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict(), digits)
    return str(obj)


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def make_report(command: str, passed: bool, parameters: dict, result: dict) -> dict:
    doc = jsonable({"schema_version": SCHEMA_VERSION, "tool_version": __version__, "command": command,
                    "pass": bool(passed), "parameters": parameters, "result": result})
    _validate(doc, "report", "report")
    return doc


def write_report(args, doc: dict) -> None:
    text = dumps(doc)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.12g}" if isinstance(v, float) else v for v in row])


# --------------------------------------------------------------- parsing

def _floats(text: str, count: int | None = None, label: str = "value") -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"{label}: expected comma-separated numbers, got {text!r}") from None
    if count is not None and len(vals) != count:
        raise ConfigError(f"{label}: expected {count} numbers, got {len(vals)}")
    return vals


def _range(text: str) -> list[float]:
    """``start:stop:step`` inclusive of stop, or a comma list."""
    if ":" in text:
        parts = _floats(text.replace(":", ","), 3, "lambda sweep")
        start, stop, step = parts
        if step <= 0 or stop < start:
            raise ConfigError("lambda sweep needs step > 0 and stop >= start")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(n)]
    return _floats(text, label="lambda sweep")


def _params(pairs) -> dict:
    out = {}
    for p in pairs or []:
        if "=" not in p:
            raise ConfigError(f"--param expects key=value, got {p!r}")
        k, v = p.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


def _natural_key(path: str):
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", path)]


# --------------------------------------------------------------- commands

def cmd_gallery(args) -> int:
    if args.list or not args.name:
        doc = make_report("gallery", True, {}, {"names": sorted(dm.GALLERY)})
        write_report(args, doc)
        return 0
    params = _params(args.param)
    if "C" in params:
        params["C"] = cx.from_dict(params["C"])
    omega = dm.make_gallery(args.name, **params)
    payload = omega.to_dict()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(dumps(jsonable(payload)))
    if args.svg:
        draw_boundary(Figure(), dm.sample_boundary(omega, args.samples)).text(omega.bbox()[0], args.name).save(args.svg)
    params.pop("C", None)
    doc = make_report("gallery", True, {"name": args.name, "params": params}, {"domain": payload})
    if args.json or not args.out:
        write_report(args, doc)
    return 0


def cmd_check(args) -> int:
    tol = resolve_tol(args.tol)
    omega = read_domain(args.domain)
    n = args.samples
    mode = args.mode
    params = {"mode": mode, "samples": n, "tol": tol}
    C = read_convex(args.convex) if args.convex else None
    if mode in ("gnp", "sp") and C is None:
        raise ConfigError(f"mode {mode} needs --convex")
    if mode == "gnp":
        rep = gnp.check_c_gnp(omega, C, n=n, tol=tol)
    elif mode == "sp":
        rep = gnp.check_c_sp(omega, C, n_boundary=n, tol=tol)
    elif mode == "eps":
        if args.eps is None:
            raise ConfigError("mode eps needs --eps")
        params["eps"] = args.eps
        rep = gnp.check_eps_ball_gnp(omega, args.eps, tol=tol, n=n)
    elif mode == "graph":
        seg = tuple(_floats(args.segment, 2, "--segment"))
        params["segment"] = list(seg)
        rep = gnp.check_graph_gnp(omega, seg, n=n, tol=tol)
    elif mode == "pair":
        if C is None or not args.convex2:
            raise ConfigError("mode pair needs --convex and --convex2")
        params.update(delta=args.delta, pair_mode=args.pair_mode)
        rep = gnp.check_pair_class(omega, C, read_convex(args.convex2), args.pair_mode, args.delta, n, tol)
    elif mode == "local":
        if not args.patches:
            raise ConfigError("mode local needs --patches")
        doc = _read_json(args.patches, "patches")
        try:
            patches = [(cx.from_dict(p["ball"]), cx.from_dict(p["convex"])) for p in doc["patches"]]
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"patches: each entry needs 'ball' and 'convex' (missing {exc})") from None
        params["local_mode"] = args.local_mode
        rep = gnp.check_local_class(omega, patches, args.local_mode, n, tol)
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown mode {mode}")
    write_report(args, make_report("check", rep.passed, params, rep.to_dict()))
    if args.svg:
        fig = draw_boundary(Figure(), dm.sample_boundary(omega, max(n, 16)))
        if C is not None:
            draw_convex(fig, C)
        if rep.witness and rep.witness.get("point"):
            fig.points([rep.witness["point"][:2]], PALETTE[1], 3.0)
        fig.save(args.svg)
    return 0 if rep.passed else 1


def cmd_converge(args) -> int:
    paths = sorted(glob.glob(args.seq), key=_natural_key)
    if len(paths) < 3:
        raise ConfigError(f"--seq matched {len(paths)} files; at least 3 are needed")
    seq = [read_domain(p) for p in paths]
    limit = read_domain(args.limit)
    indices = []
    for k, p in enumerate(paths):
        m = re.findall(r"(\d+)", os.path.basename(p))
        indices.append(int(m[-1]) if m else k)
    if len(set(indices)) != len(indices):
        indices = list(range(len(paths)))
    rep = metric.convergence_report(seq, limit, h=args.h, indices=indices)
    params = {"seq": [os.path.basename(p) for p in paths], "limit": os.path.basename(args.limit), "h": rep.h}
    write_report(args, make_report("converge", rep.modes_agree, params, rep.to_dict()))
    if args.csv:
        rows = [(i, h, l1, all(k), c, b) for i, h, l1, k, c, b in zip(rep.indices, rep.hausdorff, rep.l1,
                                                                        rep.k_verdicts, rep.closure_distances,
                                                                        rep.boundary_distances)]
        write_csv(args.csv, ["index", "hausdorff", "l1", "compact", "closure_distance", "boundary_distance"], rows)
    if args.svg:
        x = np.asarray(rep.indices, float)
        fig = Figure(width=560, height=360)
        for vals, color, label in ((rep.hausdorff, PALETTE[0], "H"), (rep.l1, PALETTE[1], "L"),
                                   (rep.boundary_distances, PALETTE[2], "boundary")):
            fig.polyline(np.column_stack([x, vals]), color)
            fig.text([x[-1], vals[-1]], label, color)
        fig.save(args.svg, equal_aspect=False)
    return 0 if rep.modes_agree else 1


def cmd_thickness(args) -> int:
    omega = read_domain(args.domain)
    C = read_convex(args.convex)
    field = thickness.compute_thickness(C, omega, n=args.n)
    margin, verdict = thickness.bilipschitz_margin(field)
    lo, hi = thickness.empirical_ratio_bounds(field)
    result = field.to_dict()
    result.update(verdict=verdict, lipschitz_upper=thickness.lipschitz_upper(field), min_ratio=lo, max_ratio=hi)
    write_report(args, make_report("thickness", verdict, {"n": args.n}, result))
    if args.csv:
        write_csv(args.csv, ["cx", "cy", "nx", "ny", "d"],
                  [(float(p[0]), float(p[1]), float(v[0]), float(v[1]), float(t))
                   for p, v, t in zip(field.points, field.normals, field.d)])
    if args.svg:
        fig = draw_convex(Figure(), C)
        for idx, closed in field.chains:
            fig.polyline(field.image[np.asarray(idx)], PALETTE[0], closed)
        fig.save(args.svg)
    return 0 if verdict else 1


def cmd_optimize(args) -> int:
    bc = tuple(_floats(args.bc, 2, "--bc"))
    box = varopt.canonical_box(args.m, minus_sign=args.minus_sign)
    sweep = _range(args.lambda_sweep) if args.lambda_sweep else None
    params = {"m": args.m, "bc": list(bc), "minus_sign": args.minus_sign, "area": args.area,
              "lambda": args.lam, "lambda_sweep": sweep}
    runs = []
    if args.area is not None:
        sweep = sweep or list(np.arange(0.0, 5.0 + 1e-12, 0.25))
        runs = [varopt.minimize_perimeter(box, bc, lam=float(l), max_iter=args.max_iter) for l in sweep]
        best = min(runs, key=lambda r: (abs(r.area - args.area), r.lam))
    elif sweep:
        runs = [varopt.minimize_perimeter(box, bc, lam=float(l), max_iter=args.max_iter) for l in sweep]
        best = runs[-1]
    else:
        best = varopt.minimize_perimeter(box, bc, lam=args.lam, max_iter=args.max_iter)
        runs = [best]
    result = {"selected": best.to_dict(),
              "front": [{"lambda": r.lam, "perimeter": r.perimeter, "area": r.area, "objective": r.objective}
                        for r in runs]}
    if args.oracle:
        gf, obj = varopt.dp_oracle(box, bc, min(args.m, 101), args.oracle_levels, best.lam)
        result["oracle"] = {"objective": obj, "m": gf.m, "u_levels": args.oracle_levels}
    write_report(args, make_report("optimize", True, params, result))
    if args.csv:
        write_csv(args.csv, ["lambda", "P1", "area"], [(r.lam, r.perimeter, r.area) for r in runs])
    if args.svg:
        x = best.u.x
        phi = best.u.phi
        Figure().polyline(np.column_stack([x, phi]), PALETTE[0]).polyline(
            np.column_stack([x, -phi]), PALETTE[0]).polyline(np.array([[-1.0, 0.0], [1.0, 0.0]]), PALETTE[2]).save(args.svg)
    return 0


def _eval_points(text: str, R: float) -> np.ndarray:
    kind, _, arg = text.partition(":")
    if kind == "grid":
        try:
            k = int(arg or 64)
        except ValueError:
            raise ConfigError(f"--eval grid:<k> needs an integer, got {arg!r}") from None
        xs = np.linspace(-R, R, k + 2)[1:-1]
        gx, gy = np.meshgrid(xs, xs)
        pts = np.column_stack([gx.ravel(), gy.ravel()])
        return pts[np.hypot(pts[:, 0], pts[:, 1]) < R]
    if kind == "radii":
        r = np.asarray(_floats(arg, label="--eval radii"))
        return np.column_stack([r, np.zeros_like(r)])
    if kind == "points":
        try:
            return np.array([_floats(p, 2, "--eval points") for p in arg.split(";") if p.strip()])
        except ConfigError:
            raise
    raise ConfigError(f"unknown --eval form {text!r}; use grid:<k>, radii:<r,...> or points:<x,y;...>")


def cmd_potential(args) -> int:
    support = read_convex(args.support) if args.support else cx.Ball((0.0, 0.0), 0.2)
    dens = potential.make_density(support, args.f, n=args.quad)
    if args.action == "scan":
        radii = _floats(args.R, label="--R")
        vols = None
        if args.family == "cone":
            r_core = cx.outer_radius(support)
            vols = [(None, potential.measured_area(potential.cone_like(R, r_core))) for R in radii]
        rep = potential.j_bound_scan(radii, dens, k=args.k, volume_samples=vols)
        params = {"R": radii, "f": dens.label, "k": args.k, "family": args.family}
        result = rep.to_dict()
        passed = result["min_vol_over_RN"] > 0
        write_report(args, make_report("potential-scan", passed, params, result))
        if args.csv:
            write_csv(args.csv, ["R", "int_fU", "volume", "vol_over_RN", "volume_term", "bound"],
                      [(r.R, r.fU, r.volume, r.volume_ratio, r.volume_term, r.bound) for r in rep.rows])
        return 0 if passed else 1
    R = _floats(args.R, 1, "--R")[0]
    pts = _eval_points(args.eval, R)
    U = potential.solve_U_R(R, dens, pts)
    params = {"R": R, "f": dens.label, "eval": args.eval, "support": cx.to_dict(support)}
    result = {"points": pts, "U": U, "max_U": float(U.max()) if U.size else None}
    write_report(args, make_report("potential", True, params, result))
    if args.csv:
        write_csv(args.csv, ["x", "y", "U"], [(float(p[0]), float(p[1]), float(u)) for p, u in zip(pts, U)])
    return 0


def cmd_suite(args) -> int:
    res = suite.run_suite(args.name, seed=args.seed, tol=args.tol)
    write_report(args, make_report("suite", res["pass"], {"name": args.name, "seed": args.seed}, res))
    return 0 if res["pass"] else 1


# ----------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="override the global tolerance (also GNP_LAB_TOL)")
    common.add_argument("--seed", type=int, default=suite.DEFAULT_SEED)
    common.add_argument("--json", metavar="PATH", help="write the JSON report here instead of stdout")
    common.add_argument("--csv", metavar="PATH")
    common.add_argument("--svg", metavar="PATH")
    common.add_argument("--samples", type=int, default=1024, help="boundary sample count")

    p = argparse.ArgumentParser(prog="gnp-lab", description="Geometric normal property toolkit.")
    p.add_argument("--version", action="version", version=f"gnp-lab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gallery", parents=[common], help="build a named example domain")
    g.add_argument("name", nargs="?")
    g.add_argument("--param", action="append", metavar="KEY=VALUE")
    g.add_argument("--out", metavar="PATH", help="domain JSON output")
    g.add_argument("--list", action="store_true")
    g.set_defaults(func=cmd_gallery)

    c = sub.add_parser("check", parents=[common], help="run a property checker")
    c.add_argument("--domain", required=True)
    c.add_argument("--convex")
    c.add_argument("--convex2")
    c.add_argument("--mode", choices=["gnp", "sp", "eps", "graph", "pair", "local"], default="gnp")
    c.add_argument("--eps", type=float)
    c.add_argument("--segment", default="-1,1")
    c.add_argument("--delta", type=float)
    c.add_argument("--pair-mode", choices=["distance", "projection"], default="distance")
    c.add_argument("--patches")
    c.add_argument("--local-mode", choices=["gnp", "nc"], default="gnp")
    c.set_defaults(func=cmd_check)

    v = sub.add_parser("converge", parents=[common], help="compare convergence modes of a sequence")
    v.add_argument("--seq", required=True, help="glob pattern of domain JSON files")
    v.add_argument("--limit", required=True)
    v.add_argument("--h", type=float)
    v.set_defaults(func=cmd_converge)

    t = sub.add_parser("thickness", parents=[common], help="thickness field and bilipschitz margin")
    t.add_argument("--domain", required=True)
    t.add_argument("--convex", required=True)
    t.add_argument("--n", type=int, default=512)
    t.set_defaults(func=cmd_thickness)

    o = sub.add_parser("optimize", parents=[common], help="constrained perimeter minimization")
    o.add_argument("--m", type=int, default=201)
    o.add_argument("--area", type=float)
    o.add_argument("--lambda", dest="lam", type=float, default=0.0)
    o.add_argument("--lambda-sweep")
    o.add_argument("--paper-sign", dest="minus_sign", action="store_true",
                   help="use foot = x - u'/2, which negates the slope box")
    o.add_argument("--bc", default="0,0")
    o.add_argument("--max-iter", type=int, default=100_000)
    o.add_argument("--oracle", action="store_true", help="also run the dynamic-programming oracle")
    o.add_argument("--oracle-levels", type=int, default=201)
    o.set_defaults(func=cmd_optimize)

    q = sub.add_parser("potential", parents=[common], help="Dirichlet potential and growth scan")
    q.add_argument("action", nargs="?", choices=["solve", "scan"], default="solve")
    q.add_argument("--R", default="1.0")
    q.add_argument("--support")
    q.add_argument("--f", default="const:1")
    q.add_argument("--eval", default="grid:64")
    q.add_argument("--k", type=float, default=1.0)
    q.add_argument("--family", choices=["disk", "cone"], default="disk")
    q.add_argument("--quad", type=int, default=64, help="quadrature nodes per direction")
    q.set_defaults(func=cmd_potential)

    s = sub.add_parser("suite", parents=[common], help="run a bundled acceptance suite")
    s.add_argument("name", choices=list(suite.SUITES))
    s.set_defaults(func=cmd_suite)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.tol is not None and not args.tol > 0:
            raise ConfigError("--tol must be positive")
        try:
            resolve_tol(args.tol)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if args.samples < 1:
            raise ConfigError("--samples must be positive")
        return int(args.func(args))
    except (ConfigError, GnpLabError) as exc:
        print(f"gnp-lab: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"gnp-lab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
