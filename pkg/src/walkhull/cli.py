"""Command-line front end: simulations, grids, verification, plots.

Every file-writing command also writes a manifest with the fully resolved
configuration, master seed and artifact version, so any output can be
reproduced byte-for-byte by re-running with the recorded settings.
Option precedence is flags > config file (key=value lines) > defaults.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
The WALKHULL_OUT environment variable supplies the default output
directory for commands that write files.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import walkhull
from walkhull import asymptotics, heatmap, montecarlo, oracle, stats
from walkhull.geometry import Point2, area, convex_hull, diameter, perimeter
from walkhull.walks import StepDistribution, build_ensemble

CSV_SCHEMA_VERSION = 1

_OUT_ENV = "WALKHULL_OUT"


class CliError(Exception):
    """Runtime failure reported on stderr with exit code 1."""


class UsageError(Exception):
    """Bad invocation reported on stderr with exit code 2."""


def _parse_pair(text: str, what: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"{what} must be 'x,y', got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise UsageError(f"{what}: {exc}") from None


def _read_config_file(path: str) -> dict[str, str]:
    """key=value grammar: one pair per line, '#' comments, blank lines ok."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def _resolve(args, key: str, cast, default=None, required: bool = False):
    value = getattr(args, key, None)
    if value is None and getattr(args, "_config_file", None):
        raw = args._config_file.get(key)
        if raw is not None:
            value = raw
    if value is None:
        if required and default is None:
            raise UsageError(f"missing required option --{key.replace('_', '-')}")
        return default
    if isinstance(value, str):
        try:
            return cast(value)
        except ValueError as exc:
            raise UsageError(f"bad value for {key}: {exc}") from None
    return value


def _out_dir(args) -> Path:
    out = getattr(args, "out", None) or os.environ.get(_OUT_ENV)
    if not out:
        raise UsageError(f"no output directory: pass --out or set {_OUT_ENV}")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _dump_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _write_manifest(
    directory: Path, command: str, config: dict, outputs: list[str], started: float
) -> None:
    manifest = {
        "command": command,
        "config": config,
        "artifact_version": walkhull.__version__,
        "csv_schema_version": CSV_SCHEMA_VERSION,
        "wall_clock_seconds": round(time.time() - started, 3),
        "outputs": outputs,
    }
    (directory / "manifest.json").write_text(_dump_json(manifest))


def _read_points(source) -> list[Point2]:
    pts: list[Point2] = []
    for lineno, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 2:
            raise CliError(f"line {lineno}: expected 'x y', got {line!r}")
        try:
            pts.append(Point2(float(fields[0]), float(fields[1])))
        except ValueError:
            raise CliError(f"line {lineno}: not numeric: {line!r}") from None
    if not pts:
        raise CliError("no points in input")
    return pts


def cmd_hull(args) -> int:
    if args.input and args.input != "-":
        with open(args.input) as fh:
            pts = _read_points(fh)
    else:
        pts = _read_points(sys.stdin)
    hull = convex_hull(pts)
    payload = {
        "vertices": [[p.x, p.y] for p in hull.vertices],
        "perimeter": perimeter(hull),
        "diameter": diameter(hull),
        "area": area(hull),
    }
    sys.stdout.write(_dump_json(payload))
    return 0


def _distributions(mu1, sigma1, mu2, sigma2) -> tuple[StepDistribution, StepDistribution]:
    return (
        StepDistribution.isotropic_gaussian(mu1, sigma1),
        StepDistribution.isotropic_gaussian(mu2, sigma2),
    )


def cmd_walk(args) -> int:
    started = time.time()
    mu1 = _resolve(args, "mu1", lambda s: _parse_pair(s, "mu1"), required=True)
    sigma1 = _resolve(args, "sigma1", float, 1.0)
    mu2 = _resolve(args, "mu2", lambda s: _parse_pair(s, "mu2"))
    sigma2 = _resolve(args, "sigma2", float, 1.0)
    steps = _resolve(args, "steps", int, required=True)
    seed = _resolve(args, "seed", int, 0)
    rep = _resolve(args, "rep", int, 0)
    if steps < 1:
        raise UsageError("--steps must be >= 1")
    dists = [StepDistribution.isotropic_gaussian(mu1, sigma1)]
    if mu2 is not None:
        dists.append(StepDistribution.isotropic_gaussian(mu2, sigma2))
    ens = build_ensemble(dists, steps, seed, rep)
    directory = _out_dir(args)
    lines = ["step,k,x,y"]
    for k, walk in enumerate(ens.walks, start=1):
        for j, (x, y) in enumerate(walk.partial_sums):
            lines.append(f"{j},{k},{float(x)!r},{float(y)!r}")
    (directory / "walks.csv").write_text("\n".join(lines) + "\n")
    config = {
        "distributions": [d.as_dict() for d in dists],
        "steps": steps,
        "master_seed": seed,
        "rep": rep,
    }
    _write_manifest(directory, "walk", config, ["walks.csv"], started)
    return 0


def cmd_simulate(args) -> int:
    started = time.time()
    mu1 = _resolve(args, "mu1", lambda s: _parse_pair(s, "mu1"), required=True)
    mu2 = _resolve(args, "mu2", lambda s: _parse_pair(s, "mu2"), required=True)
    sigma1 = _resolve(args, "sigma1", float, 1.0)
    sigma2 = _resolve(args, "sigma2", float, 1.0)
    steps = _resolve(args, "steps", int, 10_000)
    reps = _resolve(args, "reps", int, 1_000)
    seed = _resolve(args, "seed", int, 0)
    workers = _resolve(args, "workers", int, 1)
    if steps < 1 or reps < 1:
        raise UsageError("--steps and --reps must be >= 1")
    if sigma1 < 0 or sigma2 < 0:
        raise UsageError("--sigma1/--sigma2 must be >= 0")
    cfg = montecarlo.ExperimentConfig(
        _distributions(mu1, sigma1, mu2, sigma2), n=steps, reps=reps, master_seed=seed
    )
    samples = montecarlo.run_experiment(cfg, workers=workers)
    directory = _out_dir(args)
    (directory / "samples.csv").write_text(samples.to_csv())
    (directory / "summary.json").write_text(_dump_json(samples.as_dict()))
    _write_manifest(
        directory,
        "simulate",
        {**cfg.as_dict(), "workers": workers},
        ["samples.csv", "summary.json"],
        started,
    )
    return 0


def _parse_sigmas(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise UsageError(f"bad sigma list: {exc}") from None
    if not values:
        raise UsageError("sigma list is empty")
    return values


def cmd_grid(args) -> int:
    started = time.time()
    mu1 = _resolve(args, "mu1", lambda s: _parse_pair(s, "mu1"), required=True)
    mu2 = _resolve(args, "mu2", lambda s: _parse_pair(s, "mu2"), required=True)
    sigmas = _resolve(args, "sigmas", _parse_sigmas, stats.DEFAULT_SIGMA_VALUES)
    steps = _resolve(args, "steps", int, 10_000)
    reps = _resolve(args, "reps", int, 1_000)
    repeats = _resolve(args, "repeats", int, 5)
    seed = _resolve(args, "seed", int, 0)
    workers = _resolve(args, "workers", int, 1)
    neglog_mode = _resolve(args, "neglog_mode", str, "log-of-mean")
    if steps < 1 or reps < 8:
        raise UsageError("--steps must be >= 1 and --reps >= 8 (normality test needs 8)")
    cfg = stats.GridConfig(
        mu1=mu1,
        mu2=mu2,
        sigma_values=tuple(sigmas),
        n=steps,
        reps=reps,
        repeats=repeats,
        master_seed=seed,
        neglog_mode=neglog_mode,
    )
    grid = stats.pvalue_grid(cfg, workers=workers)
    directory = _out_dir(args)
    (directory / "grid.csv").write_text(grid.to_csv())
    (directory / "grid.json").write_text(_dump_json(grid.as_dict()))
    _write_manifest(
        directory,
        "grid",
        {**cfg.as_dict(), "workers": workers},
        ["grid.csv", "grid.json"],
        started,
    )
    return 0


def cmd_verify(args) -> int:
    mu1 = _resolve(args, "mu1", lambda s: _parse_pair(s, "mu1"), required=True)
    mu2 = _resolve(args, "mu2", lambda s: _parse_pair(s, "mu2"), required=True)
    sigma1 = _resolve(args, "sigma1", float, 1.0)
    sigma2 = _resolve(args, "sigma2", float, 1.0)
    geo = asymptotics.drift_geometry(mu1, mu2)
    limit = asymptotics.limit_shape([mu1, mu2])
    d1, d2 = _distributions(mu1, sigma1, mu2, sigma2)
    payload: dict = {
        "mu1": list(mu1),
        "mu2": list(mu2),
        "theta1": geo.theta1,
        "theta2": geo.theta2,
        "theta0": None if math.isnan(geo.theta0) else geo.theta0,
        "e_theta0_perp": list(geo.e_theta0_perp) if geo.e_theta0_perp else None,
        "a1_holds": geo.a1_holds,
        "a2": {"unique_max": geo.a2_max} if geo.a2_max else "violated",
        "limit_perimeter": limit.per,
        "limit_diameter": limit.diam,
    }
    try:
        payload["sigma_L2"] = asymptotics.sigma_L2(d1, d2, geo)
    except asymptotics.AssumptionViolation as exc:
        payload["sigma_L2"] = None
        payload["sigma_L2_reason"] = str(exc)
    try:
        payload["sigma_D2"] = asymptotics.sigma_D2(d1, d2, geo)
    except asymptotics.AssumptionViolation as exc:
        payload["sigma_D2"] = None
        payload["sigma_D2_reason"] = str(exc)
    sys.stdout.write(_dump_json(payload))
    return 0


def _load_grid_csv(path: str, functional: str) -> heatmap.HeatmapData:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != "sigma1,sigma2,avg_p_L,neglog_L,avg_p_D,neglog_D":
        raise CliError(f"{path}: not a grid CSV (unexpected header)")
    column = 3 if functional == "L" else 5
    sigma1s: list[float] = []
    sigma2s: list[float] = []
    table: dict[tuple[float, float], float] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != 6:
            raise CliError(f"{path}:{lineno}: expected 6 columns")
        try:
            s1, s2 = float(fields[0]), float(fields[1])
            value = float(fields[column])
        except ValueError:
            raise CliError(f"{path}:{lineno}: not numeric") from None
        if s1 not in sigma1s:
            sigma1s.append(s1)
        if s2 not in sigma2s:
            sigma2s.append(s2)
        table[(s1, s2)] = value
    if sigma1s != sigma2s:
        raise CliError(f"{path}: grid is not square over a single sigma set")
    values = tuple(
        tuple(table.get((s1, s2), math.nan) for s2 in sigma2s) for s1 in sigma1s
    )
    return heatmap.HeatmapData(tuple(sigma1s), values, "perimeter" if functional == "L" else "diameter")


def cmd_plot(args) -> int:
    started = time.time()
    if args.functional not in ("L", "D"):
        raise UsageError("--functional must be L or D")
    data = _load_grid_csv(args.input, args.functional)
    svg = heatmap.render_heatmap(data)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(svg)
    manifest_dir = out.parent
    _write_manifest(
        manifest_dir,
        "plot",
        {"input": args.input, "functional": args.functional, "out": out.name},
        [out.name],
        started,
    )
    return 0


def cmd_oracle(args) -> int:
    spec_path = Path(args.spec)
    try:
        raw = json.loads(spec_path.read_text())
    except json.JSONDecodeError as exc:
        raise CliError(f"{spec_path}: invalid JSON: {exc}") from None
    try:
        n = int(raw["n"])
        supports = raw["supports"]
        dists = tuple(
            StepDistribution.discrete([(tuple(point), float(p)) for point, p in support])
            for support in supports
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"{spec_path}: bad oracle spec: {exc}") from None
    spec = oracle.DiscreteEnsembleSpec(dists, n)
    try:
        moments = oracle.enumerate_exact(spec)
        report = oracle.mds_check(spec)
    except oracle.BudgetExceeded as exc:
        raise CliError(str(exc)) from None
    payload = {
        "moments": {
            "E_L": moments.e_l,
            "Var_L": moments.var_l,
            "E_D": moments.e_d,
            "Var_D": moments.var_d,
            "outcome_count": moments.outcome_count,
        },
        "mds": report.as_dict(),
    }
    sys.stdout.write(_dump_json(payload))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="walkhull",
        description="Convex hulls of drifting planar random walks: simulation and diagnostics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hull", help="hull functionals of a point list (file or stdin)")
    p.add_argument("--input", help="whitespace-separated 'x y' lines; '-' for stdin")
    p.set_defaults(func=cmd_hull)

    p = sub.add_parser("walk", help="export walk trajectories as CSV")
    p.add_argument("--mu1")
    p.add_argument("--sigma1")
    p.add_argument("--mu2")
    p.add_argument("--sigma2")
    p.add_argument("--steps")
    p.add_argument("--seed")
    p.add_argument("--rep")
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=cmd_walk)

    p = sub.add_parser("simulate", help="replicated hull experiment -> CSV + JSON")
    p.add_argument("--mu1")
    p.add_argument("--mu2")
    p.add_argument("--sigma1")
    p.add_argument("--sigma2")
    p.add_argument("--steps")
    p.add_argument("--reps")
    p.add_argument("--seed")
    p.add_argument("--workers")
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("grid", help="normality p-value grid over sigma pairs")
    p.add_argument("--mu1")
    p.add_argument("--mu2")
    p.add_argument("--sigmas")
    p.add_argument("--steps")
    p.add_argument("--reps")
    p.add_argument("--repeats")
    p.add_argument("--seed")
    p.add_argument("--workers")
    p.add_argument("--neglog-mode", dest="neglog_mode")
    p.add_argument("--out")
    p.add_argument("--config")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("verify", help="drift geometry, assumptions and limit constants")
    p.add_argument("--mu1")
    p.add_argument("--mu2")
    p.add_argument("--sigma1")
    p.add_argument("--sigma2")
    p.add_argument("--config")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plot", help="render a grid CSV as an SVG heatmap")
    p.add_argument("--input", required=True)
    p.add_argument("--functional", required=True, help="L or D")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("oracle", help="exact enumeration report for a discrete spec")
    p.add_argument("--spec", required=True, help="JSON: {n, supports: [[[ [x,y], p ], ...], ...]}")
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            args._config_file = _read_config_file(args.config)
        except FileNotFoundError:
            print(f"walkhull: config file not found: {args.config}", file=sys.stderr)
            return 2
        except CliError as exc:
            print(f"walkhull: {exc}", file=sys.stderr)
            return 2
    else:
        args._config_file = {}
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"walkhull: {exc}", file=sys.stderr)
        return 2
    except CliError as exc:
        print(f"walkhull: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"walkhull: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
