"""Command-line interface: ``gumbelrates {constants,metric,sweep,verify,rate-table}``.

Exit status: 0 success, 1 verification failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Optional, Sequence

from . import __version__
from .exact_law import MaxLaw
from .metrics import KLRoute, MetricKind, QuadratureConfig, compute_metric
from .norming import SchemeKind, make_scheme
from .rates import constant_table, predict, rate_row
from .verify import hall_quadratic_forms, run_checks

SCHEMA_VERSION = "1"

SWEEP_COLUMNS = (
    "scheme", "metric", "n", "value", "err_estimate", "leading_prediction",
    "finite_n_prediction", "ratio_leading", "ratio_finite", "ratio_leading_err",
    "ratio_finite_err", "argmax", "nodes", "kl_route_gap", "error",
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- formatting

def fmt_number(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


def to_csv(columns: Sequence[str], rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt_number(r.get(c)) for c in columns])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):  # numpy scalars
        return _jsonable(obj.item())
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):  # enums
        return obj.value
    return obj


def to_json(payload: dict) -> str:
    return json.dumps(_jsonable(payload), indent=2, sort_keys=False, allow_nan=False) + "\n"


def emit(text: str, out: Optional[str]) -> None:
    if out:
        try:
            with open(out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"cannot write {out}: {exc}") from exc
    else:
        sys.stdout.write(text)


# ------------------------------------------------------------------- parsing

_GEOM = re.compile(r"^\s*geometric\(\s*([^,\s]+)\s*,\s*([^,\s]+)\s*,\s*(\d+)\s*\)\s*$")


def parse_n_grid(spec: str) -> list[float]:
    """``geometric(a,b,k)`` (k points, log-spaced, endpoints exact) or a comma list."""
    m = _GEOM.match(spec)
    if m:
        a, b, k = float(m.group(1)), float(m.group(2)), int(m.group(3))
        if not (a > 0 and b > a and k >= 1):
            raise UsageError("geometric(a,b,k) needs 0 < a < b and k >= 1")
        if k == 1:
            return [a]
        la, lb = math.log10(a), math.log10(b)
        return [10.0 ** (la + (lb - la) * i / (k - 1)) for i in range(k)]
    try:
        vals = [float(t) for t in spec.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"bad n-grid {spec!r}; use geometric(a,b,k) or a comma list") from exc
    if not vals:
        raise UsageError("empty n-grid")
    return vals


def _choice_list(value: str, kind, allowed: Sequence[str]) -> list:
    if value == "all":
        return [kind(v) for v in allowed]
    out = []
    for tok in value.split(","):
        tok = tok.strip()
        if tok not in allowed:
            raise UsageError(f"invalid choice {tok!r}; valid options: {', '.join(allowed)}, all")
        out.append(kind(tok))
    return out


def _env_int(name: str) -> Optional[int]:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError as exc:
        raise UsageError(f"environment variable {name} must be an integer, got {raw!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scheme", default="classical",
                        help="classical, hall, second (comma list or 'all' for sweep)")
    common.add_argument("--metric", "--name", dest="metric", default=None,
                        help="be, w1, tv, kl, fisher or all")
    common.add_argument("--n", type=float, default=None, help="sample size (real, >= 16)")
    common.add_argument("--n-grid", default=None, help="geometric(a,b,k) or comma list")
    common.add_argument("--route", choices=[r.value for r in KLRoute], default="direct",
                        help="KL route")
    common.add_argument("--abs-tol", type=float, default=None)
    common.add_argument("--rel-tol", type=float, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--samples", type=int, default=None, help="Monte Carlo sample count")
    common.add_argument("--format", choices=["csv", "json"], default=None)
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    common.add_argument("--jobs", type=int, default=None)

    p = argparse.ArgumentParser(prog="gumbelrates",
                                description="Exact convergence rates of Gaussian maxima to the Gumbel law.")
    p.add_argument("--version", action="version", version=f"gumbelrates {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("constants", parents=[common], help="named constants and Gumbel integrals")
    sub.add_parser("metric", parents=[common], help="one metric at one n")
    sub.add_parser("sweep", parents=[common], help="metrics x schemes x n-grid")
    v = sub.add_parser("verify", parents=[common], help="run the verification checks")
    v.add_argument("--level", choices=["fast", "full"], default="fast")
    sub.add_parser("rate-table", parents=[common], help="exact metric against both predictors")
    return p


_METRICS = [m.value for m in MetricKind]
_SCHEMES = [s.value for s in SchemeKind]


class Settings:
    def __init__(self, args) -> None:
        if args.abs_tol is not None and not args.abs_tol > 0:
            raise UsageError("--abs-tol must be positive")
        if args.rel_tol is not None and not args.rel_tol > 0:
            raise UsageError("--rel-tol must be positive")
        kw = {}
        if args.abs_tol is not None:
            kw["abs_tol"] = args.abs_tol
        if args.rel_tol is not None:
            kw["rel_tol"] = args.rel_tol
        self.cfg = QuadratureConfig(**kw)
        jobs = args.jobs if args.jobs is not None else _env_int("GUMBELRATES_JOBS")
        self.jobs = 1 if jobs is None else jobs
        if self.jobs < 1:
            raise UsageError("--jobs must be >= 1")
        seed = args.seed if args.seed is not None else _env_int("GUMBELRATES_SEED")
        self.seed = 0 if seed is None else seed
        if not 0 <= self.seed < 2**64:
            raise UsageError("seed must be a 64-bit unsigned integer")
        self.route = KLRoute(args.route)
        self.samples = args.samples

    def echo(self) -> dict:
        return {"abs_tol": self.cfg.abs_tol, "rel_tol": self.cfg.rel_tol,
                "max_subdivisions": self.cfg.max_subdivisions, "jobs": self.jobs,
                "seed": self.seed, "route": self.route.value, "samples": self.samples}


def _metadata(command: str, settings: Settings, extra: Optional[dict] = None) -> dict:
    cfg = {"command": command, **settings.echo(), **(extra or {})}
    return {
        "tool": "gumbelrates",
        "version": __version__,
        "config": cfg,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }


# ------------------------------------------------------------------ commands

def _row_task(task) -> dict:
    kind, metric, n, cfg, route = task
    row = {c: None for c in SWEEP_COLUMNS}
    row.update(scheme=kind.value, metric=metric.value, n=float(n))
    try:
        law = MaxLaw(make_scheme(kind, n))
        kw = {"route": route} if metric is MetricKind.KL else {}
        res = compute_metric(metric, law, cfg, **kw)
        rr = rate_row(metric, kind, n, cfg, result=res).to_dict()
        for k in ("value", "err_estimate", "leading_prediction", "finite_n_prediction",
                  "ratio_leading", "ratio_finite", "ratio_leading_err", "ratio_finite_err"):
            row[k] = rr[k]
        row["argmax"] = res.argmax
        row["nodes"] = res.nodes
        if metric is MetricKind.KL and route is KLRoute.BOTH:
            row["kl_route_gap"] = res.extras["gap"]
    except Exception as exc:  # recorded per row; the sweep continues
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _run_rows(tasks, jobs: int) -> list[dict]:
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_row_task, tasks, chunksize=1))
    return [_row_task(t) for t in tasks]


def _grid_from(args, default: str) -> list[float]:
    if args.n_grid is not None:
        grid = parse_n_grid(args.n_grid)
    elif args.n is not None:
        grid = [args.n]
    else:
        grid = parse_n_grid(default)
    for n in grid:
        if not (math.isfinite(n) and 16 <= n <= 1e300):
            raise UsageError(f"n must lie in [16, 1e300], got {n!r}")
    return grid


def cmd_constants(args, settings: Settings) -> tuple[str, int]:
    rows = constant_table()
    if (args.format or "json") == "csv":
        return to_csv(("name", "value", "published"), rows), EXIT_OK
    payload = {"schema_version": SCHEMA_VERSION, "metadata": _metadata("constants", settings),
               "constants": rows}
    return to_json(payload), EXIT_OK


def cmd_metric(args, settings: Settings) -> tuple[str, int]:
    if args.n is None:
        raise UsageError("metric requires --n")
    if args.n_grid is not None:
        raise UsageError("metric takes --n, not --n-grid")
    n = _grid_from(args, "")[0]
    kinds = _choice_list(args.scheme, SchemeKind, _SCHEMES)
    metrics = _choice_list(args.metric or "be", MetricKind, _METRICS)
    if (args.format or "json") == "csv":
        rows = [_row_task((k, m, n, settings.cfg, settings.route)) for k in kinds for m in metrics]
        return to_csv(SWEEP_COLUMNS, rows), EXIT_OK
    results = []
    for kind in kinds:
        law = MaxLaw(make_scheme(kind, n))
        for metric in metrics:
            kw = {"route": settings.route} if metric is MetricKind.KL else {}
            res = compute_metric(metric, law, settings.cfg, **kw)
            results.append({"scheme": law.scheme.to_dict(), "result": res.to_dict(),
                            "prediction": predict(metric, kind, n).to_dict()})
    payload = {"schema_version": SCHEMA_VERSION,
               "metadata": _metadata("metric", settings, {"n": n}), "results": results}
    return to_json(payload), EXIT_OK


def cmd_sweep(args, settings: Settings, command: str = "sweep") -> tuple[str, int]:
    grid = _grid_from(args, "geometric(1e4,1e16,13)")
    kinds = _choice_list(args.scheme, SchemeKind, _SCHEMES)
    metrics = _choice_list(args.metric or "all", MetricKind, _METRICS)
    tasks = [(k, m, n, settings.cfg, settings.route) for k in kinds for m in metrics for n in grid]
    rows = _run_rows(tasks, settings.jobs)
    if (args.format or "csv") == "csv":
        return to_csv(SWEEP_COLUMNS, rows), EXIT_OK
    payload = {
        "schema_version": SCHEMA_VERSION,
        "metadata": _metadata(command, settings, {"n_grid": grid}),
        "columns": list(SWEEP_COLUMNS),
        "rows": rows,
        "constants": constant_table(),
    }
    return to_json(payload), EXIT_OK


def cmd_rate_table(args, settings: Settings) -> tuple[str, int]:
    if args.metric is None or args.metric == "all" or "," in args.metric:
        raise UsageError("rate-table requires a single --metric")
    if args.scheme == "all" or "," in args.scheme:
        raise UsageError("rate-table requires a single --scheme")
    return cmd_sweep(args, settings, "rate-table")


def cmd_verify(args, settings: Settings) -> tuple[str, int]:
    level = args.level
    checks = run_checks(level, settings.cfg, settings.seed, samples=settings.samples,
                        jobs=settings.jobs)
    status = EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL
    if (args.format or "json") == "csv":
        rows = [{"check": c.name, "passed": c.passed, "observed": float(c.observed),
                 "required": c.required} for c in checks]
        return to_csv(("check", "passed", "observed", "required"), rows), status
    payload = {
        "schema_version": SCHEMA_VERSION,
        "metadata": _metadata("verify", settings, {"level": level}),
        "passed": status == EXIT_OK,
        "checks": [c.to_dict() for c in checks],
        "diagnostics": {"hall_large_n": hall_quadratic_forms()},
    }
    return to_json(payload), status


COMMANDS = {
    "constants": cmd_constants,
    "metric": cmd_metric,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "rate-table": cmd_rate_table,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        settings = Settings(args)
        if args.metric not in (None, "all"):
            _choice_list(args.metric, MetricKind, _METRICS)
        _choice_list(args.scheme, SchemeKind, _SCHEMES)
        text, status = COMMANDS[args.command](args, settings)
        emit(text, args.out)
        return status
    except UsageError as exc:
        print(f"gumbelrates: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
