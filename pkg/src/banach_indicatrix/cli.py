"""Command-line entry point.

Exit codes: 0 ok, 1 verification failed, 2 usage error, 3 missing file,
4 malformed input.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

from . import fileio
from .dyadic_system import (
    DyadicParams,
    auto_params,
    build_dyadic_system,
    system_from_dict,
    system_to_dict,
    verify_properties,
)
from .errors import IndicatrixError, InvalidParams
from .exhaustion import build_exhaustion, redefine_on_complement
from .indicatrix import MatchRule, auto_y_grid, multiplicity_profile
from .variation import banach_check, builtin_function, change_of_variables_check

log = logging.getLogger("banach_indicatrix")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO, EXIT_SCHEMA = 0, 1, 2, 3, 4
LOG_LEVELS = ("error", "warn", "info", "debug")


class UsageError(Exception):
    pass


class InputMissing(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class RunConfig:
    subcommand: str
    inputs: dict[str, str] = field(default_factory=dict)
    out: str | None = None
    seed: int = 0
    tolerance: float = 0.0
    delta: float = 0.5
    generations: tuple[int, int | None] = (0, None)
    log_level: str = "warn"
    options: dict[str, Any] = field(default_factory=dict)


def _build_parser() -> _Parser:
    parser = _Parser(prog="indicatrix", description="Dyadic cubes and Banach indicatrix tools.")
    parser.add_argument("--log-level", choices=LOG_LEVELS, default=None)
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("build-dyadic", help="build a dyadic cube system on a point cloud")
    p.add_argument("--space", required=True)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--k-min", type=int, default=0)
    p.add_argument("--k-max", type=int, default=None, help="default: first generation of singletons")
    p.add_argument("--scale", type=float, default=None, help="default: diameter / delta**k_min")
    p.add_argument("--strict", action="store_true", help="exit 1 when property 4 fails")
    p.add_argument("--out")

    p = sub.add_parser("indicatrix", help="dyadic counts N_k(y) against exact multiplicities")
    p.add_argument("--space", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--dyadic", help="cube system JSON; built with defaults when omitted")
    p.add_argument("--subset")
    p.add_argument("--y-grid", default="auto")
    p.add_argument("--tol", type=float, default=0.0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out")

    p = sub.add_parser("exhaust", help="nested bounded-oscillation stages of a mapping")
    p.add_argument("--space", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--schedule", required=True)
    p.add_argument("--y0", help="JSON codomain value for the redefinition; default smallest attained value")
    p.add_argument("--out")

    for name, help_text in (("verify-banach", "check ∫N dy = TV(f)"), ("verify-cov", "check the 1-D change of variables")):
        p = sub.add_parser(name, help=help_text)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--fn", help="CSV of x,y samples")
        src.add_argument("--builtin", help="id | double | abs | quad | sin | sin-quarter | randpl:SEED:SEGMENTS")
        p.add_argument("--yres", type=int, default=10_000)
        p.add_argument("--tol", type=float, default=1e-6)
        p.add_argument("--uniform-cells", action="store_true", help="do not split y-cells at sample levels")
        if name == "verify-cov":
            p.add_argument("--u", default="1", help="polynomial coefficients c0,c1,...")
            p.add_argument("--A", dest="intervals", default=None, help="sub-intervals a1:b1,a2:b2")
        p.add_argument("--out")
    return parser


def _parse_floats(text: str, what: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"bad {what} {text!r}: {exc}") from exc


def _parse_intervals(text: str) -> list[tuple[float, float]]:
    try:
        return [tuple(float(v) for v in part.split(":")) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --A {text!r}: {exc}") from exc


def parse_args(argv: Sequence[str]) -> RunConfig:
    """Parse and validate arguments; raises ``UsageError`` or ``InputMissing``."""
    ns = _build_parser().parse_args(list(argv))
    level = ns.log_level or os.environ.get("INDICATRIX_LOG", "warn").lower()
    if level not in LOG_LEVELS:
        raise UsageError(f"log level must be one of {LOG_LEVELS}, got {level!r}")
    cfg = RunConfig(subcommand=ns.subcommand, out=ns.out, log_level=level)

    for key in ("space", "map", "dyadic", "subset", "schedule", "fn"):
        value = getattr(ns, key, None)
        if value is not None:
            cfg.inputs[key] = value
    if ns.subcommand == "indicatrix" and ns.y_grid != "auto":
        cfg.inputs["y_grid"] = ns.y_grid

    if ns.subcommand == "build-dyadic":
        if not 0 < ns.delta < 1:
            raise UsageError(f"--delta must lie in (0, 1), got {ns.delta}")
        cfg.delta = ns.delta
        cfg.generations = (ns.k_min, ns.k_max)
        cfg.options = {"scale": ns.scale, "strict": ns.strict}
    elif ns.subcommand == "indicatrix":
        if ns.tol < 0:
            raise UsageError(f"--tol must be >= 0, got {ns.tol}")
        if ns.threads < 1:
            raise UsageError(f"--threads must be >= 1, got {ns.threads}")
        cfg.tolerance = ns.tol
        cfg.options = {"y_grid": ns.y_grid, "threads": ns.threads}
    elif ns.subcommand == "exhaust":
        cfg.options = {"y0": ns.y0}
    else:
        if ns.yres < 1:
            raise UsageError(f"--yres must be >= 1, got {ns.yres}")
        cfg.tolerance = ns.tol
        cfg.options = {"builtin": ns.builtin, "yres": ns.yres, "uniform_cells": ns.uniform_cells}
        if ns.subcommand == "verify-cov":
            cfg.options["u"] = _parse_floats(ns.u, "--u")
            cfg.options["A"] = None if ns.intervals is None else _parse_intervals(ns.intervals)
            if cfg.options["A"] is not None and any(len(iv) != 2 for iv in cfg.options["A"]):
                raise UsageError(f"--A intervals must look like a:b, got {ns.intervals!r}")

    for key, path in cfg.inputs.items():
        if not Path(path).is_file():
            raise InputMissing(f"--{key.replace('_', '-')}: no such file {path!r}")
    if cfg.out is not None and not Path(cfg.out).resolve().parent.is_dir():
        raise InputMissing(f"--out: directory of {cfg.out!r} does not exist")
    return cfg


# execution details that must not change the report bytes
_NOT_ECHOED = ("out", "log_level")
_NOT_ECHOED_OPTIONS = ("threads",)


def _config_dict(cfg: RunConfig) -> dict[str, Any]:
    d = asdict(cfg)
    d["generations"] = list(cfg.generations)
    for key in _NOT_ECHOED:
        d.pop(key)
    d["options"] = {k: v for k, v in d["options"].items() if k not in _NOT_ECHOED_OPTIONS}
    return d


def _inputs_dict(cfg: RunConfig) -> dict[str, Any]:
    return {k: {"path": v, "sha256": fileio.file_sha256(v)} for k, v in sorted(cfg.inputs.items())}


def _run_build_dyadic(cfg: RunConfig) -> tuple[dict, bool, str]:
    space = fileio.read_point_cloud(cfg.inputs["space"])
    k_min, k_max = cfg.generations
    try:
        params = auto_params(space, cfg.delta, k_min, k_max)
    except InvalidParams as exc:
        raise UsageError(str(exc)) from exc
    if cfg.options["scale"] is not None:
        params = DyadicParams(cfg.delta, params.k_min, params.k_max, cfg.options["scale"])
    try:
        system = build_dyadic_system(space, params)
    except InvalidParams as exc:
        raise UsageError(str(exc)) from exc
    report = verify_properties(system)
    out = system_to_dict(system)
    out["k_min"], out["k_max"] = params.k_min, params.k_max
    out["properties"] = {
        "p1": report.p1,
        "p2": report.p2,
        "p3": {"c": report.p3[0], "C": report.p3[1], "pass": report.p3[2]},
        "p4": report.p4,
        "p4_failures": [list(f) for f in report.p4_failures],
    }
    ok = report.p1 and report.p2 and report.p3[2] and (report.p4 or not cfg.options["strict"])
    sizes = [len(system.generations[k]) for k in params.generations]
    summary = (
        f"build-dyadic: {space.n} points, generations {params.k_min}..{params.k_max}, cubes per generation {sizes}, "
        f"c={report.p3[0]:.6g} C={report.p3[1]:.6g}, p1={report.p1} p2={report.p2} p3={report.p3[2]} p4={report.p4}"
    )
    return out, ok, summary


def _run_indicatrix(cfg: RunConfig) -> tuple[dict, bool, str]:
    space = fileio.read_point_cloud(cfg.inputs["space"])
    f = fileio.read_mapping(cfg.inputs["map"], space)
    if "dyadic" in cfg.inputs:
        system = system_from_dict(space, fileio.read_json(cfg.inputs["dyadic"]))
    else:
        system = build_dyadic_system(space, auto_params(space))
    A = fileio.read_ids(cfg.inputs["subset"]) if "subset" in cfg.inputs else None
    grid = fileio.read_y_grid(cfg.inputs["y_grid"]) if "y_grid" in cfg.inputs else auto_y_grid(f)
    profile = multiplicity_profile(f, system, A, grid, MatchRule(cfg.tolerance), threads=cfg.options["threads"])
    out = {
        "y": [fileio.to_plain(y) for y in profile.y_grid],
        "levels": {str(k): list(v) for k, v in profile.levels.items()},
        "limit": list(profile.limit),
        "exact": list(profile.exact),
        "unresolved": list(profile.unresolved),
    }
    summary = (
        f"indicatrix: {len(grid)} query points, generations {system.params.k_min}..{system.params.k_max}, "
        f"{len(profile.unresolved)} unresolved"
    )
    return out, True, summary


def _run_exhaust(cfg: RunConfig) -> tuple[dict, bool, str]:
    space = fileio.read_point_cloud(cfg.inputs["space"])
    f = fileio.read_mapping(cfg.inputs["map"], space)
    schedule = fileio.read_schedule(cfg.inputs["schedule"])
    seq = build_exhaustion(f, schedule)
    if cfg.options["y0"] is not None:
        try:
            y0 = json.loads(cfg.options["y0"])
        except json.JSONDecodeError as exc:
            raise UsageError(f"--y0 must be JSON, got {cfg.options['y0']!r}") from exc
    else:
        attained = f.attained()
        y0 = attained[0] if attained else None
    out = {
        "stages": [sorted(s) for s in seq.stages],
        "residual": sorted(seq.residual),
        "residual_measure": seq.residual_measure,
        "bounds": [{"r": r, "eps": e} for r, e in seq.oscillation_bounds],
    }
    if y0 is not None:
        g = redefine_on_complement(f, seq.stages[-1], y0)
        out["y0"] = fileio.to_plain(y0)
        out["redefined"] = fileio.mapping_to_dict(g)
    summary = (
        f"exhaust: {len(seq.stages)} stages of sizes {[len(s) for s in seq.stages]}, "
        f"residual {len(seq.residual)} points (measure {seq.residual_measure:.6g})"
    )
    return out, True, summary


def _load_function(cfg: RunConfig):
    if "fn" in cfg.inputs:
        return fileio.read_samples(cfg.inputs["fn"]), cfg.inputs["fn"]
    return builtin_function(cfg.options["builtin"]), cfg.options["builtin"]


def _run_verify(cfg: RunConfig) -> tuple[dict, bool, str]:
    f, source = _load_function(cfg)
    align = not cfg.options["uniform_cells"]
    if cfg.subcommand == "verify-banach":
        report = banach_check(f, cfg.options["yres"], cfg.tolerance, align=align)
    else:
        if not align:
            log.info("verify-cov always splits cells at sample levels; --uniform-cells ignored")
        report = change_of_variables_check(f, cfg.options["u"], cfg.options["A"], cfg.options["yres"], cfg.tolerance)
    out = asdict(report)
    out["passed"] = report.passed
    out["function"] = {"source": source, "samples": int(f.xs.size), "interval": list(f.interval)}
    summary = (
        f"{cfg.subcommand}: lhs={report.lhs:.17g} rhs={report.rhs:.17g} abs_diff={report.abs_diff:.3g} "
        f"tol={report.tolerance_used:.3g} -> {'PASS' if report.passed else 'FAIL'}"
    )
    return out, report.passed, summary


RUNNERS = {
    "build-dyadic": _run_build_dyadic,
    "indicatrix": _run_indicatrix,
    "exhaust": _run_exhaust,
    "verify-banach": _run_verify,
    "verify-cov": _run_verify,
}


def run(cfg: RunConfig) -> int:
    """Execute a parsed configuration, write the JSON report, return the exit code."""
    result, ok, summary = RUNNERS[cfg.subcommand](cfg)
    result["config"] = _config_dict(cfg)
    result["inputs"] = _inputs_dict(cfg)
    text = fileio.dumps(result)
    if cfg.out is None:
        sys.stdout.write(text)
        print(summary, file=sys.stderr)
    else:
        Path(cfg.out).write_text(text, encoding="utf-8")
        print(summary)
    return EXIT_OK if ok else EXIT_FAIL


def _setup_logging(level: str) -> None:
    mapping = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=mapping[level], format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputMissing as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    _setup_logging(cfg.log_level)
    try:
        return run(cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except IndicatrixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA


if __name__ == "__main__":
    sys.exit(main())
