"""Command-line front end: ``loctime <verb> [options]``.

Verbs
-----
simulate     write simulated paths as ``path_XXXX.csv``
estimate     write ``curve_<SCHEME>.csv`` for one path and one eps
converge     run a convergence experiment: ``report.json``, ``rungs.csv``, ``loglog.svg``
as-converge  per-path almost-sure experiment: ``as_report.json``
report       markdown summary table of report files

Exit codes: 0 success, 2 configuration, 3 eps misalignment, 4 I/O,
5 a pass flag is false under ``--enforce`` (or a self check failed),
1 anything else raised by the package.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path as FsPath

import numpy as np

from . import config as _cfg
from .estimators import SchemeId, scheme_curve
from .exceptions import AcceptanceError, ConfigurationError, LocTimeError
from .harness import (
    fit_rate,
    run_as_convergence,
    run_experiment,
    run_reversal_experiment,
    simulate_paths,
)
from .paths import Path, dump_path_csv, load_path_csv
from .reporting import load_report, markdown_summary, validate_report, write_loglog_svg

logger = logging.getLogger("loctime")

SELFTEST_RATE = 0.25
SELFTEST_TOL = 1e-12
IDENTITY_TOL = 1e-12

# (lhs, [(sign, term), ...]) checked by --check-identities
_IDENTITIES = [
    ("J", [(-1.0, "I1"), (1.0, "I2")]),
    ("I3", [(1.0, "I31"), (1.0, "I32"), (1.0, "R3")]),
    ("I4", [(1.0, "I41"), (1.0, "I42"), (1.0, "R4")]),
]


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="YAML or JSON config file")
    p.add_argument("--out", help="output directory (default: current directory)")
    p.add_argument("--seed", type=int, help="master seed (u64)")
    p.add_argument("--paths", type=int, help="number of paths")
    p.add_argument("--grid-log2", type=int, help="grid has 2**k steps")
    p.add_argument("--ladder", help="comma separated eps values")
    p.add_argument("--scheme", action="append", help="scheme tag (repeatable for estimate)")
    p.add_argument("--level", type=float, help="local-time level")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key")
    p.add_argument("--enforce", action="store_true", help="exit 5 when a pass flag is false")
    p.add_argument("--no-timings", action="store_true", help="omit timing metadata")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="loctime", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="verb", required=True)
    sub.add_parser("simulate", parents=[common], help="write simulated paths")
    est = sub.add_parser("estimate", parents=[common], help="write scheme curves for one path")
    est.add_argument("--eps", type=float, help="regularization width")
    est.add_argument("--path-csv", help="read the path from this file instead of simulating")
    est.add_argument("--check-identities", action="store_true",
                     help="verify J = -I1 + I2 and the I3/I4 splits from the written files")
    conv = sub.add_parser("converge", parents=[common], help="convergence experiment")
    conv.add_argument("--selftest", action="store_true",
                      help="fit a synthetic C*eps^0.25 series instead of simulating")
    sub.add_parser("as-converge", parents=[common], help="almost-sure convergence experiment")
    rep = sub.add_parser("report", parents=[common], help="summarize report files")
    rep.add_argument("inputs", nargs="*", help="report JSON files or directories")
    return parser


def resolve_config(args) -> dict:
    """File values, then dedicated flags, then ``--set`` overrides."""
    cfg = _cfg.load_config(args.config)
    flags = {
        "seed": args.seed,
        "paths": args.paths,
        "grid_log2": args.grid_log2,
        "ladder": args.ladder,
        "level": args.level,
    }
    if args.grid_log2 is not None:
        cfg.pop("num_steps", None)
    if args.ladder is not None:
        cfg.pop("ladder_log2", None)
    if args.scheme:
        flags["scheme"] = args.scheme[0]
        flags["schemes"] = list(args.scheme)
    for attr, key in (("eps", "eps"), ("path_csv", "path_csv")):
        if getattr(args, attr, None) is not None:
            flags[key] = getattr(args, attr)
    cfg.update({k: v for k, v in flags.items() if v is not None})
    return _cfg.apply_overrides(cfg, args.set)


def _out_dir(args) -> FsPath:
    out = FsPath(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: FsPath, text: str) -> None:
    path.write_text(text)
    logger.info("wrote %s", path)


# --------------------------------------------------------------------------
# verbs

def cmd_simulate(cfg: dict, args) -> int:
    grid = _cfg.grid_from(cfg)
    process = _cfg.process_from(cfg)
    first = int(cfg.get("stream", 0))
    streams = list(range(first, first + int(cfg["paths"])))
    values = simulate_paths(process, grid, int(cfg["seed"]), streams)
    out = _out_dir(args)
    for k, row in zip(streams, values):
        _write(out / f"path_{k:04d}.csv", dump_path_csv(Path(grid, row)))
    return 0


def _estimate_path(cfg) -> Path:
    if cfg.get("path_csv"):
        return load_path_csv(FsPath(cfg["path_csv"]))
    grid = _cfg.grid_from(cfg)
    stream = int(cfg.get("stream", 0))
    row = simulate_paths(_cfg.process_from(cfg), grid, int(cfg["seed"]), [stream])[0]
    return Path(grid, row)


def _read_curve(path: FsPath) -> np.ndarray:
    rows = list(csv.reader(io.StringIO(path.read_text())))
    if not rows or rows[0] != ["t", "value"]:
        raise ConfigurationError(f"{path}: not a curve file")
    return np.array([float(r[1]) for r in rows[1:] if r])


def check_identities(out: FsPath) -> dict:
    """Max residual of each decomposition, read back from the curve files in ``out``."""
    result = {}
    for lhs, terms in _IDENTITIES:
        names = [lhs] + [t for _, t in terms]
        files = {nm: out / f"curve_{nm}.csv" for nm in names}
        if not all(f.exists() for f in files.values()):
            continue
        left = _read_curve(files[lhs])
        right = sum(sign * _read_curve(files[nm]) for sign, nm in terms)
        scale = 1.0 + float(np.max(np.abs(left)))
        result[lhs] = float(np.max(np.abs(left - right))) / scale
    return result


def cmd_estimate(cfg: dict, args) -> int:
    if cfg.get("eps") is None:
        raise ConfigurationError("estimate needs 'eps'")
    schemes = cfg.get("schemes") or ([cfg["scheme"]] if cfg.get("scheme") else ["J"])
    if isinstance(schemes, str):
        schemes = [s for s in schemes.split(",") if s.strip()]
    schemes = [SchemeId.parse(s) for s in schemes]
    if getattr(args, "check_identities", False):
        for lhs, terms in _IDENTITIES:
            for nm in [lhs] + [t for _, t in terms]:
                if SchemeId(nm) not in schemes:
                    schemes.append(SchemeId(nm))
    p = _estimate_path(cfg)
    out = _out_dir(args)
    level = float(cfg.get("level", 0.0))
    for s in schemes:
        curve = scheme_curve(p, s, float(cfg["eps"]), level)
        _write(out / f"curve_{s.value}.csv", curve.to_csv())
    if getattr(args, "check_identities", False):
        residuals = check_identities(out)
        for name, r in residuals.items():
            print(f"identity {name}: max relative residual {r:.3e}")
        if any(r > IDENTITY_TOL for r in residuals.values()):
            raise AcceptanceError("a decomposition identity failed")
    return 0


def _selftest(cfg, args) -> int:
    grid = _cfg.grid_from(cfg)
    if cfg.get("ladder") is None and cfg.get("ladder_log2") is None:
        cfg = dict(cfg, ladder_log2=[4, min(10, grid.num_steps.bit_length() - 1)])
    ladder = _cfg.ladder_from(cfg, grid)
    errors = [0.7 * e**SELFTEST_RATE for e in ladder.eps]
    slope, intercept, r2 = fit_rate(errors, ladder)
    payload = {"synthetic_rate": SELFTEST_RATE, "fitted_rate": slope,
               "fitted_intercept": intercept, "r_squared": r2, "eps": ladder.eps}
    _write(_out_dir(args) / "selftest.json", json.dumps(payload, indent=2) + "\n")
    print(f"selftest slope {slope!r} (expected {SELFTEST_RATE})")
    if abs(slope - SELFTEST_RATE) > SELFTEST_TOL:
        raise AcceptanceError(f"selftest slope {slope!r} differs from {SELFTEST_RATE}")
    return 0


def cmd_converge(cfg: dict, args) -> int:
    if getattr(args, "selftest", False):
        return _selftest(cfg, args)
    spec = _cfg.experiment_from(cfg)
    if cfg.get("reversal"):
        report = run_reversal_experiment(spec)
    else:
        report = run_experiment(spec)
    data = report.to_dict(include_timings=not args.no_timings)
    validate_report(data)
    out = _out_dir(args)
    _write(out / "report.json", report.to_json(include_timings=not args.no_timings))
    _write(out / "rungs.csv", report.rungs_csv())
    if cfg.get("svg", True) and report.fit_status == "ok":
        write_loglog_svg(report, out / "loglog.svg")
    sys.stdout.write(markdown_summary([report]))
    if args.enforce and not report.passed:
        failed = sorted(k for k, v in report.pass_flags.items() if not v)
        raise AcceptanceError(f"pass flags false: {', '.join(failed)}")
    return 0


def cmd_as_converge(cfg: dict, args) -> int:
    cfg = dict(cfg, rate_window=None)
    spec = _cfg.experiment_from(cfg)
    report = run_as_convergence(spec, min_fraction=float(cfg.get("min_fraction", 0.95)))
    out = _out_dir(args)
    _write(out / "as_report.json", report.to_json(include_timings=not args.no_timings))
    print(f"fraction_decreasing {report.fraction_decreasing!r} (required {report.min_fraction!r})")
    if args.enforce and not all(report.pass_flags.values()):
        raise AcceptanceError("fraction of decreasing trajectories below threshold")
    return 0


def _report_files(inputs):
    files = []
    for item in inputs:
        p = FsPath(item)
        if p.is_dir():
            files += sorted(q for q in p.glob("*.json") if q.name != "selftest.json")
        elif p.exists():
            files.append(p)
        else:
            raise FileNotFoundError(item)
    return files


def cmd_report(cfg: dict, args) -> int:
    reports = [load_report(f) for f in _report_files(args.inputs)]
    text = markdown_summary(reports)
    if args.out:
        _write(_out_dir(args) / "summary.md", text)
    sys.stdout.write(text)
    if args.enforce and not all(all(r.pass_flags.values()) for r in reports):
        raise AcceptanceError("at least one report has a false pass flag")
    return 0


_VERBS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "converge": cmd_converge,
    "as-converge": cmd_as_converge,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = {} if args.verb == "report" else resolve_config(args)
        return _VERBS[args.verb](cfg, args)
    except LocTimeError as exc:
        print(f"loctime: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"loctime: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
