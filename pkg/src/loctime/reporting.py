"""Report files: JSON schema validation, rung CSV, markdown summary, SVG chart."""
from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from pathlib import Path as FsPath

import jsonschema

from .exceptions import ConfigurationError
from .harness import AsConvergenceReport, ConvergenceReport

__all__ = [
    "report_schema",
    "validate_report",
    "load_report",
    "markdown_summary",
    "write_loglog_svg",
]

SUMMARY_HEADER = "| scheme | target | terminal error | fitted rate | verdict |\n|---|---|---|---|---|\n"


@lru_cache(maxsize=None)
def report_schema() -> dict:
    text = resources.files("loctime").joinpath("schemas/convergence_report.schema.json").read_text()
    return json.loads(text)


def validate_report(data) -> None:
    """Raise :class:`ConfigurationError` if ``data`` violates the report schema."""
    if isinstance(data, ConvergenceReport):
        data = data.to_dict()
    try:
        jsonschema.validate(data, report_schema())
    except jsonschema.ValidationError as exc:
        raise ConfigurationError(f"report does not match schema: {exc.message}") from exc


def load_report(path):
    """Read a convergence or almost-sure report from JSON."""
    text = FsPath(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: not JSON ({exc})") from exc
    if "trajectories" in data:
        return AsConvergenceReport.from_json(text)
    validate_report(data)
    return ConvergenceReport.from_dict(data)


def _row(report):
    exp = report.experiment
    verdict = "PASS" if all(report.pass_flags.values()) else "FAIL"
    if isinstance(report, AsConvergenceReport):
        # almost-sure runs: terminal column is the fraction of paths that improved
        return exp["scheme"], exp["target"], repr(report.fraction_decreasing), "-", verdict
    terminal = report.rungs[-1].mean_sup_error
    return exp["scheme"], exp["target"], repr(terminal), repr(report.fitted_rate), verdict


def markdown_summary(reports) -> str:
    """Markdown table with one row per report, sorted by scheme tag (stable)."""
    rows = sorted((_row(r) for r in reports), key=lambda row: row[0])
    body = "".join(f"| {' | '.join(row)} |\n" for row in rows)
    return SUMMARY_HEADER + body


def write_loglog_svg(report: ConvergenceReport, target) -> None:
    """Static log-log chart of mean sup error against eps, with the fitted line."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    eps = np.asarray(report.eps)
    err = np.asarray(report.errors)
    with matplotlib.rc_context({"svg.hashsalt": "loctime", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(5, 4))
        mask = err > 0
        ax.loglog(eps[mask], err[mask], "o-", label="mean sup error")
        if report.fit_status == "ok":
            ax.loglog(eps, np.exp(report.fitted_intercept) * eps**report.fitted_rate, "--",
                      label=f"fit, slope {report.fitted_rate:.3f}")
        ax.set_xlabel("eps")
        ax.set_ylabel("sqrt(E sup_t |error|^2)")
        ax.set_title(f"{report.experiment['scheme']} -> {report.experiment['target']}")
        ax.legend()
        fig.tight_layout()
        fig.savefig(target, format="svg", metadata={"Date": None})
        plt.close(fig)
