"""Reference local-time computations used as ground truth.

Three independent constructions of ``t -> L_t^level``:

* ``TANAKA``: residual of the discrete Tanaka formula,
  ``2 (X_t^+ - X_0^+ - sum 1{X_i > 0} dX_i)`` after shifting to level 0.
  No tuning parameter; this is the primary oracle.
* ``OCCUPATION``: ``(1/w) sum 1{0 <= X_i <= w} dX_i^2``, occupation of the
  band ``[level, level + w]`` weighted by squared increments.
* ``DOWNCROSS``: ``w`` times the number of completed down-crossings of the
  band. Its normalization against the other two is calibrated, not assumed;
  see :func:`calibrate_downcrossing`.
"""
from __future__ import annotations

import enum
import math

import numpy as np

from .estimators import Curve
from .exceptions import ConfigurationError
from .paths import Path

__all__ = [
    "OracleId",
    "tanaka_local_time",
    "occupation_density",
    "downcrossing_estimate",
    "oracle_curve",
    "calibrate_downcrossing",
    "stochastic_integral",
    "realized_variance",
    "path_holder_constant",
    "local_time_holder_constant",
    "batch_tanaka",
    "batch_occupation",
    "batch_downcross",
]


class OracleId(str, enum.Enum):
    TANAKA = "TANAKA"
    OCCUPATION = "OCCUPATION"
    DOWNCROSS = "DOWNCROSS"

    @classmethod
    def parse(cls, tag) -> "OracleId":
        if isinstance(tag, cls):
            return tag
        try:
            return cls(str(tag).upper())
        except ValueError:
            raise ConfigurationError(f"unknown oracle {tag!r}") from None


def _cum(g):
    out = np.zeros(g.shape[:-1] + (g.shape[-1] + 1,))
    np.cumsum(g, axis=-1, out=out[..., 1:])
    return out


def batch_stochastic_integral(x):
    """Forward-Euler ``sum_{t_i < t} 1{X_i > 0} (X_{i+1} - X_i)``."""
    return _cum((x[..., :-1] > 0) * np.diff(x, axis=-1))


def batch_tanaka(x):
    pos = np.maximum(x, 0.0)
    return 2.0 * (pos - pos[..., :1] - batch_stochastic_integral(x))


def batch_occupation(x, width):
    d = np.diff(x, axis=-1)
    a = x[..., :-1]
    inside = (a >= 0) & (a <= width)
    return _cum(inside * (d * d)) / width


def _downcross_counts(row, width):
    up = row >= width
    low = row <= 0
    events = np.flatnonzero(up | low)
    counts = np.zeros(row.shape[0], dtype=np.int64)
    if events.size < 2:
        return counts
    labels = up[events]
    done = events[1:][labels[:-1] & ~labels[1:]]
    np.add.at(counts, done, 1)
    return np.cumsum(counts)


def batch_downcross(x, width, normalization=1.0):
    x = np.asarray(x, dtype=np.float64)
    flat = x.reshape(-1, x.shape[-1])
    out = np.empty(flat.shape)
    for r in range(flat.shape[0]):
        out[r] = _downcross_counts(flat[r], width)
    return (normalization * width) * out.reshape(x.shape)


def batch_realized_variance(x):
    d = np.diff(x, axis=-1)
    return _cum(d * d)


def _shifted(p: Path, level: float) -> np.ndarray:
    if not isinstance(p, Path):
        raise ConfigurationError("expected a Path")
    level = float(level)
    if not math.isfinite(level):
        raise ConfigurationError("level must be finite")
    return p.values - level


def _width(width) -> float:
    width = float(width)
    if not (math.isfinite(width) and width > 0):
        raise ConfigurationError(f"band width must be finite and > 0, got {width!r}")
    return width


def tanaka_local_time(p: Path, level: float = 0.0) -> Curve:
    """Discrete Tanaka residual. Raw values; slightly negative entries are kept."""
    return Curve(p.grid, batch_tanaka(_shifted(p, level)), OracleId.TANAKA.value)


def occupation_density(p: Path, level: float, width: float) -> Curve:
    width = _width(width)
    return Curve(p.grid, batch_occupation(_shifted(p, level), width), OracleId.OCCUPATION.value)


def downcrossing_estimate(p: Path, level: float, width: float, normalization: float = 1.0) -> Curve:
    """``normalization * width * D_t`` with ``D_t`` the completed down-crossings of
    ``[level, level + width]`` up to and including grid time ``t``."""
    width = _width(width)
    values = batch_downcross(_shifted(p, level), width, normalization)
    return Curve(p.grid, values, OracleId.DOWNCROSS.value)


def oracle_curve(p: Path, oracle, level: float = 0.0, width: float = 2.0**-6,
                 normalization: float = 1.0) -> Curve:
    oracle = OracleId.parse(oracle)
    if oracle is OracleId.TANAKA:
        return tanaka_local_time(p, level)
    if oracle is OracleId.OCCUPATION:
        return occupation_density(p, level, width)
    return downcrossing_estimate(p, level, width, normalization)


def stochastic_integral(p: Path, level: float = 0.0) -> Curve:
    return Curve(p.grid, batch_stochastic_integral(_shifted(p, level)), "STOCH_INT")


def realized_variance(p: Path) -> Curve:
    return Curve(p.grid, batch_realized_variance(p.values), "REALIZED_VARIANCE")


def calibrate_downcrossing(paths, level: float = 0.0, width: float = 2.0**-6) -> dict:
    """Fit the constant ``c`` making ``c * width * D_T`` match the Tanaka oracle.

    ``paths`` is an array of shape ``(N, n + 1)`` or a sequence of :class:`Path`.
    The fit is the ratio of Monte Carlo means at the terminal time.
    """
    x = np.stack([q.values for q in paths]) if not isinstance(paths, np.ndarray) else paths
    x = np.atleast_2d(x) - float(level)
    width = _width(width)
    tanaka = batch_tanaka(x)[:, -1]
    raw = batch_downcross(x, width)[:, -1]
    if raw.mean() <= 0:
        raise ConfigurationError("no completed down-crossings; cannot calibrate")
    c = float(tanaka.mean() / raw.mean())
    return {
        "normalization": c,
        "tanaka_mean": float(tanaka.mean()),
        "raw_downcross_mean": float(raw.mean()),
        "num_paths": int(x.shape[0]),
        "width": width,
    }


def path_holder_constant(values, step: float, delta: float) -> float:
    """Smallest ``C`` with ``|X_s - X_t| <= C |s - t|^delta`` over dyadic lags."""
    if not 0 < delta < 1:
        raise ConfigurationError("delta must lie in (0, 1)")
    x = np.asarray(values, dtype=np.float64)
    n = x.shape[-1] - 1
    best = 0.0
    lag = 1
    while lag <= n:
        inc = np.max(np.abs(x[lag:] - x[:-lag]))
        best = max(best, inc / (lag * step) ** delta)
        lag *= 2
    return float(best)


def local_time_holder_constant(values, delta: float, levels=None) -> float:
    """Smallest ``K`` with ``sup_t |L_t^a - L_t^b| <= K |a - b|^delta`` over a level lattice.

    Local times come from the Tanaka oracle; the default lattice is 17 levels
    spaced 1/16 around 0.
    """
    if not 0 < delta < 1:
        raise ConfigurationError("delta must lie in (0, 1)")
    if levels is None:
        levels = np.arange(-8, 9) / 16.0
    levels = np.asarray(levels, dtype=np.float64)
    x = np.asarray(values, dtype=np.float64)
    curves = batch_tanaka(x[None, :] - levels[:, None])
    best = 0.0
    for i in range(len(levels)):
        for k in range(i + 1, len(levels)):
            gap = abs(levels[k] - levels[i])
            best = max(best, np.max(np.abs(curves[k] - curves[i])) / gap**delta)
    return float(best)
