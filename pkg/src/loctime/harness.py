"""Monte Carlo convergence experiments.

An experiment evaluates one scheme on ``num_paths`` simulated paths for every
rung of an epsilon ladder, compares each curve with its limit computed by an
oracle on the *same* path, and summarizes the sup-over-time deviation by its
root mean square across paths (the ``L2(Omega)`` norm of ``sup_t |.|``).
Path ``k`` always comes from RNG substream ``k`` of the master seed, so
results do not depend on chunking or on the number of workers.
"""
from __future__ import annotations

import enum
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields
from typing import Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from . import oracle as _oracle
from .estimators import Epsilon, SchemeId, batch_scheme, reversal_split
from .exceptions import ConfigurationError, DegenerateFitError
from .paths import (
    DiffusionSpec,
    GridSpec,
    Path,
    brownian_batch,
    diffusion_batch,
)

__all__ = [
    "Target",
    "ProcessSpec",
    "EpsilonLadder",
    "ExperimentSpec",
    "RungStats",
    "ConvergenceReport",
    "AsConvergenceReport",
    "DEFAULT_TARGETS",
    "fit_rate",
    "run_experiment",
    "run_as_convergence",
    "run_reversal_experiment",
    "make_process",
    "simulate_paths",
]


class Target(str, enum.Enum):
    L = "L"
    HALF_L = "HALF_L"
    QUARTER_L = "QUARTER_L"
    ZERO = "ZERO"
    STOCH_INT = "STOCH_INT"
    QV_T = "QV_T"

    @classmethod
    def parse(cls, tag) -> "Target":
        if isinstance(tag, cls):
            return tag
        try:
            return cls(str(tag).upper())
        except ValueError:
            raise ConfigurationError(f"unknown target {tag!r}") from None


DEFAULT_TARGETS = {
    SchemeId.J: Target.L,
    SchemeId.I3: Target.HALF_L,
    SchemeId.I4: Target.HALF_L,
    SchemeId.I31: Target.QUARTER_L,
    SchemeId.I32: Target.QUARTER_L,
    SchemeId.I41: Target.QUARTER_L,
    SchemeId.I42: Target.QUARTER_L,
    SchemeId.R_EPS: Target.ZERO,
    SchemeId.R3: Target.ZERO,
    SchemeId.R4: Target.ZERO,
    SchemeId.I1: Target.STOCH_INT,
    SchemeId.QV: Target.QV_T,
}

_LOCAL_TIME_FACTOR = {Target.L: 1.0, Target.HALF_L: 0.5, Target.QUARTER_L: 0.25}


# --------------------------------------------------------------------------
# processes

@dataclass(frozen=True)
class ProcessSpec:
    """Either standard Brownian motion or an Euler-Maruyama diffusion.

    ``params`` records how the process was built so reports and configs can
    name it; ``diffusion`` carries the callables.
    """

    kind: str = "BROWNIAN"
    diffusion: Optional[DiffusionSpec] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        kind = str(self.kind).upper()
        if kind not in ("BROWNIAN", "DIFFUSION"):
            raise ConfigurationError(f"process kind must be BROWNIAN or DIFFUSION, got {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind == "DIFFUSION" and self.diffusion is None:
            raise ConfigurationError("a DIFFUSION process needs a DiffusionSpec")

    def describe(self) -> dict:
        out = {"kind": self.kind}
        out.update(self.params)
        return out


def _const(value):
    value = float(value)

    def coef(s, x):
        return value

    return coef


def make_process(name: str = "brownian", **params) -> ProcessSpec:
    """Named processes usable from config files.

    ``brownian``; ``ou`` (``theta``, ``mean``, ``sigma``: ``dX = -theta (X - mean) dt
    + sigma dB``); ``constant_coeff`` (``drift``, ``sigma`` constants); ``constant``
    (``b = sigma = 0``); ``linear`` (``slope``: ``b = slope``, ``sigma = 0``).
    """
    key = str(name).lower()
    if key == "brownian":
        if params:
            raise ConfigurationError(f"brownian takes no parameters, got {sorted(params)}")
        return ProcessSpec("BROWNIAN", None, {"name": "brownian"})
    if key == "ou":
        theta = float(params.pop("theta", 1.0))
        mean = float(params.pop("mean", 0.0))
        sigma = float(params.pop("sigma", 1.0))
        _no_extra(key, params)

        def drift(s, x):
            return -theta * (x - mean)

        spec = DiffusionSpec(drift, _const(sigma), name="ou")
        return ProcessSpec("DIFFUSION", spec, {"name": "ou", "theta": theta, "mean": mean, "sigma": sigma})
    if key == "constant_coeff":
        b = float(params.pop("drift", 0.0))
        s = float(params.pop("sigma", 1.0))
        _no_extra(key, params)
        spec = DiffusionSpec(_const(b), _const(s), name="constant_coeff")
        return ProcessSpec("DIFFUSION", spec, {"name": "constant_coeff", "drift": b, "sigma": s})
    if key == "constant":
        _no_extra(key, params)
        spec = DiffusionSpec(_const(0.0), _const(0.0), name="constant")
        return ProcessSpec("DIFFUSION", spec, {"name": "constant"})
    if key == "linear":
        slope = float(params.pop("slope", 1.0))
        _no_extra(key, params)
        spec = DiffusionSpec(_const(slope), _const(0.0), name="linear")
        return ProcessSpec("DIFFUSION", spec, {"name": "linear", "slope": slope})
    raise ConfigurationError(f"unknown process {name!r}")


def _no_extra(name, params):
    if params:
        raise ConfigurationError(f"unexpected parameters for {name}: {sorted(params)}")


def simulate_paths(process: ProcessSpec, grid: GridSpec, master_seed: int,
                   stream_indices: Sequence[int]) -> np.ndarray:
    if process.kind == "BROWNIAN":
        return brownian_batch(grid, master_seed, stream_indices)
    return diffusion_batch(grid, process.diffusion, master_seed, stream_indices)


# --------------------------------------------------------------------------
# ladders and specs

@dataclass(frozen=True)
class EpsilonLadder:
    rungs: tuple

    def __post_init__(self):
        rungs = tuple(self.rungs)
        if not rungs:
            raise ConfigurationError("an epsilon ladder needs at least one rung")
        if not all(isinstance(r, Epsilon) for r in rungs):
            raise ConfigurationError("ladder rungs must be Epsilon instances")
        for a, b in zip(rungs, rungs[1:]):
            if not b.eps < a.eps:
                raise ConfigurationError("ladder must be strictly decreasing")
        object.__setattr__(self, "rungs", rungs)

    @classmethod
    def from_values(cls, values, grid: GridSpec) -> "EpsilonLadder":
        return cls(tuple(Epsilon.aligned(v, grid) for v in values))

    @classmethod
    def geometric(cls, eps0: float, ratio: float, count: int, grid: GridSpec) -> "EpsilonLadder":
        if not 0 < ratio < 1:
            raise ConfigurationError("geometric ratio must lie in (0, 1)")
        return cls.from_values([eps0 * ratio**k for k in range(count)], grid)

    @property
    def eps(self) -> list:
        return [r.eps for r in self.rungs]

    @property
    def lags(self) -> list:
        return [r.lag_m for r in self.rungs]

    def __len__(self):
        return len(self.rungs)

    def max_ratio(self) -> float:
        if len(self.rungs) < 2:
            return 0.0
        return max(b.eps / a.eps for a, b in zip(self.rungs, self.rungs[1:]))

    def check_aligned(self, grid: GridSpec):
        for r in self.rungs:
            r.check(grid)


@dataclass(frozen=True)
class ExperimentSpec:
    scheme: SchemeId
    grid: GridSpec
    ladder: EpsilonLadder
    num_paths: int
    master_seed: int
    level: float = 0.0
    process: ProcessSpec = field(default_factory=ProcessSpec)
    target: Optional[Target] = None
    oracle_refine: int = 1
    holder_delta: float = 0.45
    holder_paths: int = 16
    rate_window: Optional[tuple] = (0.15, 0.60)
    terminal_max: Optional[float] = None
    chunk_size: int = 32
    n_jobs: int = 1
    keep_per_path: bool = False

    def __post_init__(self):
        scheme = SchemeId.parse(self.scheme)
        object.__setattr__(self, "scheme", scheme)
        if scheme not in DEFAULT_TARGETS:
            raise ConfigurationError(
                f"scheme {scheme.value} has no Monte Carlo target; use the dedicated operation"
            )
        target = DEFAULT_TARGETS[scheme] if self.target is None else Target.parse(self.target)
        if target is not DEFAULT_TARGETS[scheme] and target is not Target.ZERO:
            raise ConfigurationError(
                f"target {target.value} is inconsistent with scheme {scheme.value} "
                f"(expected {DEFAULT_TARGETS[scheme].value} or ZERO)"
            )
        object.__setattr__(self, "target", target)
        if int(self.num_paths) < 1:
            raise ConfigurationError("num_paths must be positive")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ConfigurationError("master_seed must fit in an unsigned 64-bit integer")
        if int(self.oracle_refine) < 1:
            raise ConfigurationError("oracle_refine must be >= 1")
        if not 0 < self.holder_delta < 0.5:
            raise ConfigurationError("holder_delta must lie in (0, 1/2)")
        if not math.isfinite(self.level):
            raise ConfigurationError("level must be finite")
        if self.chunk_size < 1:
            raise ConfigurationError("chunk_size must be positive")
        self.ladder.check_aligned(self.grid)

    @property
    def fine_grid(self) -> GridSpec:
        g = self.grid
        return GridSpec(g.horizon, g.num_steps * int(self.oracle_refine), g.origin_value)

    def describe(self) -> dict:
        return {
            "scheme": self.scheme.value,
            "target": self.target.value,
            "level": self.level,
            "process": self.process.describe(),
            "grid": {"horizon": self.grid.horizon, "num_steps": self.grid.num_steps,
                     "origin_value": self.grid.origin_value},
            "ladder": self.ladder.eps,
            "lags": self.ladder.lags,
            "num_paths": int(self.num_paths),
            "master_seed": int(self.master_seed),
            "oracle_refine": int(self.oracle_refine),
        }


# --------------------------------------------------------------------------
# reports

@dataclass
class RungStats:
    eps: float
    lag: int
    mean_sup_error: float
    std_error: float
    max_sup_error: float
    mean_argmax_time: float
    mean_estimate_T: float
    mean_target_T: float
    mean_abs_terminal_error: float
    per_path_sup_errors: Optional[list] = None


@dataclass
class ConvergenceReport:
    experiment: dict
    rungs: list
    fitted_rate: float
    fitted_intercept: Optional[float]
    r_squared: Optional[float]
    fit_status: str
    holder: dict
    pass_flags: dict
    extras: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    @property
    def eps(self):
        return [r.eps for r in self.rungs]

    @property
    def errors(self):
        return [r.mean_sup_error for r in self.rungs]

    @property
    def passed(self) -> bool:
        return all(self.pass_flags.values())

    def to_dict(self, include_timings: bool = True) -> dict:
        d = asdict(self)
        if not include_timings:
            d["metadata"] = {k: v for k, v in d["metadata"].items() if k != "timings"}
        return d

    def to_json(self, include_timings: bool = True) -> str:
        return json.dumps(self.to_dict(include_timings), indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ConvergenceReport":
        d = dict(d)
        d["rungs"] = [RungStats(**r) for r in d["rungs"]]
        return cls(**{f.name: d[f.name] for f in fields(cls) if f.name in d})

    @classmethod
    def from_json(cls, text: str) -> "ConvergenceReport":
        return cls.from_dict(json.loads(text))

    def rungs_csv(self) -> str:
        lines = ["eps,mean_sup_error,std_error"]
        lines += [f"{r.eps:.17g},{r.mean_sup_error:.17g},{r.std_error:.17g}" for r in self.rungs]
        return "\n".join(lines) + "\n"


@dataclass
class AsConvergenceReport:
    experiment: dict
    sequence: list
    trajectories: list
    fraction_decreasing: float
    fraction_below: dict
    min_fraction: float
    pass_flags: dict
    metadata: dict = field(default_factory=dict)

    def to_dict(self, include_timings: bool = True) -> dict:
        d = asdict(self)
        if not include_timings:
            d["metadata"] = {k: v for k, v in d["metadata"].items() if k != "timings"}
        return d

    def to_json(self, include_timings: bool = True) -> str:
        return json.dumps(self.to_dict(include_timings), indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "AsConvergenceReport":
        d = json.loads(text)
        return cls(**{f.name: d[f.name] for f in fields(cls) if f.name in d})


# --------------------------------------------------------------------------
# rate fitting

def fit_rate(errors, ladder):
    """OLS of ``log(error)`` on ``log(eps)``.

    Returns ``(slope, intercept, r_squared)``; the slope is the empirical rate.
    """
    eps = np.asarray(ladder.eps if isinstance(ladder, EpsilonLadder) else ladder, dtype=np.float64)
    err = np.asarray(errors, dtype=np.float64)
    if eps.shape != err.shape:
        raise DegenerateFitError("errors and ladder have different lengths")
    if err.size < 3:
        raise DegenerateFitError(f"need at least 3 rungs, got {err.size}")
    if not np.all(np.isfinite(err)) or np.any(err <= 0) or np.any(eps <= 0):
        raise DegenerateFitError("rate fit needs strictly positive finite errors")
    x = np.log(eps)
    y = np.log(err)
    # offsets from the first point keep constant inputs exactly constant
    dx = x - x[0]
    dy = y - y[0]
    xc = dx - dx.mean()
    yc = dy - dy.mean()
    sxx = float(xc @ xc)
    if sxx == 0:
        raise DegenerateFitError("ladder has a single distinct eps")
    slope = float(xc @ yc) / sxx
    intercept = float(y[0] + dy.mean() - slope * (x[0] + dx.mean()))
    syy = float(yc @ yc)
    resid = yc - slope * xc
    r2 = 1.0 if syy == 0 else 1.0 - float(resid @ resid) / syy
    return slope, intercept, r2


# --------------------------------------------------------------------------
# core Monte Carlo loop

def _target_curves(spec: ExperimentSpec, fine: np.ndarray) -> np.ndarray:
    """Limit curves on the fine grid, subsampled to the estimator grid."""
    r = int(spec.oracle_refine)
    t = spec.target
    if t is Target.ZERO:
        return np.zeros(fine[..., ::r].shape)
    x = fine - spec.level
    if t in _LOCAL_TIME_FACTOR:
        out = _LOCAL_TIME_FACTOR[t] * _oracle.batch_tanaka(x)
    elif t is Target.STOCH_INT:
        out = _oracle.batch_stochastic_integral(x)
    else:
        out = _oracle.batch_realized_variance(fine)
    return out[..., ::r]


def _chunk_worker(spec: ExperimentSpec, streams, with_holder: bool, with_reversal: bool):
    fine = simulate_paths(spec.process, spec.fine_grid, int(spec.master_seed), streams)
    coarse = fine[:, :: int(spec.oracle_refine)]
    target = _target_curves(spec, fine)
    x = coarse if spec.scheme is SchemeId.QV else coarse - spec.level
    k = len(spec.ladder)
    sup = np.empty((len(streams), k))
    argmax_t = np.empty((len(streams), k))
    est_T = np.empty((len(streams), k))
    for j, rung in enumerate(spec.ladder.rungs):
        curves = batch_scheme(x, rung.lag_m, spec.scheme)
        dev = np.abs(curves - target)
        idx = np.argmax(dev, axis=1)  # first attaining index
        sup[:, j] = dev[np.arange(len(streams)), idx]
        argmax_t[:, j] = idx * spec.grid.step
        est_T[:, j] = curves[:, -1]
    out = {"sup": sup, "argmax_t": argmax_t, "est_T": est_T, "target_T": target[:, -1].copy()}
    if with_holder:
        h = spec.fine_grid.step
        out["C_delta"] = np.array([_oracle.path_holder_constant(row, h, spec.holder_delta) for row in fine])
        levels = spec.level + np.arange(-8, 9) / 16.0
        out["K_delta"] = np.array(
            [_oracle.local_time_holder_constant(row, spec.holder_delta, levels) for row in fine]
        )
    if with_reversal:
        out.update(_reversal_chunk(spec, coarse))
    return out


def _reversal_chunk(spec, coarse):
    k = len(spec.ladder)
    n_paths = coarse.shape[0]
    delta_sup = np.empty((n_paths, k))
    ident = np.empty((n_paths, k))
    for p_idx in range(n_paths):
        path = Path.from_values(coarse[p_idx], spec.grid.horizon)
        for j, rung in enumerate(spec.ladder.rungs):
            i2, rev, d2 = reversal_split(path, rung, spec.level)
            delta_sup[p_idx, j] = np.max(np.abs(d2.values))
            scale = 1.0 + np.max(np.abs(i2.values))
            ident[p_idx, j] = np.max(np.abs(i2.values - rev.values - d2.values)) / scale
    return {"delta2_sup": delta_sup, "identity_residual": ident}


def _run_paths(spec: ExperimentSpec, with_reversal: bool = False) -> dict:
    n = int(spec.num_paths)
    starts = list(range(0, n, spec.chunk_size))
    holder_rows = min(int(spec.holder_paths), n)
    jobs = []
    for s in starts:
        streams = list(range(s, min(s + spec.chunk_size, n)))
        jobs.append((streams, s < holder_rows))
    if spec.n_jobs == 1:
        parts = [_chunk_worker(spec, st, hh, with_reversal) for st, hh in jobs]
    else:
        parts = Parallel(n_jobs=spec.n_jobs)(
            delayed(_chunk_worker)(spec, st, hh, with_reversal) for st, hh in jobs
        )
    merged = {}
    for key in parts[0]:
        if key in ("C_delta", "K_delta"):
            merged[key] = np.concatenate([p[key] for p in parts if key in p])[:holder_rows]
        else:
            merged[key] = np.concatenate([p[key] for p in parts])
    return merged


def _l2(a, axis=0):
    return np.sqrt(np.mean(np.square(a), axis=axis))


def _rung_stats(spec, raw) -> list:
    sup = raw["sup"]
    n = sup.shape[0]
    out = []
    for j, rung in enumerate(spec.ladder.rungs):
        s = sup[:, j]
        ms = float(np.mean(s * s))
        rms = math.sqrt(ms)
        if n > 1 and rms > 0:
            se = float(np.std(s * s, ddof=1) / math.sqrt(n) / (2 * rms))
        else:
            se = 0.0
        out.append(RungStats(
            eps=float(rung.eps),
            lag=int(rung.lag_m),
            mean_sup_error=rms,
            std_error=se,
            max_sup_error=float(np.max(s)),
            mean_argmax_time=float(np.mean(raw["argmax_t"][:, j])),
            mean_estimate_T=float(np.mean(raw["est_T"][:, j])),
            mean_target_T=float(np.mean(raw["target_T"])),
            mean_abs_terminal_error=float(np.mean(np.abs(raw["est_T"][:, j] - raw["target_T"]))),
            per_path_sup_errors=[float(v) for v in s] if spec.keep_per_path else None,
        ))
    return out


def _holder_summary(spec, raw, errors) -> dict:
    delta = spec.holder_delta
    rate_const = [e / eps ** (delta / 2) for e, eps in zip(errors, spec.ladder.eps)]
    out = {
        "delta": delta,
        "rate_constant": float(max(rate_const)),
        "num_paths": int(raw["C_delta"].shape[0]) if "C_delta" in raw else 0,
    }
    if "C_delta" in raw and raw["C_delta"].size:
        out["path_holder_C_mean"] = float(np.mean(raw["C_delta"]))
        out["path_holder_C_rms"] = float(_l2(raw["C_delta"]))
        out["local_time_holder_K_mean"] = float(np.mean(raw["K_delta"]))
        out["local_time_holder_K_rms"] = float(_l2(raw["K_delta"]))
    return out


def _fit(errors, ladder):
    if len(errors) < 3:
        return 0.0, None, None, "too_few_rungs"
    try:
        slope, intercept, r2 = fit_rate(errors, ladder)
    except DegenerateFitError:
        return 0.0, None, None, "degenerate"
    return slope, intercept, r2, "ok"


def _pass_flags(spec, errors, slope, status) -> dict:
    diffs = np.diff(errors)
    flags = {
        "non_increasing": bool(np.all(diffs <= 0)),
        "strictly_decreasing": bool(np.all(diffs < 0)) if status != "degenerate" else bool(np.all(diffs <= 0)),
    }
    if spec.rate_window is not None and status == "ok":
        lo, hi = spec.rate_window
        flags["rate_in_window"] = bool(lo <= slope <= hi)
    if spec.terminal_max is not None:
        flags["terminal_below"] = bool(errors[-1] < spec.terminal_max)
    return flags


_METRIC_NOTE = (
    "error = sqrt(mean over paths of sup_t |estimate - target|^2); "
    "stricter than convergence in probability"
)


def run_experiment(spec: ExperimentSpec) -> ConvergenceReport:
    """Run ``spec`` and return per-rung errors, fitted rate and pass flags."""
    t0 = time.perf_counter()
    raw = _run_paths(spec)
    report = _build_report(spec, raw)
    report.metadata["timings"] = {"total_seconds": time.perf_counter() - t0}
    return report


def _build_report(spec, raw) -> ConvergenceReport:
    rungs = _rung_stats(spec, raw)
    errors = [r.mean_sup_error for r in rungs]
    slope, intercept, r2, status = _fit(errors, spec.ladder)
    meta = {
        "seeds": {"master_seed": int(spec.master_seed), "streams": [0, int(spec.num_paths) - 1]},
        "rng": "Philox via SeedSequence(master_seed, spawn_key=(path_index,))",
        "metric": _METRIC_NOTE,
        "grid": {"horizon": spec.grid.horizon, "num_steps": spec.grid.num_steps,
                 "oracle_num_steps": spec.fine_grid.num_steps},
    }
    if spec.process.kind == "DIFFUSION":
        meta["regularity_asserted_by_user"] = bool(spec.process.diffusion.reversible)
    return ConvergenceReport(
        experiment=spec.describe(),
        rungs=rungs,
        fitted_rate=float(slope),
        fitted_intercept=intercept,
        r_squared=r2,
        fit_status=status,
        holder=_holder_summary(spec, raw, errors),
        pass_flags=_pass_flags(spec, errors, slope, status),
        metadata=meta,
    )


def run_as_convergence(spec: ExperimentSpec, min_fraction: float = 0.95,
                       thresholds=(0.05, 0.1, 0.2, 0.5)) -> AsConvergenceReport:
    """Per-path sup errors along a summable sequence of widths.

    The ladder must be geometric-like with consecutive ratio at most 1/4, which
    makes ``sum sqrt(eps_n)`` converge.
    """
    if len(spec.ladder) < 2:
        raise ConfigurationError("almost-sure experiment needs at least two widths")
    if spec.ladder.max_ratio() > 0.25:
        raise ConfigurationError(
            f"sequence not summable in sqrt: consecutive ratio {spec.ladder.max_ratio():.3g} > 1/4"
        )
    t0 = time.perf_counter()
    raw = _run_paths(spec)
    sup = raw["sup"]
    zero = np.all(sup == 0, axis=1)
    decreasing = (sup[:, -1] < sup[:, 0]) | zero
    frac = float(np.mean(decreasing))
    below = {f"{thr:g}": [float(np.mean(sup[:, j] < thr)) for j in range(sup.shape[1])]
             for thr in thresholds}
    return AsConvergenceReport(
        experiment=spec.describe(),
        sequence=spec.ladder.eps,
        trajectories=[[float(v) for v in row] for row in sup],
        fraction_decreasing=frac,
        fraction_below=below,
        min_fraction=float(min_fraction),
        pass_flags={"fraction_decreasing": bool(frac >= min_fraction)},
        metadata={
            "seeds": {"master_seed": int(spec.master_seed), "streams": [0, int(spec.num_paths) - 1]},
            "sqrt_sum_bound": float(sum(math.sqrt(e) for e in spec.ladder.eps)),
            "timings": {"total_seconds": time.perf_counter() - t0},
        },
    )


def run_reversal_experiment(spec: ExperimentSpec, boundary_exponent: float = 0.4,
                            identity_tol: float = 1e-10) -> ConvergenceReport:
    """J against the Tanaka oracle on a diffusion, plus the time-reversal split of I2.

    ``extras['reversal']`` holds, per rung, the RMS sup-norm of the boundary
    term ``Delta2`` and the worst relative residual of
    ``I2 = reversed functional + Delta2``. ``boundary_constant`` is the smallest
    ``C`` with ``Delta2 <= C * eps**boundary_exponent`` on every rung; the pass
    flag ``boundary_decay`` requires the boundary term to shrink rung over rung.
    """
    if spec.process.kind == "DIFFUSION" and not spec.process.diffusion.reversible:
        raise ConfigurationError("reversal experiment needs a diffusion asserted reversible")
    if spec.scheme is not SchemeId.J:
        raise ConfigurationError("reversal experiment runs scheme J")
    t0 = time.perf_counter()
    raw = _run_paths(spec, with_reversal=True)
    report = _build_report(spec, raw)
    d2 = [float(v) for v in _l2(raw["delta2_sup"], axis=0)]
    eps = spec.ladder.eps
    c_hat = max(d / e**boundary_exponent for d, e in zip(d2, eps))
    worst = float(np.max(raw["identity_residual"]))
    fitted = _fit(d2, spec.ladder)
    report.extras["reversal"] = {
        "delta2_rms_sup": d2,
        "boundary_exponent": boundary_exponent,
        "boundary_constant": c_hat,
        "delta2_fitted_rate": fitted[0],
        "identity_max_residual": worst,
    }
    report.pass_flags["identity_exact"] = bool(worst <= identity_tol)
    report.pass_flags["boundary_decay"] = bool(np.all(np.diff(d2) < 0))
    report.metadata["timings"] = {"total_seconds": time.perf_counter() - t0}
    return report
