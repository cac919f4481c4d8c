"""Sample paths of Brownian motion and one-dimensional diffusions.

Every path lives on a uniform grid ``t_i = i * T / n`` for ``i = 0..n``.
Randomness comes from per-path substreams of a counter-based generator
(Philox) keyed by ``(master_seed, stream_index)``, so any single path can be
regenerated without touching the others and batches are reproducible no
matter how they are split across workers.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import Callable, Iterable, Optional

import numpy as np

from .exceptions import ConfigurationError, SimulationBlowupError

__all__ = [
    "GridSpec",
    "Path",
    "DiffusionSpec",
    "SeedSpec",
    "gen_brownian",
    "gen_diffusion",
    "brownian_batch",
    "diffusion_batch",
    "reverse_path",
    "shift_level",
    "negate_path",
    "subsample",
    "dump_path_csv",
    "load_path_csv",
    "BROWNIAN",
]

_U64 = 2**64


@dataclass(frozen=True)
class GridSpec:
    """Uniform time grid on ``[0, horizon]`` with ``num_steps`` intervals.

    Only ``horizon`` and ``num_steps`` are stored; the step is derived.
    """

    horizon: float
    num_steps: int
    origin_value: float = 0.0

    def __post_init__(self):
        if isinstance(self.num_steps, bool) or int(self.num_steps) != self.num_steps:
            raise ConfigurationError(f"num_steps must be an integer, got {self.num_steps!r}")
        object.__setattr__(self, "num_steps", int(self.num_steps))
        object.__setattr__(self, "horizon", float(self.horizon))
        object.__setattr__(self, "origin_value", float(self.origin_value))
        if self.num_steps < 1:
            raise ConfigurationError(f"num_steps must be >= 1, got {self.num_steps}")
        if not (math.isfinite(self.horizon) and self.horizon > 0):
            raise ConfigurationError(f"horizon must be finite and > 0, got {self.horizon}")
        if not math.isfinite(self.origin_value):
            raise ConfigurationError("origin_value must be finite")

    @property
    def step(self) -> float:
        return self.horizon / self.num_steps

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.num_steps + 1)

    def with_origin(self, origin_value: float) -> "GridSpec":
        return GridSpec(self.horizon, self.num_steps, origin_value)

    def same_lattice(self, other: "GridSpec") -> bool:
        """True when both grids share horizon and step count (origin ignored)."""
        return self.horizon == other.horizon and self.num_steps == other.num_steps


@dataclass(frozen=True, eq=False)
class Path:
    """A sample path: ``values[i]`` is the process at ``i * grid.step``."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 1 or values.shape[0] != self.grid.num_steps + 1:
            raise ConfigurationError(
                f"expected {self.grid.num_steps + 1} values, got shape {values.shape}"
            )
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise SimulationBlowupError(bad[0])
        if values[0] != self.grid.origin_value:
            raise ConfigurationError(
                f"values[0]={values[0]!r} differs from origin_value={self.grid.origin_value!r}"
            )
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values, horizon: float = 1.0) -> "Path":
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 1 or values.shape[0] < 2:
            raise ConfigurationError("a path needs at least two grid values")
        return cls(GridSpec(horizon, values.shape[0] - 1, float(values[0])), values)

    @property
    def num_steps(self) -> int:
        return self.grid.num_steps

    def times(self) -> np.ndarray:
        return self.grid.times()

    def __len__(self):
        return self.values.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Path):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)

    __hash__ = None


@dataclass(frozen=True)
class DiffusionSpec:
    """Coefficients of ``dX = b(s, X) ds + sigma(s, X) dB``.

    ``drift`` and ``sigma`` are called with a scalar time and an array of
    states and must broadcast against that array. The regularity conditions
    that make the time-reversed process a diffusion are asserted by the user
    through ``reversible`` and are not checked.
    """

    drift: Callable
    sigma: Callable
    reversed_drift: Optional[Callable] = None
    reversible: bool = True
    name: str = "diffusion"


def _zero(s, x):
    return 0.0


def _one(s, x):
    return 1.0


BROWNIAN = DiffusionSpec(drift=_zero, sigma=_one, reversed_drift=None, name="brownian")


@dataclass(frozen=True)
class SeedSpec:
    """Identifies one RNG substream: ``(master_seed, stream_index)``."""

    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_index"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise ConfigurationError(f"{name} must be an integer, got {v!r}")
        if not 0 <= self.master_seed < _U64:
            raise ConfigurationError("master_seed must fit in an unsigned 64-bit integer")
        if self.stream_index < 0:
            raise ConfigurationError("stream_index must be non-negative")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(int(self.master_seed), spawn_key=(int(self.stream_index),))
        return np.random.Generator(np.random.Philox(seq))


def _brownian_increments(grid: GridSpec, seed: SeedSpec) -> np.ndarray:
    return seed.generator().standard_normal(grid.num_steps) * math.sqrt(grid.step)


def _increment_batch(grid, master_seed, stream_indices):
    streams = list(stream_indices)
    out = np.empty((len(streams), grid.num_steps))
    for row, k in enumerate(streams):
        out[row] = _brownian_increments(grid, SeedSpec(master_seed, k))
    return out


def _cumulate(origin, increments):
    # sequential left-to-right accumulation, identical to the Euler recursion
    values = np.empty(increments.shape[:-1] + (increments.shape[-1] + 1,))
    values[..., 0] = origin
    values[..., 1:] = increments
    return np.cumsum(values, axis=-1)


def gen_brownian(grid: GridSpec, seed: SeedSpec) -> Path:
    """Brownian path started at ``grid.origin_value`` with N(0, h) increments."""
    if not isinstance(grid, GridSpec):
        raise ConfigurationError("grid must be a GridSpec")
    return Path(grid, _cumulate(grid.origin_value, _brownian_increments(grid, seed)))


def brownian_batch(grid: GridSpec, master_seed: int, stream_indices: Iterable[int]) -> np.ndarray:
    """Array of shape ``(len(stream_indices), n + 1)``; row k equals ``gen_brownian``."""
    return _cumulate(grid.origin_value, _increment_batch(grid, master_seed, stream_indices))


def _euler_maruyama(origin, increments, h, drift, sigma):
    n = increments.shape[-1]
    values = np.empty(increments.shape[:-1] + (n + 1,))
    values[..., 0] = origin
    x = values[..., 0].copy()
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(n):
            s = i * h
            x = x + drift(s, x) * h + sigma(s, x) * increments[..., i]
            values[..., i + 1] = x
    return values


def gen_diffusion(grid: GridSpec, spec: DiffusionSpec, seed: SeedSpec) -> Path:
    """Euler-Maruyama path of ``spec`` driven by the Brownian increments of ``seed``.

    With ``drift = 0`` and ``sigma = 1`` the result is bitwise equal to
    :func:`gen_brownian` for the same seed.

    Raises
    ------
    SimulationBlowupError
        If any grid value is non-finite; ``step`` is the first bad index.
    """
    incr = _brownian_increments(grid, seed)
    values = _euler_maruyama(grid.origin_value, incr, grid.step, spec.drift, spec.sigma)
    finite = np.isfinite(values)
    if not finite.all():
        raise SimulationBlowupError(np.flatnonzero(~finite)[0], seed.stream_index)
    return Path(grid, values)


def diffusion_batch(grid: GridSpec, spec: DiffusionSpec, master_seed: int,
                    stream_indices: Iterable[int]) -> np.ndarray:
    streams = list(stream_indices)
    incr = _increment_batch(grid, master_seed, streams)
    values = _euler_maruyama(grid.origin_value, incr, grid.step, spec.drift, spec.sigma)
    finite = np.isfinite(values)
    if not finite.all():
        rows, cols = np.nonzero(~finite)
        first = np.argmin(cols)
        raise SimulationBlowupError(cols[first], streams[rows[first]])
    return values


def reverse_path(p: Path) -> Path:
    """Time reversal ``u -> X_{T-u}`` on the same lattice.

    The origin of the returned grid is the terminal value of ``p``.
    """
    values = p.values[::-1]
    return Path(p.grid.with_origin(values[0]), values)


def shift_level(p: Path, x: float) -> Path:
    """The path ``X - x``; level-``x`` problems become level-0 problems."""
    x = float(x)
    if not math.isfinite(x):
        raise ConfigurationError("level shift must be finite")
    values = p.values - x
    return Path(p.grid.with_origin(values[0]), values)


def negate_path(p: Path) -> Path:
    values = -p.values
    return Path(p.grid.with_origin(values[0]), values)


def subsample(p: Path, factor: int) -> Path:
    """Every ``factor``-th grid value; the horizon is unchanged."""
    factor = int(factor)
    if factor < 1 or p.num_steps % factor:
        raise ConfigurationError(f"cannot subsample {p.num_steps} steps by {factor}")
    grid = GridSpec(p.grid.horizon, p.num_steps // factor, p.grid.origin_value)
    return Path(grid, p.values[::factor])


def dump_path_csv(p: Path, target=None) -> str:
    """Write ``t,x`` rows with 17 significant digits; returns the text."""
    buf = io.StringIO()
    buf.write("t,x\n")
    for t, x in zip(p.times(), p.values):
        buf.write(f"{t:.17g},{x:.17g}\n")
    text = buf.getvalue()
    if target is not None:
        FsPath(target).write_text(text)
    return text


def load_path_csv(source) -> Path:
    """Inverse of :func:`dump_path_csv`. ``source`` is a filesystem path or text."""
    if isinstance(source, (str, FsPath)) and "\n" not in str(source):
        text = FsPath(source).read_text()
    else:
        text = str(source)
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["t", "x"]:
        raise ConfigurationError("path CSV must start with header 't,x'")
    try:
        data = np.array([[float(a), float(b)] for a, b in rows[1:] if a.strip()])
    except ValueError as exc:
        raise ConfigurationError(f"malformed path CSV: {exc}") from exc
    if data.shape[0] < 2:
        raise ConfigurationError("path CSV needs at least two rows")
    grid = GridSpec(data[-1, 0], data.shape[0] - 1, data[0, 1])
    if not np.allclose(data[:, 0], grid.times(), rtol=1e-12, atol=0.0):
        raise ConfigurationError("path CSV times are not a uniform grid starting at 0")
    return Path(grid, data[:, 1])
