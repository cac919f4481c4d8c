"""Regularization functionals evaluated on a uniform grid.

All integrals are left-endpoint Riemann sums: for a lag of ``m`` grid steps
(``eps = m * h``) the value of a scheme at ``t_j`` is

    (1 / m) * sum_{i < j} G(X_i, X_read(i, j))

where the forward read is either *clamped* at the end of the grid,
``X_{min(i + m, n)}`` (J, I1, I2, QV, COV, weak pairing), or *truncated* at
the current time, ``X_{min(i + m, j)}`` (I3, I4 and their sub-splits). The
truncated form is evaluated in O(n) by splitting the sum into the terms with
``i + m <= j`` (a plain prefix sum) and the window ``j - m < i < j`` where the
read is ``X_j``; each integrand factorizes as ``f(X_i) * g(X_read)``, so the
window contribution is ``g(X_j)`` times a difference of prefix sums of ``f``.

Kernels whose name starts with ``batch_`` take arrays of shape ``(..., n + 1)``
already shifted to level 0 and return curves of the same shape.
"""
from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import Callable

import numpy as np

from .exceptions import AlignmentError, ConfigurationError
from .paths import GridSpec, Path, reverse_path

__all__ = [
    "SchemeId",
    "SCHEME_CATALOG",
    "Epsilon",
    "Curve",
    "j_eps",
    "i1_eps",
    "i2_eps",
    "i3_eps",
    "i4_eps",
    "i_sub",
    "r_terms",
    "j_truncated",
    "quadratic_variation_eps",
    "covariation_eps",
    "weak_pairing",
    "reversal_split",
    "scheme_curve",
    "batch_scheme",
    "hat_function",
    "catalog_table",
]


class SchemeId(str, enum.Enum):
    J = "J"
    I1 = "I1"
    I2 = "I2"
    I3 = "I3"
    I4 = "I4"
    I31 = "I31"
    I32 = "I32"
    I41 = "I41"
    I42 = "I42"
    R_EPS = "R_EPS"
    R3 = "R3"
    R4 = "R4"
    QV = "QV"
    COV = "COV"
    WEAK_PAIR = "WEAK_PAIR"

    @classmethod
    def parse(cls, tag) -> "SchemeId":
        if isinstance(tag, cls):
            return tag
        try:
            return cls(str(tag).upper())
        except ValueError:
            raise ConfigurationError(f"unknown scheme {tag!r}") from None


# tag -> integrand, with X(s+) the forward read and y the level
SCHEME_CATALOG = {
    SchemeId.J: "(1/eps) int_0^t (1{y<X(s+eps)} - 1{y<X(s)}) (X(s+eps) - X(s)) ds",
    SchemeId.I1: "(1/eps) int_0^t (X(s+eps) - X(s)) 1{0<X(s)} ds",
    SchemeId.I2: "(1/eps) int_0^t (X(s+eps) - X(s)) 1{0<X(s+eps)} ds",
    SchemeId.I3: "(1/eps) int_0^t [X((u+eps)^t)^+ 1{X(u)<=0} + X((u+eps)^t)^- 1{X(u)>0}] du",
    SchemeId.I4: "(1/eps) int_0^t [X(u)^- 1{X((u+eps)^t)>0} + X(u)^+ 1{X((u+eps)^t)<=0}] du",
    SchemeId.I31: "(1/eps) int_0^t X((u+eps)^t)^- 1{X(u)>0} du",
    SchemeId.I32: "(1/eps) int_0^t X((u+eps)^t)^+ 1{X(u)<0} du",
    SchemeId.I41: "(1/eps) int_0^t X(u)^- 1{X((u+eps)^t)>0} du",
    SchemeId.I42: "(1/eps) int_0^t X(u)^+ 1{X((u+eps)^t)<0} du",
    SchemeId.R_EPS: "J_eps(t) - (1/eps) int_0^t (1{0<X((u+eps)^t)} - 1{0<X(u)}) (X((u+eps)^t) - X(u)) du",
    SchemeId.R3: "(1/eps) int_0^t X((u+eps)^t)^+ 1{X(u)=0} du",
    SchemeId.R4: "(1/eps) int_0^t X(u)^+ 1{X((u+eps)^t)=0} du",
    SchemeId.QV: "(1/eps) int_0^t (X(s+eps) - X(s))^2 ds",
    SchemeId.COV: "(1/eps) int_0^t (Y(s+eps) - Y(s)) (Z(s+eps) - Z(s)) ds",
    SchemeId.WEAK_PAIR: "(1/eps) int_0^t (F(X(s+eps)) - F(X(s))) (X(s+eps) - X(s)) ds  vs  int_0^t f(X(s)) d[X]_s",
}


def catalog_table() -> str:
    """Markdown table of every scheme and its defining integral."""
    lines = ["| scheme | definition |", "|---|---|"]
    lines += [f"| {k.value} | `{v}` |" for k, v in SCHEME_CATALOG.items()]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Epsilon:
    """Regularization width ``eps = lag_m * h`` tied to a grid step."""

    eps: float
    lag_m: int

    def __post_init__(self):
        if isinstance(self.lag_m, bool) or int(self.lag_m) != self.lag_m or self.lag_m < 1:
            raise AlignmentError(f"lag_m must be a positive integer, got {self.lag_m!r}")
        object.__setattr__(self, "lag_m", int(self.lag_m))
        if not (math.isfinite(self.eps) and self.eps > 0):
            raise AlignmentError(f"eps must be finite and > 0, got {self.eps!r}")

    @classmethod
    def aligned(cls, eps: float, grid: GridSpec, rtol: float = 1e-9) -> "Epsilon":
        """Snap ``eps`` to ``m * h``; raises :class:`AlignmentError` if it is off-grid."""
        eps = float(eps)
        if not (math.isfinite(eps) and eps > 0):
            raise AlignmentError(f"eps must be finite and > 0, got {eps!r}")
        m = round(eps / grid.step)
        if m < 1 or abs(m * grid.step - eps) > rtol * eps:
            raise AlignmentError(f"eps={eps!r} is not a multiple of the grid step {grid.step!r}")
        if m > grid.num_steps:
            raise AlignmentError(f"eps={eps!r} exceeds the horizon {grid.horizon!r}")
        return cls(m * grid.step, m)

    @classmethod
    def from_lag(cls, lag_m: int, grid: GridSpec) -> "Epsilon":
        return cls(int(lag_m) * grid.step, int(lag_m))

    def check(self, grid: GridSpec) -> int:
        """Return the lag after verifying alignment with ``grid``."""
        if self.lag_m > grid.num_steps:
            raise AlignmentError(f"eps={self.eps!r} exceeds the horizon {grid.horizon!r}")
        if abs(self.lag_m * grid.step - self.eps) > 1e-12 * self.eps:
            raise AlignmentError(
                f"eps={self.eps!r} != {self.lag_m} * h with h={grid.step!r}"
            )
        return self.lag_m


@dataclass(frozen=True, eq=False)
class Curve:
    """Time-indexed estimate on the grid of the path it came from."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)
    label: str = ""

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.shape != (self.grid.num_steps + 1,):
            raise ConfigurationError(f"curve shape {values.shape} does not match grid")
        if not np.isfinite(values).all():
            raise ConfigurationError(f"curve {self.label!r} has non-finite values")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def times(self) -> np.ndarray:
        return self.grid.times()

    @property
    def terminal(self) -> float:
        return float(self.values[-1])

    def at(self, t: float) -> float:
        j = round(t / self.grid.step)
        if not 0 <= j <= self.grid.num_steps or abs(j * self.grid.step - t) > 1e-9 * max(t, 1.0):
            raise AlignmentError(f"t={t!r} is not a grid time")
        return float(self.values[j])

    def sup_distance(self, other) -> float:
        other = other.values if isinstance(other, Curve) else np.asarray(other)
        return float(np.max(np.abs(self.values - other)))

    def to_csv(self, target=None) -> str:
        buf = io.StringIO()
        buf.write("t,value\n")
        for t, v in zip(self.times(), self.values):
            buf.write(f"{t:.17g},{v:.17g}\n")
        text = buf.getvalue()
        if target is not None:
            FsPath(target).write_text(text)
        return text

    def __eq__(self, other):
        if not isinstance(other, Curve):
            return NotImplemented
        return self.grid.same_lattice(other.grid) and np.array_equal(self.values, other.values)

    __hash__ = None


# --------------------------------------------------------------------------
# array kernels

def _pos(x):
    return np.maximum(x, 0.0)


def _neg(x):
    return np.maximum(-x, 0.0)


def _left_sum(g):
    """Curve ``c`` with ``c[0] = 0`` and ``c[j] = sum_{i<j} g[i]`` (g has n entries)."""
    out = np.zeros(g.shape[:-1] + (g.shape[-1] + 1,))
    np.cumsum(g, axis=-1, out=out[..., 1:])
    return out


def _prefix(f):
    """``P[k] = sum_{i<k} f[i]``; integer input keeps exact integer counts."""
    dtype = np.int64 if f.dtype == bool else np.float64
    out = np.zeros(f.shape[:-1] + (f.shape[-1] + 1,), dtype=dtype)
    np.cumsum(f, axis=-1, out=out[..., 1:])
    return out


def _clamped_read(x, m):
    n = x.shape[-1] - 1
    idx = np.minimum(np.arange(n) + m, n)
    return x[..., idx]


def _window_bounds(n, m):
    j = np.arange(n + 1)
    return np.maximum(j - m + 1, 0), j


def _truncated(x, m, terms):
    """Sum over ``i < j`` of ``sum_k f_k(X_i) g_k(X_{min(i+m, j)})``, divided by m.

    ``terms`` is a list of ``(f, g)`` callables; ``f`` may return booleans.
    """
    n = x.shape[-1] - 1
    lo, hi = _window_bounds(n, m)
    full = np.zeros(x.shape)
    window = np.zeros(x.shape)
    head = x[..., : n - m + 1]
    tail = x[..., m:]
    for f, g in terms:
        fv = f(x[..., :n])
        # full reads: i + m <= j, i.e. i in [0, j - m]
        full_terms = f(head) * g(tail)
        c = _prefix(full_terms)
        full[..., m:] += c[..., 1:]
        # window: i in [max(0, j-m+1), j-1], read X_j
        p = _prefix(fv)
        counts = p[..., hi] - p[..., lo]
        window += g(x) * counts
    return (full + window) / m


def _is_pos(x):
    return x > 0


def _is_nonpos(x):
    return x <= 0


def _is_neg(x):
    return x < 0


def _is_zero(x):
    return x == 0


def _one(x):
    return np.ones(x.shape, dtype=bool)


def _ident(x):
    return x


_TRUNCATED_TERMS = {
    SchemeId.I3: [(_is_nonpos, _pos), (_is_pos, _neg)],
    SchemeId.I4: [(_neg, _is_pos), (_pos, _is_nonpos)],
    SchemeId.I31: [(_is_pos, _neg)],
    SchemeId.I32: [(_is_neg, _pos)],
    SchemeId.I41: [(_neg, _is_pos)],
    SchemeId.I42: [(_pos, _is_neg)],
    SchemeId.R3: [(_is_zero, _pos)],
    SchemeId.R4: [(_pos, _is_zero)],
}

# (1{b>0} - 1{a>0})(b - a) = 1{b>0} b - a 1{b>0} - 1{a>0} b + 1{a>0} a
_J_TRUNC_TERMS = [
    (_one, lambda b: np.where(b > 0, b, 0.0)),
    (lambda a: -a, _is_pos),
    (lambda a: -1.0 * (a > 0), _ident),
    (lambda a: np.where(a > 0, a, 0.0), lambda b: np.ones(b.shape)),
]


def _j_integrand(x, y):
    return ((y > 0).astype(np.float64) - (x > 0)) * (y - x)


def batch_j(x, m):
    n = x.shape[-1] - 1
    return _left_sum(_j_integrand(x[..., :n], _clamped_read(x, m))) / m


def batch_i1(x, m):
    n = x.shape[-1] - 1
    a = x[..., :n]
    return _left_sum((_clamped_read(x, m) - a) * (a > 0)) / m


def batch_i2(x, m):
    n = x.shape[-1] - 1
    y = _clamped_read(x, m)
    return _left_sum((y - x[..., :n]) * (y > 0)) / m


def batch_j_truncated(x, m):
    return _truncated(x, m, _J_TRUNC_TERMS)


def batch_r_eps(x, m):
    """Boundary remainder J - J_truncated from its own window formula."""
    n = x.shape[-1] - 1
    lo, hi = _window_bounds(n, m)
    clamped = _prefix(_j_integrand(x[..., :n], _clamped_read(x, m)))
    first = clamped[..., hi] - clamped[..., lo]
    second = np.zeros(x.shape)
    for f, g in _J_TRUNC_TERMS:
        p = _prefix(f(x[..., :n]))
        second += g(x) * (p[..., hi] - p[..., lo])
    return (first - second) / m


def batch_qv(x, m):
    n = x.shape[-1] - 1
    d = _clamped_read(x, m) - x[..., :n]
    return _left_sum(d * d) / m


def batch_cov(x, z, m):
    n = x.shape[-1] - 1
    dx = _clamped_read(x, m) - x[..., :n]
    dz = _clamped_read(z, m) - z[..., :n]
    return _left_sum(dx * dz) / m


def batch_scheme(x, m, scheme) -> np.ndarray:
    """Dispatch a single-path scheme on level-0 arrays of shape ``(..., n + 1)``."""
    scheme = SchemeId.parse(scheme)
    x = np.asarray(x, dtype=np.float64)
    if scheme is SchemeId.J:
        return batch_j(x, m)
    if scheme is SchemeId.I1:
        return batch_i1(x, m)
    if scheme is SchemeId.I2:
        return batch_i2(x, m)
    if scheme is SchemeId.R_EPS:
        return batch_r_eps(x, m)
    if scheme is SchemeId.QV:
        return batch_qv(x, m)
    if scheme in _TRUNCATED_TERMS:
        return _truncated(x, m, _TRUNCATED_TERMS[scheme])
    raise ConfigurationError(f"scheme {scheme.value} needs more than one path argument")


# --------------------------------------------------------------------------
# Path-level API

def _lag(p: Path, eps) -> int:
    if not isinstance(p, Path):
        raise ConfigurationError("expected a Path")
    if isinstance(eps, Epsilon):
        return eps.check(p.grid)
    return Epsilon.aligned(eps, p.grid).lag_m


def _at_level(p: Path, level: float) -> np.ndarray:
    level = float(level)
    if not math.isfinite(level):
        raise ConfigurationError("level must be finite")
    return p.values - level


def scheme_curve(p: Path, scheme, eps, level: float = 0.0) -> Curve:
    """Evaluate any single-path scheme by tag."""
    scheme = SchemeId.parse(scheme)
    m = _lag(p, eps)
    x = _at_level(p, level) if scheme is not SchemeId.QV else p.values
    return Curve(p.grid, batch_scheme(x, m, scheme), scheme.value)


def j_eps(p: Path, level: float, eps) -> Curve:
    """J_eps(t, level), forward read clamped at the grid end."""
    return scheme_curve(p, SchemeId.J, eps, level)


def i1_eps(p: Path, level: float, eps) -> Curve:
    return scheme_curve(p, SchemeId.I1, eps, level)


def i2_eps(p: Path, level: float, eps) -> Curve:
    return scheme_curve(p, SchemeId.I2, eps, level)


def i3_eps(p: Path, level: float, eps) -> Curve:
    """First adapted half of J; ``{X_u <= level}`` is non-strict."""
    return scheme_curve(p, SchemeId.I3, eps, level)


def i4_eps(p: Path, level: float, eps) -> Curve:
    """Second adapted half of J; ``{X_read <= level}`` is non-strict."""
    return scheme_curve(p, SchemeId.I4, eps, level)


_SUBS = (SchemeId.I31, SchemeId.I32, SchemeId.I41, SchemeId.I42)
_REMAINDERS = (SchemeId.R_EPS, SchemeId.R3, SchemeId.R4)


def i_sub(p: Path, level: float, eps, which) -> Curve:
    """Quarter-local-time sub-schemes; I32 and I42 use strict ``< level``."""
    which = SchemeId.parse(which)
    if which not in _SUBS:
        raise ConfigurationError(f"i_sub expects one of I31, I32, I41, I42, got {which.value}")
    return scheme_curve(p, which, eps, level)


def r_terms(p: Path, level: float, eps, which) -> Curve:
    """Remainder diagnostics R_EPS (clamp vs truncation), R3, R4 (level hits)."""
    which = SchemeId.parse(which)
    if which not in _REMAINDERS:
        raise ConfigurationError(f"r_terms expects one of R_EPS, R3, R4, got {which.value}")
    return scheme_curve(p, which, eps, level)


def j_truncated(p: Path, level: float, eps) -> Curve:
    """J with the forward read truncated at t; equals I3 + I4 on the grid."""
    m = _lag(p, eps)
    return Curve(p.grid, batch_j_truncated(_at_level(p, level), m), "J_TRUNC")


def quadratic_variation_eps(p: Path, eps) -> Curve:
    return scheme_curve(p, SchemeId.QV, eps)


def covariation_eps(p: Path, q: Path, eps) -> Curve:
    """Regularized covariation; symmetric and bilinear in ``(p, q)``."""
    if not p.grid.same_lattice(q.grid):
        raise ConfigurationError("covariation needs paths on the same grid")
    m = _lag(p, eps)
    # dx * dz commutes bitwise and equals d * d for q == p
    return Curve(p.grid, batch_cov(p.values, q.values, m), SchemeId.COV.value)


def hat_function(plateau: float = 1.0, ramp: float = 0.25):
    """Continuous trapezoid ``f`` (1 on ``[-plateau, plateau]``, 0 beyond ``plateau + ramp``)
    and its antiderivative ``F`` with ``F(0) = 0``."""

    def f(x):
        a = np.abs(np.asarray(x, dtype=np.float64))
        return np.clip((plateau + ramp - a) / ramp, 0.0, 1.0)

    def F(x):
        x = np.asarray(x, dtype=np.float64)
        a = np.abs(x)
        inner = np.minimum(a, plateau)
        r = np.clip(a - plateau, 0.0, ramp)
        return np.sign(x) * (inner + r - r * r / (2.0 * ramp))

    return f, F


def _check_antiderivative(f, F, x, tol=1e-3):
    probe = np.unique(np.quantile(x, np.linspace(0.0, 1.0, 9)))
    d = 1e-6
    fd = (np.asarray(F(probe + d)) - np.asarray(F(probe - d))) / (2 * d)
    fv = np.broadcast_to(np.asarray(f(probe), dtype=np.float64), probe.shape)
    scale = 1.0 + np.max(np.abs(fv))
    if np.max(np.abs(fd - fv)) > tol * scale:
        raise ConfigurationError("supplied F is not an antiderivative of f at the path values")


def weak_pairing(p: Path, f: Callable, F: Callable, eps, check: bool = True):
    """Both sides of the pairing of ``f`` against the measures ``J_eps(t, y) dy``.

    Returns
    -------
    lhs : Curve
        ``(1/eps) int (F(X_{s+eps}) - F(X_s)) (X_{s+eps} - X_s) ds``.
    rhs : Curve
        ``sum_{t_i < t} f(X_{t_i}) (X_{t_{i+1}} - X_{t_i})^2``.
    """
    m = _lag(p, eps)
    x = p.values
    if check:
        _check_antiderivative(f, F, x)
    n = p.num_steps
    y = _clamped_read(x, m)
    a = x[:n]
    Fx = np.asarray(F(x), dtype=np.float64)
    dF = Fx[np.minimum(np.arange(n) + m, n)] - Fx[:n]
    lhs = _left_sum(dF * (y - a)) / m
    dx = np.diff(x)
    fv = np.broadcast_to(np.asarray(f(a), dtype=np.float64), a.shape)
    rhs = _left_sum(fv * (dx * dx))
    return Curve(p.grid, lhs, "WEAK_PAIR_LHS"), Curve(p.grid, rhs, "WEAK_PAIR_RHS")


def reversal_split(p: Path, eps, level: float = 0.0):
    """Split I2 into a functional of the reversed path plus a boundary term.

    ``I2(t) = -(1/m) sum_k (Y_{k+m} - Y_k) 1{Y_k > 0} + Delta2(t)`` where ``Y`` is
    the reversed path, ``k`` runs over ``[n - j + 1, n - m]`` and ``Delta2`` is the
    integral of the I2 integrand over ``[(t - eps)^+, t]``. Each piece is computed
    from its own formula so the identity is a genuine check.

    Returns ``(i2, reversed_part, delta2)`` as curves.
    """
    m = _lag(p, eps)
    n = p.num_steps
    x = _at_level(p, level)
    i2 = batch_i2(x, m)

    rev = _at_level(reverse_path(p), level)
    g = (rev[m:] - rev[: n - m + 1]) * (rev[: n - m + 1] > 0)  # k = 0..n-m
    pg = _prefix(g)
    j = np.arange(n + 1)
    start = np.minimum(n - j + 1, n - m + 1)
    reversed_part = -(pg[n - m + 1] - pg[start]) / m

    y = _clamped_read(x, m)
    pi = _prefix((y - x[:n]) * (y > 0))
    delta2 = (pi[j] - pi[np.maximum(j - m, 0)]) / m
    return (
        Curve(p.grid, i2, SchemeId.I2.value),
        Curve(p.grid, reversed_part, "I2_REVERSED"),
        Curve(p.grid, delta2, "DELTA2"),
    )
