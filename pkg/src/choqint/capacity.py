"""Distorted Lebesgue measures, interval capacities, and monotone certificates.

A distorted Lebesgue measure is determined by a distortion ``m`` with
``m(0) = 0``, nonnegative and nondecreasing: on an interval it evaluates to
``m(v - u)``.  General capacities are exposed only through interval
evaluation ``mu([u, v])`` — superlevel sets of monotone integrands on
``[a, t]`` are intervals, so nothing more is ever needed here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidDistortionError
from .exprlang import Expr, differentiate, evaluate, parse, render

__all__ = [
    "MonotoneCertificate",
    "certify_samples",
    "check_f_plus",
    "Distortion",
    "IntervalCapacity",
    "distorted_capacity",
    "capacity_tau_derivative",
]

#: below quadrature noise, above double-precision rounding
MONOTONE_SLACK = 1e-10


@dataclass(frozen=True)
class MonotoneCertificate:
    """Verdict of a sampled nonnegativity-and-monotonicity check.

    ``violation_index`` is the index of the first offending sample (None
    when the verdict is Monotone); ``max_violation`` is the largest observed
    negativity or adjacent decrease.
    """

    grid: np.ndarray
    violation_index: int | None
    max_violation: float

    @property
    def is_monotone(self) -> bool:
        return self.violation_index is None

    @property
    def verdict(self) -> str:
        if self.violation_index is None:
            return "Monotone"
        return f"ViolatedAt({self.violation_index})"


def certify_samples(grid, values, slack: float = MONOTONE_SLACK) -> MonotoneCertificate:
    """Certify that ``values`` sampled on ``grid`` are nonnegative and
    nondecreasing within ``slack`` (absolute)."""
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    violation_index = None
    max_violation = 0.0
    for i, v in enumerate(values):
        drop = max(-v, values[i - 1] - v if i else 0.0)
        if drop > max_violation:
            max_violation = drop
        if drop > slack and violation_index is None:
            violation_index = i
    return MonotoneCertificate(grid, violation_index, max_violation)


def check_f_plus(h: Expr, a: float, t_max: float, n: int = 201,
                 slack: float = MONOTONE_SLACK) -> MonotoneCertificate:
    """Sample ``h`` on an n-point uniform grid over [a, t_max] and certify
    membership in the class of nonnegative nondecreasing functions."""
    if n < 2:
        raise ValueError("certificate grid needs at least 2 points")
    if t_max <= a:
        raise ValueError("t_max must exceed a")
    grid = np.linspace(a, t_max, n)
    return certify_samples(grid, evaluate(h, grid), slack)


@dataclass(frozen=True)
class Distortion:
    """A distortion ``m`` together with its symbolic derivative."""

    m: Expr
    m_prime: Expr

    @classmethod
    def from_expression(cls, m, upper: float = 10.0, points: int = 401) -> "Distortion":
        """Build and validate a distortion from source text or a parsed tree.

        Checks m(0) = 0 (to 1e-12) and nonnegativity/monotonicity on a dense
        grid over [0, upper]; raises :class:`InvalidDistortionError` on
        failure.
        """
        expr = parse(m) if isinstance(m, str) else m
        _validate_distortion(expr, upper, points)
        return cls(expr, differentiate(expr))

    def length_measure(self, lengths):
        """m applied to interval lengths."""
        return evaluate(self.m, lengths)

    def density(self, lengths):
        """m' applied to interval lengths."""
        return evaluate(self.m_prime, lengths)


def _validate_distortion(expr: Expr, upper: float, points: int) -> None:
    at_zero = evaluate(expr, 0.0)
    if abs(at_zero) > 1e-12:
        raise InvalidDistortionError(
            f"m(0) = {at_zero!r}, expected 0 for '{render(expr)}'"
        )
    grid = np.linspace(0.0, upper, points)
    values = evaluate(expr, grid)
    if np.any(values < -1e-12):
        i = int(np.argmax(values < -1e-12))
        raise InvalidDistortionError(
            f"m({grid[i]!r}) = {values[i]!r} is negative for '{render(expr)}'"
        )
    drops = values[:-1] - values[1:]
    if np.any(drops > 1e-12):
        i = int(np.argmax(drops > 1e-12))
        raise InvalidDistortionError(
            f"m decreases between {grid[i]!r} and {grid[i + 1]!r} for '{render(expr)}'"
        )


@dataclass
class IntervalCapacity:
    """A monotone set function evaluated on closed intervals [u, v], u <= v.

    ``evaluator`` may be vectorized over ndarrays; if it is not, it is
    wrapped transparently on first use.
    """

    evaluator: Callable
    _vectorized: bool | None = field(default=None, repr=False, compare=False)

    def evaluate(self, u, v):
        u_arr = np.asarray(u, dtype=float)
        v_arr = np.asarray(v, dtype=float)
        shape = np.broadcast_shapes(u_arr.shape, v_arr.shape)
        if self._vectorized is None:
            try:
                out = np.asarray(self.evaluator(u_arr, v_arr), dtype=float)
                self._vectorized = out.shape == shape
            except (TypeError, ValueError):
                self._vectorized = False
            if self._vectorized:
                return float(out) if shape == () else out
        if self._vectorized:
            out = np.asarray(self.evaluator(u_arr, v_arr), dtype=float)
        else:
            out = np.vectorize(self.evaluator, otypes=[float])(u_arr, v_arr)
        return float(out) if shape == () else out

    def shifted(self, offset: float) -> "IntervalCapacity":
        """The capacity nu([u, v]) = mu([u + offset, v + offset])."""
        base = self.evaluate
        return IntervalCapacity(lambda u, v: base(u + offset, v + offset))


def distorted_capacity(d: Distortion, upper: float = 10.0, points: int = 401) -> IntervalCapacity:
    """Interval capacity mu([u, v]) = m(v - u) of a distorted Lebesgue measure.

    Re-validates the distortion on [0, upper]; translation invariance holds
    by construction since only the interval length enters.
    """
    _validate_distortion(d.m, upper, points)
    m = d.m
    return IntervalCapacity(lambda u, v: evaluate(m, np.asarray(v) - np.asarray(u)))


def capacity_tau_derivative(c: IntervalCapacity, tau: float, t: float,
                            h: float | None = None, lower: float | None = None) -> float:
    """Finite-difference approximation of d/dtau mu([tau, t]) at tau.

    Central difference with step ``h`` (default 1e-5 * max(1, |t|)); the
    step shrinks symmetrically near ``t`` (and near ``lower`` if given), and
    degenerates to a one-sided difference at the endpoints themselves.
    """
    if h is None:
        h = 1e-5 * max(1.0, abs(t))
    if tau > t:
        raise ValueError("tau must not exceed t")
    step = min(h, t - tau)
    if lower is not None:
        step = min(step, tau - lower)
    if step > 0.0:
        return float((c.evaluate(tau + step, t) - c.evaluate(tau - step, t)) / (2.0 * step))
    if tau == t:  # backward one-sided
        return float((c.evaluate(t, t) - c.evaluate(t - h, t)) / h)
    return float((c.evaluate(tau + h, t) - c.evaluate(tau, t)) / h)


def _tau_derivative_grid(c: IntervalCapacity, taus: np.ndarray, t: float,
                         h: float, lower: float | None) -> np.ndarray:
    """Vectorized form of :func:`capacity_tau_derivative` for quadrature nodes.

    Steps shrink one-sidedly near the interval ends so the capacity is never
    evaluated outside [lower, t]; the difference stays second-order accurate
    wherever both steps equal ``h``.
    """
    up = np.minimum(h, np.maximum(t - taus, 0.0))
    if lower is None:
        down = np.full_like(taus, h)
    else:
        down = np.minimum(h, np.maximum(taus - lower, 0.0))
    total = up + down
    total[total == 0.0] = 1.0  # degenerate zero-length interval; numerator is 0 too
    return (c.evaluate(taus + up, t) - c.evaluate(taus - down, t)) / total
