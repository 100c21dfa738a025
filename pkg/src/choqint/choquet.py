"""Forward Choquet integration over [a, t] by three routes.

For a nondecreasing integrand g and a capacity mu, the Choquet integral is

    (C) int_a^t g dmu = g(a) mu([a, t]) + int_{g(a)}^{g(t)} mu([s_alpha, t]) dalpha

where s_alpha is the leftmost point with g >= alpha (every superlevel set of
g on [a, t] is an interval).  That level-set form is the brute-force oracle.
Two fast routes exist when mu([tau, t]) is differentiable in tau:

    (C) int_a^t g dmu = - int_a^t  d/dtau mu([tau, t]) g(tau) dtau

and, for a distorted Lebesgue measure mu([u, v]) = m(v - u),

    (C) int_a^t g dmu = int_a^t m'(t - tau) g(tau) dtau.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .capacity import (
    Distortion,
    IntervalCapacity,
    MonotoneCertificate,
    _tau_derivative_grid,
    check_f_plus,
    distorted_capacity,
)
from .errors import InvalidIntervalError, NotInFPlusError
from .exprlang import Expr, Num, Var, add, evaluate, substitute
from .quadrature import DEFAULT_QUADRATURE, QuadratureConfig, integrate

__all__ = [
    "ChoquetProblem",
    "as_grid",
    "uniform_grid",
    "choquet_level_set",
    "choquet_convolution",
    "choquet_general",
    "check_hereditary",
    "shift_to_origin",
    "HereditaryCheck",
]

Measure = Union[Distortion, IntervalCapacity]

#: absolute tolerance, in tau, of the level-set bisection
BISECTION_TOL = 1e-12


def as_grid(points) -> np.ndarray:
    """Validate a strictly increasing evaluation grid."""
    grid = np.asarray(points, dtype=float)
    if grid.ndim != 1 or grid.size < 1:
        raise ValueError("grid must be a non-empty 1-d sequence")
    if grid.size > 1 and np.any(np.diff(grid) <= 0.0):
        raise ValueError("grid must be strictly increasing")
    return grid


def uniform_grid(start: float, stop: float, points: int) -> np.ndarray:
    if points < 2:
        raise ValueError("grid needs at least 2 points")
    if stop <= start:
        raise ValueError("stop must exceed start")
    return np.linspace(start, stop, points)


@dataclass(frozen=True)
class ChoquetProblem:
    """Interval origin, integrand, measure, and evaluation grid of one
    Choquet integral equation.  Construction certifies the integrand."""

    a: float
    g: Expr
    measure: Measure
    t_grid: np.ndarray
    certificate: MonotoneCertificate | None = None

    def __post_init__(self):
        grid = as_grid(self.t_grid)
        if grid[0] < self.a:
            raise ValueError("t_grid must start at or after a")
        object.__setattr__(self, "t_grid", grid)
        if self.certificate is None:
            t_max = grid[-1] if grid[-1] > self.a else self.a + 1.0
            cert = check_f_plus(self.g, self.a, t_max)
            object.__setattr__(self, "certificate", cert)
        if not self.certificate.is_monotone:
            raise NotInFPlusError(
                "integrand is not nonnegative and nondecreasing on "
                f"[{float(self.a)!r}, {float(self.t_grid[-1])!r}]: "
                f"{self.certificate.verdict}"
            )

    def interval_measure(self, u, v):
        """mu([u, v]) under the problem's measure."""
        if isinstance(self.measure, Distortion):
            return self.measure.length_measure(np.asarray(v) - np.asarray(u))
        return self.measure.evaluate(u, v)

    def capacity(self) -> IntervalCapacity:
        if isinstance(self.measure, Distortion):
            upper = max(self.t_grid[-1] - self.a, 1.0)
            return distorted_capacity(self.measure, upper=upper)
        return self.measure


def _check_t(problem: ChoquetProblem, t: float) -> None:
    if t < problem.a:
        raise InvalidIntervalError(f"t = {t!r} precedes the origin a = {problem.a!r}")


def choquet_level_set(problem: ChoquetProblem, t: float,
                      cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Brute-force route straight from the superlevel-set definition.

    The alpha-integrand mu([s_alpha, t]) is found by bisection on the
    predicate g(tau) >= alpha, which needs only continuity and monotonicity
    of g (leftmost crossing, so flat spots resolve to the left edge).
    """
    _check_t(problem, t)
    if t == problem.a:
        return 0.0
    a = problem.a
    g = problem.g
    g_a = evaluate(g, a)
    g_t = evaluate(g, t)
    base = g_a * float(problem.interval_measure(a, t))
    if g_t <= g_a:
        return base

    def alpha_integrand(alphas: np.ndarray) -> np.ndarray:
        lo = np.full_like(alphas, a)
        hi = np.full_like(alphas, t)
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            reached = evaluate(g, mid) >= alphas
            hi = np.where(reached, mid, hi)
            lo = np.where(reached, lo, mid)
            if float(np.max(hi - lo)) <= BISECTION_TOL:
                break
        return np.asarray(problem.interval_measure(hi, t), dtype=float)

    return base + integrate(alpha_integrand, g_a, g_t, cfg)


def choquet_convolution(problem: ChoquetProblem, t: float,
                        cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Fast route for distorted Lebesgue measures: int_a^t m'(t-tau) g(tau) dtau."""
    if not isinstance(problem.measure, Distortion):
        raise TypeError("convolution route requires a distorted Lebesgue measure")
    _check_t(problem, t)
    if t == problem.a:
        return 0.0
    m_prime = problem.measure.m_prime
    g = problem.g

    def integrand(taus: np.ndarray) -> np.ndarray:
        return evaluate(m_prime, t - taus) * evaluate(g, taus)

    return integrate(integrand, problem.a, t, cfg)


def choquet_general(problem: ChoquetProblem, t: float,
                    cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """General-capacity route: - int_a^t d/dtau mu([tau, t]) g(tau) dtau."""
    _check_t(problem, t)
    if t == problem.a:
        return 0.0
    cap = problem.capacity()
    g = problem.g
    h = 1e-5 * max(1.0, abs(t))
    a = problem.a

    def integrand(taus: np.ndarray) -> np.ndarray:
        return -_tau_derivative_grid(cap, taus, t, h, a) * evaluate(g, taus)

    return integrate(integrand, a, t, cfg)


class HereditaryCheck(NamedTuple):
    lhs: float
    rhs: float
    gap: float


def check_hereditary(problem: ChoquetProblem, a_split: float, t: float,
                     cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> HereditaryCheck:
    """Verify that the integral over [a, t] decomposes at a_split.

    lhs is the Choquet integral over the whole of [a, t].  rhs adds the
    genuine Choquet integral of the same g over [a_split, t] to the
    complementary contribution of [a, a_split] at the same outer level t
    (the kernel keeps its argument t, which is exactly what makes the
    decomposition an identity; the two standalone integrals alone do not
    add up, because the measure is not additive).
    """
    _check_t(problem, t)
    if not problem.a <= a_split <= t:
        raise InvalidIntervalError(
            f"split {a_split!r} must lie between a = {problem.a!r} and t = {t!r}"
        )
    distorted = isinstance(problem.measure, Distortion)
    lhs = (choquet_convolution if distorted else choquet_general)(problem, t, cfg)

    if a_split == t:
        main = 0.0
    else:
        sub = ChoquetProblem(a_split, problem.g, problem.measure,
                             np.array([a_split, t]))
        main = (choquet_convolution if distorted else choquet_general)(sub, t, cfg)

    if a_split == problem.a:
        complement = 0.0
    elif distorted:
        m_prime = problem.measure.m_prime
        g = problem.g
        complement = integrate(
            lambda taus: evaluate(m_prime, t - taus) * evaluate(g, taus),
            problem.a, a_split, cfg)
    else:
        cap = problem.capacity()
        g = problem.g
        h = 1e-5 * max(1.0, abs(t))
        complement = integrate(
            lambda taus: -_tau_derivative_grid(cap, taus, t, h, problem.a)
            * evaluate(g, taus),
            problem.a, a_split, cfg)

    rhs = complement + main
    return HereditaryCheck(lhs, rhs, abs(lhs - rhs))


def shift_to_origin(problem: ChoquetProblem) -> ChoquetProblem:
    """Rebase the problem at a = 0: integrand r -> g(r + a), grid shifted.

    Distorted Lebesgue measures are translation invariant, so they carry
    over unchanged; a general capacity is wrapped with the shift.
    """
    a = problem.a
    g_shifted = substitute(problem.g, add(Var(), Num(a)))
    if isinstance(problem.measure, Distortion):
        measure = problem.measure
    else:
        measure = problem.measure.shifted(a)
    return ChoquetProblem(0.0, g_shifted, measure, problem.t_grid - a)
