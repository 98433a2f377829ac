"""Mean-field theory of the two-state agent system.

Forward direction: temperature -> occupation probabilities -> surplus.
Measurement direction: observed surplus -> temperature, in three variants
(exact log-odds form, first-order expansion, ideal system).

The pair term uses the "each pair counted once" convention, so the
effective field is ``B + J*z*m / (2*mu)``.

Functions in the measurement direction accept ``mpmath.mpf`` surpluses as
well as floats. Near saturation (``1 - m`` below ~1e-8) a double cannot hold
``m`` accurately enough to recover T; :func:`self_consistent_surplus` with
``dps=...`` returns an ``mpf`` that round-trips exactly.
"""

from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass
from typing import Sequence

import mpmath

from .domain import (
    ConvergenceError,
    DomainError,
    SystemParams,
    TemperatureReading,
    UnboundedTemperatureError,
    Variant,
)

M_EPS = 1e-12
MAX_EVALUATIONS = 10**6


@dataclass(frozen=True)
class OccupationProbabilities:
    p_minus: float
    p_plus: float

    @property
    def surplus(self) -> float:
        return self.p_plus - self.p_minus


@dataclass(frozen=True)
class CurvePoint:
    m: float
    t_over_t0: float
    j: float


def _precision_for(m):
    """Working precision wide enough not to round an ``mpf`` input."""
    if isinstance(m, mpmath.mpf):
        return mpmath.workprec(max(mpmath.mp.prec, int(m.man).bit_length() + 32))
    return contextlib.nullcontext()


def _check_surplus(m) -> None:
    if not abs(m) < 1:
        raise DomainError(f"surplus must satisfy |m| < 1, got {m!r}")


def effective_field(p: SystemParams, m: float) -> float:
    """Effective news environment ``B + (J/mu) * z * m / 2``."""
    _check_surplus(m)
    return p.b + 0.5 * (p.j / p.mu) * p.z * m


def occupation_probabilities(p: SystemParams, t: float, m: float) -> OccupationProbabilities:
    """Boltzmann-Gibbs probabilities of the two agent states.

    With ``x = mu * B_eff / (k t)``: ``P- = 1/(1+e^{2x})``, ``P+ = 1/(1+e^{-2x})``.
    Only positive temperatures are accepted here.
    """
    if not t > 0:
        raise DomainError(f"temperature must be positive, got {t!r}")
    x = p.mu * effective_field(p, m) / (p.k * t)
    p_plus = _logistic(2.0 * x)
    # 1 - p_plus loses precision for large x; use the symmetric form instead
    p_minus = _logistic(-2.0 * x)
    return OccupationProbabilities(p_minus=p_minus, p_plus=p_plus)


def _logistic(u: float) -> float:
    if u >= 0:
        return 1.0 / (1.0 + math.exp(-u))
    e = math.exp(u)
    return e / (1.0 + e)


def _solve_field_argument(a: float, c: float, max_evaluations: int) -> float:
    """Root of ``x = a + c*tanh(x)`` on ``[a, a + c]`` (a > 0, c >= 0).

    The map is increasing and concave on x > 0, so the positive root is
    unique and fixed-point iterates approach it monotonically. Iteration is
    used while it contracts quickly; otherwise bisection on the bracket it
    has already narrowed, run until the bracket stops shrinking.
    """
    if c == 0:
        return a
    lo, hi = a, a + c
    evals = 0
    x = hi
    for _ in range(500):
        if evals >= max_evaluations:
            raise ConvergenceError("self-consistency did not converge", (lo, hi))
        g = a + c * math.tanh(x)
        evals += 1
        if g == x:
            return x
        # g < x means x is above the root
        if g < x:
            hi = min(hi, x)
        else:
            lo = max(lo, x)
        if c / math.cosh(min(x, 350.0)) ** 2 > 0.5:
            break
        if abs(g - x) <= 2 * math.ulp(x):
            return g
        x = g
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return mid
        evals += 1
        if evals > max_evaluations:
            raise ConvergenceError("self-consistency did not converge", (lo, hi))
        if a + c * math.tanh(mid) > mid:
            lo = mid
        else:
            hi = mid


def self_consistent_surplus(p: SystemParams, t: float, *, dps: int | None = None,
                            max_evaluations: int = MAX_EVALUATIONS):
    """Positive-branch solution of ``m = tanh((mu B + J z m / 2) / (k t))``.

    Parameters
    ----------
    p : SystemParams
    t : float
        Temperature, must be positive.
    dps : int, optional
        If given, solve with ``mpmath`` at this many decimal digits and
        return an ``mpf``. Needed when the surplus saturates towards 1.
    max_evaluations : int
        Evaluation cap for the float solver.

    Returns
    -------
    float or mpmath.mpf
        The surplus ``m*`` in (0, 1). In float mode a saturated surplus
        (``1 - m*`` below half an ulp) rounds to exactly 1.0.
    """
    if not t > 0:
        raise DomainError(f"temperature must be positive, got {t!r}")
    # solve for the tanh argument x = mu*B_eff/(k t); m = tanh(x)
    a = p.mu * p.b / (p.k * t)
    c = 0.5 * p.j * p.z / (p.k * t)
    if dps is None:
        x = _solve_field_argument(a, c, max_evaluations)
        return math.tanh(x)
    with mpmath.workdps(dps):
        a_ = mpmath.mpf(p.mu) * p.b / (mpmath.mpf(p.k) * t)
        c_ = mpmath.mpf(p.j) * p.z / (2 * mpmath.mpf(p.k) * t)
        if c_ == 0:
            x = a_
        else:
            x = mpmath.findroot(lambda u: a_ + c_ * mpmath.tanh(u) - u, (a_, a_ + c_),
                                solver="anderson")
        return +mpmath.tanh(x)


def log_odds(m):
    """``ln((1+m)/(1-m))`` evaluated stably, i.e. ``2 artanh(m)``."""
    if isinstance(m, mpmath.mpf):
        return 2 * mpmath.atanh(m)
    return math.log1p(m) - math.log1p(-m)


def _exact_numerator(p: SystemParams, m):
    return 2.0 * p.mu * p.b / p.k + (p.j * p.z / p.k) * m


def measure_temperature(p: SystemParams, m, *, m_eps: float = M_EPS) -> TemperatureReading:
    """Temperature from the observed surplus via the exact measurement equation.

    ``T = (2 mu B / k + (J z / k) m) / ln((1+m)/(1-m))``.

    A negative surplus yields a negative-temperature reading with
    ``inverted=True``. For J > 0 a strongly negative surplus can make the
    effective field itself negative; that is a counter-aligned state at
    positive T and is reported with ``inverted=False``.
    """
    with _precision_for(m):
        _check_surplus(m)
        if abs(m) < m_eps:
            raise UnboundedTemperatureError(
                "temperature unbounded: surplus indistinguishable from zero")
        num = _exact_numerator(p, m)
        if num == 0:
            raise DomainError("effective field vanishes at this surplus; no finite temperature")
        t = float(num / log_odds(m))
    return TemperatureReading(t=t, t_std_error=0.0, inverted=t < 0, variant=Variant.EXACT)


def measure_temperature_derivative(p: SystemParams, m) -> float:
    """Analytic dT/dm of the exact measurement equation."""
    with _precision_for(m):
        _check_surplus(m)
        lo = log_odds(m)
        d_lo = 2 / ((1 - m) * (1 + m))
        return float((p.j * p.z / p.k) / lo - _exact_numerator(p, m) * d_lo / lo**2)


def _check_positive_branch(m) -> None:
    if not 0 < m < 1:
        raise DomainError(f"expansion is only valid for 0 < m < 1, got {m!r}")


def measure_temperature_taylor(p: SystemParams, m) -> TemperatureReading:
    """First-order form ``T = (mu B / k) / m + J z / (2 k)``, valid for small m > 0."""
    with _precision_for(m):
        _check_positive_branch(m)
        t = float(p.t0 / m + 0.5 * p.coupling)
    return TemperatureReading(t=t, t_std_error=0.0, inverted=False, variant=Variant.TAYLOR)


def measure_temperature_ideal(p: SystemParams, m) -> TemperatureReading:
    """Ideal agent system (J -> 0): ``T = (mu B / k) / m``, Curie's law form."""
    with _precision_for(m):
        _check_positive_branch(m)
        t = float(p.t0 / m)
    return TemperatureReading(t=t, t_std_error=0.0, inverted=False,
                              variant=Variant.IDEAL)


MEASURES = {
    Variant.EXACT: measure_temperature,
    Variant.TAYLOR: measure_temperature_taylor,
    Variant.IDEAL: measure_temperature_ideal,
}


def characteristic_curve(p: SystemParams, j_values: Sequence[float],
                         m_grid: Sequence[float]) -> list[CurvePoint]:
    """T/T0 from the exact measurement equation over a surplus grid, for each J.

    Points are emitted J-major, in the order of ``j_values``.
    """
    grid = [float(m) for m in m_grid]
    if not grid:
        raise DomainError("surplus grid is empty")
    if any(not 0 < m < 1 for m in grid):
        raise DomainError("every grid surplus must lie in (0, 1)")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError("surplus grid must be strictly increasing")
    points = []
    for j in j_values:
        pj = p.replace(j=float(j))
        for m in grid:
            points.append(CurvePoint(m=m, t_over_t0=measure_temperature(pj, m).t / pj.t0, j=float(j)))
    return points
