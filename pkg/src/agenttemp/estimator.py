"""Surplus estimation and temperature readings with uncertainty.

A full census gives the surplus exactly. A subsample (the "thermometer")
gives an estimate whose standard error ``sqrt((1 - m^2) / n)`` is carried
through the measurement equation with the delta method.
"""

from __future__ import annotations

import math

import numpy as np

from .domain import (
    CountRecord,
    DomainError,
    EstimateMethod,
    SpinConfiguration,
    SurplusEstimate,
    SystemParams,
    TemperatureReading,
    Variant,
)
from .meanfield import MEASURES, measure_temperature_derivative

# sampling fractions above this get the finite-population correction
FPC_THRESHOLD = 0.05


def census_surplus(config: SpinConfiguration) -> SurplusEstimate:
    n = config.n_agents
    m = (config.n_plus - config.n_minus) / n
    return SurplusEstimate(m, n, 0.0, EstimateMethod.CENSUS)


def subsample_surplus(config: SpinConfiguration, n: int, seed=None) -> SurplusEstimate:
    """Estimate the surplus from a simple random sample without replacement.

    The standard error is ``sqrt((1 - m^2)/n)``, multiplied by
    ``sqrt((N - n)/(N - 1))`` once the sampling fraction exceeds 5%.
    A zero standard error from a non-exhaustive sample (n = 1, or a
    unanimous sample) is flagged ``degenerate``.
    """
    size = config.n_agents
    if not 1 <= n <= size:
        raise DomainError(f"sample size must satisfy 1 <= n <= N={size}, got {n}")
    rng = np.random.default_rng(seed)
    picked = config.states[rng.choice(size, size=n, replace=False)]
    m = float(picked.mean(dtype=np.float64))
    var = max(1.0 - m * m, 0.0) / n
    if n / size > FPC_THRESHOLD:
        var *= (size - n) / (size - 1) if size > 1 else 0.0
    se = math.sqrt(var)
    return SurplusEstimate(m, n, se, EstimateMethod.SUBSAMPLE,
                           degenerate=(se == 0.0 and n < size))


def surplus_from_counts(rec: CountRecord, as_sample: bool = False) -> SurplusEstimate:
    """Surplus ``(n+ - n-)/(n+ + n-)`` of a count record.

    Counts are treated as an exhaustive census by default. With
    ``as_sample=True`` they are treated as a random sample and get the
    binomial standard error.
    """
    total = rec.n_plus + rec.n_minus
    if total < 1:
        raise DomainError("count record has no observations")
    m = (rec.n_plus - rec.n_minus) / total
    if not as_sample:
        return SurplusEstimate(m, total, 0.0, EstimateMethod.CENSUS)
    se = math.sqrt(max(1.0 - m * m, 0.0) / total)
    return SurplusEstimate(m, total, se, EstimateMethod.SUBSAMPLE, degenerate=se == 0.0)


def temperature_derivative(p: SystemParams, m: float, variant: Variant = Variant.EXACT) -> float:
    """dT/dm for the chosen form of the measurement equation."""
    variant = Variant(variant)
    if variant is Variant.EXACT:
        return measure_temperature_derivative(p, m)
    return -p.t0 / (m * m)


def temperature_with_uncertainty(p: SystemParams, est: SurplusEstimate,
                                 variant: Variant = Variant.EXACT) -> TemperatureReading:
    """Temperature reading with first-order (delta-method) standard error."""
    variant = Variant(variant)
    reading = MEASURES[variant](p, est.m_hat)
    se = abs(temperature_derivative(p, est.m_hat, variant)) * est.std_error
    return TemperatureReading(reading.t, se, reading.inverted, reading.variant)
