"""Two subsystems sharing one temperature.

Subsystem 1 is ideal (J = 0), subsystem 2 has pair utility J; both share
B, mu, k and z. Equating their small-surplus temperature readings links
their surpluses.
"""

from __future__ import annotations

import warnings

from .domain import DomainError, SystemParams

# beyond this the small-surplus expansions are used with a warning
SMALL_SURPLUS_LIMIT = 0.05


class RegimeWarning(UserWarning):
    """Result computed outside the small-surplus regime."""


def _amplification(p: SystemParams) -> float:
    return 0.5 * (p.j / p.mu) * (p.z / p.b)


def _check_m1(m1: float) -> None:
    if not m1 > 0:
        raise DomainError(f"m1 must be positive, got {m1!r}")
    if m1 > SMALL_SURPLUS_LIMIT:
        warnings.warn(f"m1={m1} is outside the small-surplus regime (m1 <= {SMALL_SURPLUS_LIMIT})",
                      RegimeWarning, stacklevel=3)


def coupled_surplus_exact(p: SystemParams, m1: float) -> float:
    """Surplus of the coupled subsystem: ``m1 / (1 - J z m1 / (2 mu B))``."""
    _check_m1(m1)
    denom = 1.0 - _amplification(p) * m1
    if denom <= 0:
        raise DomainError("equilibrium approximation breaks down: J z m1 / (2 mu B) >= 1")
    return m1 / denom


def coupled_surplus_linear(p: SystemParams, m1: float) -> float:
    """First-order form ``m1 + J z m1^2 / (2 mu B)``."""
    _check_m1(m1)
    return m1 + _amplification(p) * m1 * m1


def influence_sensitivity(p: SystemParams, m1: float) -> float:
    """d(m2)/d(mu) of the first-order form at fixed m1; negative when J > 0."""
    _check_m1(m1)
    return -0.5 * (p.j / p.mu**2) * (p.z / p.b) * m1 * m1
