"""Exact references for small systems.

:func:`enumerate_exact` sums Boltzmann weights ``exp(U/(kT))`` over all 2^N
configurations (E = -U, so utility enters with a plus sign).
:func:`microcanonical_temperature_ideal` builds T = -dU/dS directly from
the binomial state count of the ideal system.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .domain import DomainError, SystemParams, Topology, UnboundedTemperatureError

MAX_EXACT_AGENTS = 24
_CHUNK_BITS = 18


class SizeError(DomainError):
    pass


@dataclass(frozen=True)
class ExactEnsemble:
    params: SystemParams
    topology: Topology
    temperature: float
    log_partition: float
    mean_surplus: float
    mean_utility: float

    @property
    def partition_value(self) -> float:
        """Z itself; may overflow to ``inf`` for large utilities at low T."""
        try:
            return math.exp(self.log_partition)
        except OverflowError:
            return math.inf


def configuration_utility(p: SystemParams, topology: Topology, states) -> float:
    """Utility of one configuration: ``mu B sum(s) + J sum_pairs s_i s_j``."""
    s = np.asarray(states, dtype=np.int64)
    e = topology.edges()
    return float(p.mu * p.b * s.sum() + p.j * np.sum(s[e[:, 0]] * s[e[:, 1]]))


def _chunk_stats(start: int, stop: int, n: int, edges: np.ndarray, h: float, j: float,
                 kt: float):
    idx = np.arange(start, stop, dtype=np.int64)
    bits = ((idx[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.int8)
    n_up = bits.sum(axis=1, dtype=np.int64)
    total = 2 * n_up - n
    # s_a s_b = 1 - 2*(bit_a xor bit_b)
    disagree = np.zeros(idx.size, dtype=np.int64)
    for a, b in edges:
        disagree += bits[:, a] ^ bits[:, b]
    pair = len(edges) - 2 * disagree
    u = h * total + j * pair
    log_w = u / kt
    shift = log_w.max()
    w = np.exp(log_w - shift)
    return float(shift), float(w.sum()), float((w * total).sum()) / n, float((w * u).sum())


def enumerate_exact(p: SystemParams, topology: Topology, t: float,
                    max_workers: int | None = 1) -> ExactEnsemble:
    """Canonical ensemble by full enumeration, stabilised with log-sum-exp.

    Chunks of configuration indices may be evaluated in parallel; their
    partial sums are combined in index order so the result does not depend
    on scheduling.
    """
    if not t > 0:
        raise DomainError(f"temperature must be positive, got {t!r}")
    n = p.n_agents
    if n > MAX_EXACT_AGENTS:
        raise SizeError(f"exact enumeration is capped at N <= {MAX_EXACT_AGENTS}, got N={n}")
    topology.check_params(p)
    edges = topology.edges()
    kt = p.k * t
    h = p.mu * p.b
    total = 1 << n
    chunk = 1 << min(_CHUNK_BITS, n)
    bounds = [(lo, min(lo + chunk, total)) for lo in range(0, total, chunk)]

    def work(bound):
        return _chunk_stats(bound[0], bound[1], n, edges, h, p.j, kt)

    if max_workers == 1 or len(bounds) == 1:
        parts = [work(b) for b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            parts = list(pool.map(work, bounds))

    shift = max(s for s, *_ in parts)
    z_sum = m_sum = u_sum = 0.0
    for s, z_part, m_part, u_part in parts:
        scale = math.exp(s - shift)
        z_sum += scale * z_part
        m_sum += scale * m_part
        u_sum += scale * u_part
    return ExactEnsemble(
        params=p,
        topology=topology,
        temperature=t,
        log_partition=shift + math.log(z_sum),
        mean_surplus=m_sum / z_sum,
        mean_utility=u_sum / z_sum,
    )


def _log_binomial(n: int, r: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(r + 1) - math.lgamma(n - r + 1)


def microcanonical_temperature_ideal(p: SystemParams, n_plus: int) -> float:
    """Temperature ``-dU/dS`` of the ideal system at ``n_plus`` conforming agents.

    With ``U(n+) = mu B (2 n+ - N)`` and ``S(n+) = k ln C(N, n+)``, the
    derivative is a centred difference between ``n+ - 1`` and ``n+ + 1``.
    Below N/2 the entropy rises with U and the result is negative.
    """
    if p.j != 0:
        raise DomainError("microcanonical temperature is implemented for J = 0 only")
    n = p.n_agents
    if not 1 <= n_plus <= n - 1:
        raise DomainError(f"n_plus must lie in [1, N-1], got {n_plus}")
    du = 4.0 * p.mu * p.b
    ds = p.k * (_log_binomial(n, n_plus + 1) - _log_binomial(n, n_plus - 1))
    if ds == 0:
        raise UnboundedTemperatureError("temperature unbounded: entropy is stationary at this state")
    return -du / ds
