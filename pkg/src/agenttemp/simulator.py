"""Equilibrium sampling of agent configurations.

Two samplers:

* :func:`sample_ideal` draws independent Bernoulli agents (J = 0 only).
* :func:`sample_mcmc` runs single-flip heat-bath dynamics on the full
  utility ``U = mu*B*sum(s) + J*sum_pairs(s_i s_j)`` with Boltzmann weight
  ``exp(U / (k T))``.

Random numbers come from numpy's ``Generator`` seeded through
``SeedSequence``; the numba kernel only consumes pre-drawn blocks, so runs
are bitwise reproducible and replicas get independent spawned streams.

The fully-connected topology uses J as given, without 1/N rescaling; its
energy is therefore not extensive and the ordering scale grows with z.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np

from .domain import (
    DomainError,
    EstimateMethod,
    MisuseError,
    SpinConfiguration,
    SurplusEstimate,
    SystemParams,
    Topology,
)
from .meanfield import occupation_probabilities

# sweeps per random-number block
_BLOCK_SWEEPS = 4096


@dataclass(frozen=True)
class SimulationConfig:
    params: SystemParams
    topology: Topology
    temperature: float
    seed: int = 0
    burn_in_sweeps: int = 1000
    sample_interval_sweeps: int = 10
    n_samples: int = 1000
    global_flip: bool = True

    def __post_init__(self):
        if not self.temperature > 0:
            raise DomainError(f"temperature must be positive, got {self.temperature!r}")
        if self.burn_in_sweeps < 0:
            raise DomainError("burn_in_sweeps must be >= 0")
        if self.sample_interval_sweeps < 1:
            raise DomainError("sample_interval_sweeps must be >= 1")
        if self.n_samples < 1:
            raise DomainError("n_samples must be >= 1")
        self.topology.check_params(self.params)

    def with_seed(self, seed) -> "SimulationConfig":
        return SimulationConfig(self.params, self.topology, self.temperature, seed,
                                self.burn_in_sweeps, self.sample_interval_sweeps,
                                self.n_samples, self.global_flip)


@dataclass(frozen=True)
class TimeSeries:
    agent_index: int
    states: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.states, dtype=np.int8)
        if not np.all((s == 1) | (s == -1)):
            raise DomainError("time series entries must be -1 or +1")
        s.setflags(write=False)
        object.__setattr__(self, "states", s)

    def surplus(self) -> SurplusEstimate:
        """Time-average surplus of this agent, with a Bernoulli standard error."""
        n = self.states.size
        m = float(self.states.mean(dtype=np.float64))
        se = math.sqrt(max(1.0 - m * m, 0.0) / n)
        return SurplusEstimate(m, n, se, EstimateMethod.TIME_SERIES, degenerate=se == 0.0)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return np.random.default_rng(seed)


def heat_bath_acceptance(delta_u: float, kt: float) -> float:
    """Probability of accepting a move that changes utility by ``delta_u``."""
    u = delta_u / kt
    if u >= 0:
        return 1.0 / (1.0 + math.exp(-u))
    e = math.exp(u)
    return e / (1.0 + e)


def _require_ideal(params: SystemParams, what: str) -> None:
    if params.j != 0:
        raise MisuseError(f"{what} requires J = 0 (ideal system); use sample_mcmc for J > 0")


def _p_plus(config: SimulationConfig) -> float:
    return occupation_probabilities(config.params, config.temperature, 0.0).p_plus


def sample_ideal(config: SimulationConfig) -> SpinConfiguration:
    """One equilibrium configuration of the ideal system: independent Bernoulli agents."""
    _require_ideal(config.params, "sample_ideal")
    rng = _rng(config.seed)
    up = rng.random(config.params.n_agents) < _p_plus(config)
    return SpinConfiguration(np.where(up, 1, -1).astype(np.int8), config.topology)


def ideal_surplus_trace(config: SimulationConfig) -> np.ndarray:
    """Census surplus of ``n_samples`` independent ideal-system configurations."""
    _require_ideal(config.params, "ideal_surplus_trace")
    rng = _rng(config.seed)
    n = config.params.n_agents
    n_plus = rng.binomial(n, _p_plus(config), size=config.n_samples)
    return (2.0 * n_plus - n) / n


def single_agent_series(config: SimulationConfig, agent_index: int) -> TimeSeries:
    """Successive decisions of one agent in the ideal system.

    Each agent gets its own stream derived from ``(seed, agent_index)``, so
    distinct agents are independent copies of the same representative agent.
    """
    _require_ideal(config.params, "single_agent_series")
    if not 0 <= agent_index < config.params.n_agents:
        raise DomainError(f"agent_index {agent_index} out of range")
    ss = np.random.SeedSequence(config.seed, spawn_key=(agent_index,))
    up = _rng(ss).random(config.n_samples) < _p_plus(config)
    return TimeSeries(agent_index, np.where(up, 1, -1).astype(np.int8))


@numba.njit(cache=True, nogil=True)
def _heat_bath_block(spins, nbr, h, j, kt, sites, uniforms, flip_uniforms,
                     n_sweeps, record_every, offset, m_out, states_out, out_pos):
    n = spins.shape[0]
    z = nbr.shape[1]
    total = 0
    for i in range(n):
        total += spins[i]
    pos = out_pos
    for sweep in range(n_sweeps):
        base = sweep * n
        for step in range(n):
            i = sites[base + step]
            local = 0
            for q in range(z):
                local += spins[nbr[i, q]]
            # utility change of flipping s_i
            du = -2.0 * spins[i] * (h + j * local)
            u = du / kt
            if u >= 0.0:
                acc = 1.0 / (1.0 + math.exp(-u))
            else:
                e = math.exp(u)
                acc = e / (1.0 + e)
            if uniforms[base + step] < acc:
                total -= 2 * spins[i]
                spins[i] = -spins[i]
        if flip_uniforms.shape[0] > 0:
            # global flip leaves the pair term unchanged
            u = -2.0 * h * total / kt
            if u >= 0.0:
                acc = 1.0 / (1.0 + math.exp(-u))
            else:
                e = math.exp(u)
                acc = e / (1.0 + e)
            if flip_uniforms[sweep] < acc:
                for i in range(n):
                    spins[i] = -spins[i]
                total = -total
        k = offset + sweep + 1
        if record_every > 0 and k % record_every == 0 and pos < m_out.shape[0]:
            m_out[pos] = total / n
            if states_out.shape[0] > 0:
                for i in range(n):
                    states_out[pos, i] = spins[i]
            pos += 1
    return pos


def _run_chain(config: SimulationConfig, keep_states: bool):
    p = config.params
    n = p.n_agents
    rng = _rng(config.seed)
    nbr = config.topology.neighbor_table()
    spins = np.ones(n, dtype=np.int64)
    kt = p.k * config.temperature
    h = p.mu * p.b
    m_out = np.empty(config.n_samples, dtype=np.float64)
    states_out = np.empty((config.n_samples if keep_states else 0, n), dtype=np.int8)
    no_flip = np.empty(0, dtype=np.float64)

    def advance(n_sweeps, record_every, offset, pos):
        done = 0
        while done < n_sweeps:
            block = min(_BLOCK_SWEEPS, n_sweeps - done)
            sites = rng.integers(0, n, size=block * n)
            uniforms = rng.random(block * n)
            flips = rng.random(block) if config.global_flip else no_flip
            pos = _heat_bath_block(spins, nbr, h, p.j, kt, sites, uniforms, flips,
                                   block, record_every, offset + done, m_out, states_out, pos)
            done += block
        return pos

    advance(config.burn_in_sweeps, 0, 0, 0)
    filled = advance(config.n_samples * config.sample_interval_sweeps,
                     config.sample_interval_sweeps, 0, 0)
    assert filled == config.n_samples
    return m_out, states_out


def sample_mcmc(config: SimulationConfig) -> list[SpinConfiguration]:
    """Heat-bath Markov chain samples at ``config.temperature``.

    A sweep is N single-flip attempts at uniformly random sites, each
    accepted with probability ``1/(1 + exp(-dU/(kT)))``. When
    ``config.global_flip`` is set, every sweep ends with one heat-bath
    attempt to reverse all agents at once; this keeps the chain ergodic
    at low T where single flips cannot cross between the two ordered states.

    The chain starts aligned with the news environment, discards
    ``burn_in_sweeps`` and then records ``n_samples`` configurations
    ``sample_interval_sweeps`` apart.
    """
    _, states = _run_chain(config, keep_states=True)
    return [SpinConfiguration(row, config.topology) for row in states]


def mcmc_surplus_trace(config: SimulationConfig) -> np.ndarray:
    """Surplus of each recorded MCMC configuration (same chain as :func:`sample_mcmc`)."""
    m, _ = _run_chain(config, keep_states=False)
    return m


def mcmc_replicas(config: SimulationConfig, n_replicas: int,
                  max_workers: int | None = None) -> list[np.ndarray]:
    """Surplus traces of independent replicas, seeded by spawning ``config.seed``.

    Output order follows replica index regardless of scheduling.
    """
    children = np.random.SeedSequence(config.seed).spawn(n_replicas)
    configs = [config.with_seed(ss) for ss in children]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(mcmc_surplus_trace, configs))


def batch_means(trace: np.ndarray, n_batches: int = 50) -> tuple[float, float]:
    """Mean of a correlated trace and its batch-means standard error."""
    trace = np.asarray(trace, dtype=np.float64)
    if trace.size < 2 * n_batches:
        raise DomainError("trace too short for the requested number of batches")
    size = trace.size // n_batches
    means = trace[: size * n_batches].reshape(n_batches, size).mean(axis=1)
    return float(trace.mean()), float(means.std(ddof=1) / math.sqrt(n_batches))
