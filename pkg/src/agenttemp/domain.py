"""Core value types shared by every module.

All money-valued parameters (``mu``, ``j``, ``k``) are stored raw; only the
ratios ``mu*B/k`` and ``J*z/k`` enter the physics, so any currency works as
long as it is used consistently.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np


class DomainError(ValueError):
    """An input lies outside the domain of an operation."""


class UnboundedTemperatureError(DomainError):
    """The surplus is indistinguishable from zero, so T is unbounded."""


class ConvergenceError(ArithmeticError):
    """A root search hit its evaluation cap.

    ``bracket`` holds the last interval known to contain the root.
    """

    def __init__(self, message: str, bracket: tuple[float, float]):
        super().__init__(f"{message} (bracket [{bracket[0]!r}, {bracket[1]!r}])")
        self.bracket = bracket


class MisuseError(ValueError):
    """An operation was called outside the regime it is defined for."""


@dataclass(frozen=True)
class SystemParams:
    """Model constants of a homogeneous two-state agent system.

    Parameters
    ----------
    n_agents : int
        Number of agents N.
    z : int
        Average number of adjoining agents.
    mu : float
        Individual utility of conforming to a news environment of strength 1.
    j : float
        Utility contributed by a pair of agents with equal behaviour (>= 0).
    k : float
        Cost of information, in the same currency as ``mu`` and ``j``.
    b : float
        Strength of the news environment, in (0, 1].
    """

    n_agents: int
    z: int
    mu: float
    j: float
    k: float
    b: float

    def __post_init__(self):
        validate_params(self)

    @property
    def t0(self) -> float:
        """Temperature scale mu*B/k."""
        return self.mu * self.b / self.k

    @property
    def coupling(self) -> float:
        """The ratio J*z/k."""
        return self.j * self.z / self.k

    def replace(self, **changes) -> "SystemParams":
        values = asdict(self)
        values.update(changes)
        return SystemParams(**values)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SystemParams":
        return cls(
            n_agents=int(data["n_agents"]),
            z=int(data["z"]),
            mu=float(data["mu"]),
            j=float(data["j"]),
            k=float(data["k"]),
            b=float(data["b"]),
        )


def _is_int(value) -> bool:
    return isinstance(value, (int, np.integer)) and not isinstance(value, bool)


def validate_params(p: SystemParams) -> SystemParams:
    """Return ``p`` unchanged if every parameter invariant holds.

    Raises
    ------
    DomainError
        Naming the first offending field.
    """
    if not _is_int(p.n_agents) or p.n_agents < 1:
        raise DomainError(f"N must be a positive integer, got {p.n_agents!r}")
    if not _is_int(p.z) or p.z < 1:
        raise DomainError(f"z must be a positive integer, got {p.z!r}")
    for name, value in (("mu", p.mu), ("J", p.j), ("k", p.k), ("B", p.b)):
        if not isinstance(value, (int, float, np.floating)) or not math.isfinite(value):
            raise DomainError(f"{name} must be a finite real number, got {value!r}")
    if p.mu <= 0:
        raise DomainError(f"mu must be positive, got {p.mu!r}")
    if p.k <= 0:
        raise DomainError(f"k must be positive, got {p.k!r}")
    if p.j < 0:
        raise DomainError(f"J must be non-negative, got {p.j!r}")
    if not 0 < p.b <= 1:
        raise DomainError(f"B must lie in (0,1], got {p.b!r}")
    return p


class Topology:
    """Interaction graph of the agents.

    Use the constructors :meth:`ring`, :meth:`square`, :meth:`hypercubic`
    and :meth:`fully_connected`. Pairs are stored once each (``i < j``).
    """

    KINDS = ("ring", "square", "hypercubic", "full")

    def __init__(self, kind: str, n_sites: int, side: int | None = None, dim: int | None = None):
        if kind not in self.KINDS:
            raise DomainError(f"unknown topology {kind!r}; expected one of {self.KINDS}")
        self.kind = kind
        self.n_sites = int(n_sites)
        self.side = side
        self.dim = dim
        self._edges: np.ndarray | None = None

    @classmethod
    def ring(cls, n: int) -> "Topology":
        if n < 2:
            raise DomainError("a ring needs at least 2 agents")
        return cls("ring", n, side=n, dim=1)

    @classmethod
    def square(cls, side: int) -> "Topology":
        if side < 3:
            raise DomainError("periodic square lattice needs side >= 3")
        return cls("square", side * side, side=side, dim=2)

    @classmethod
    def hypercubic(cls, side: int, dim: int) -> "Topology":
        if dim < 1:
            raise DomainError("dimension must be >= 1")
        if side < 3:
            raise DomainError("periodic hypercubic lattice needs side >= 3")
        return cls("hypercubic", side**dim, side=side, dim=dim)

    @classmethod
    def fully_connected(cls, n: int) -> "Topology":
        if n < 2:
            raise DomainError("a fully-connected system needs at least 2 agents")
        return cls("full", n)

    @classmethod
    def from_spec(cls, kind: str, n: int | None = None, side: int | None = None,
                  dim: int | None = None) -> "Topology":
        """Build a topology from loose CLI-style arguments."""
        if kind == "ring":
            return cls.ring(_need(n, "n"))
        if kind == "square":
            if side is None:
                side = _integer_root(_need(n, "n"), 2)
            return cls.square(side)
        if kind == "hypercubic":
            dim = _need(dim, "dim")
            if side is None:
                side = _integer_root(_need(n, "n"), dim)
            return cls.hypercubic(side, dim)
        if kind == "full":
            return cls.fully_connected(_need(n, "n"))
        raise DomainError(f"unknown topology {kind!r}")

    @property
    def z(self) -> int:
        if self.kind == "ring":
            return min(2, self.n_sites - 1)
        if self.kind == "full":
            return self.n_sites - 1
        return 2 * self.dim

    def edges(self) -> np.ndarray:
        """Unique interacting pairs as an ``(n_edges, 2)`` int array."""
        if self._edges is None:
            self._edges = self._build_edges()
        return self._edges

    def _build_edges(self) -> np.ndarray:
        n = self.n_sites
        if self.kind == "full":
            i, j = np.triu_indices(n, k=1)
            return np.column_stack([i, j]).astype(np.int64)
        if self.kind == "ring":
            pairs = {tuple(sorted((i, (i + 1) % n))) for i in range(n)}
            return np.array(sorted(pairs), dtype=np.int64)
        shape = (self.side,) * self.dim
        idx = np.arange(n).reshape(shape)
        pairs = []
        for axis in range(self.dim):
            nb = np.roll(idx, -1, axis=axis)
            pairs.append(np.column_stack([idx.ravel(), nb.ravel()]))
        e = np.sort(np.concatenate(pairs), axis=1)
        return e[np.lexsort((e[:, 1], e[:, 0]))]

    def neighbor_table(self) -> np.ndarray:
        """``(N, z)`` table of neighbour indices."""
        e = self.edges()
        table = [[] for _ in range(self.n_sites)]
        for a, b in e:
            table[a].append(b)
            table[b].append(a)
        return np.array(table, dtype=np.int64).reshape(self.n_sites, -1)

    def check_params(self, p: SystemParams) -> None:
        """Ensure ``p`` is consistent with this topology."""
        if p.n_agents != self.n_sites:
            raise DomainError(
                f"N={p.n_agents} does not match {self.kind} topology with {self.n_sites} sites"
            )
        if p.z > p.n_agents - 1:
            raise DomainError(f"z must satisfy z <= N-1, got z={p.z}, N={p.n_agents}")
        if p.z != self.z:
            raise DomainError(f"z={p.z} does not match {self.kind} topology (z={self.z})")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Topology):
            return NotImplemented
        return (self.kind, self.n_sites, self.side, self.dim) == (
            other.kind, other.n_sites, other.side, other.dim)

    def __hash__(self):
        return hash((self.kind, self.n_sites, self.side, self.dim))

    def __repr__(self):
        if self.kind in ("square", "hypercubic"):
            return f"Topology({self.kind!r}, side={self.side}, dim={self.dim})"
        return f"Topology({self.kind!r}, n={self.n_sites})"


def _need(value, name):
    if value is None:
        raise DomainError(f"topology requires {name}")
    return int(value)


def _integer_root(n: int, dim: int) -> int:
    side = round(n ** (1.0 / dim))
    if side**dim != n:
        raise DomainError(f"N={n} is not a perfect {dim}-th power")
    return side


@dataclass(frozen=True)
class SpinConfiguration:
    """One assignment of +1/-1 states to the agents."""

    states: np.ndarray
    topology: Topology | None = None

    def __post_init__(self):
        s = np.asarray(self.states, dtype=np.int8)
        if s.ndim != 1 or s.size == 0:
            raise DomainError("states must be a non-empty 1-d sequence")
        if not np.all((s == 1) | (s == -1)):
            raise DomainError("every state must be exactly -1 or +1")
        if self.topology is not None and self.topology.n_sites != s.size:
            raise DomainError("length of states does not match topology size")
        s.setflags(write=False)
        object.__setattr__(self, "states", s)

    @property
    def n_agents(self) -> int:
        return int(self.states.size)

    @property
    def n_plus(self) -> int:
        return int(np.count_nonzero(self.states == 1))

    @property
    def n_minus(self) -> int:
        return self.n_agents - self.n_plus

    @classmethod
    def from_counts(cls, n_plus: int, n_minus: int, topology: Topology | None = None):
        states = np.concatenate([np.ones(n_plus, np.int8), -np.ones(n_minus, np.int8)])
        return cls(states, topology)


class EstimateMethod(str, enum.Enum):
    CENSUS = "census"
    SUBSAMPLE = "subsample"
    TIME_SERIES = "time_series"


@dataclass(frozen=True)
class SurplusEstimate:
    """Estimated average surplus of decisions with its standard error.

    ``degenerate`` marks estimates whose standard error formula collapses to
    zero without the sample being exhaustive (a single observation, or a
    unanimous sample).
    """

    m_hat: float
    n_observed: int
    std_error: float
    method: EstimateMethod
    degenerate: bool = False

    def __post_init__(self):
        if not abs(self.m_hat) <= 1:
            raise DomainError(f"|m_hat| must be <= 1, got {self.m_hat!r}")
        if self.n_observed < 1:
            raise DomainError("n_observed must be >= 1")
        if not self.std_error >= 0:
            raise DomainError("std_error must be non-negative")
        object.__setattr__(self, "method", EstimateMethod(self.method))


class Variant(str, enum.Enum):
    EXACT = "exact_eq7"
    TAYLOR = "taylor_eq8"
    IDEAL = "ideal_eq9"


@dataclass(frozen=True)
class TemperatureReading:
    t: float
    t_std_error: float
    inverted: bool
    variant: Variant

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise DomainError("temperature reading must be finite")
        object.__setattr__(self, "variant", Variant(self.variant))


@dataclass(frozen=True)
class CountRecord:
    """Counted conforming/non-conforming decisions plus model parameters."""

    label: str
    n_plus: int
    n_minus: int
    params: SystemParams = field(repr=False)

    def __post_init__(self):
        if self.n_plus < 0 or self.n_minus < 0:
            raise DomainError("counts must be non-negative")
        if self.n_plus + self.n_minus < 1:
            raise DomainError("n_plus + n_minus must be >= 1")

    @property
    def total(self) -> int:
        return self.n_plus + self.n_minus


COUNT_FIELDS = ("label", "n_plus", "n_minus", "B", "mu", "k", "J", "z")


class RecordFormatError(ValueError):
    """A row of a count file could not be parsed. ``row`` is 1-based."""

    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


def record_from_row(row: dict, row_number: int = 0) -> CountRecord:
    try:
        n_plus = int(row["n_plus"])
        n_minus = int(row["n_minus"])
        params = SystemParams(
            n_agents=max(n_plus + n_minus, 1),
            z=int(row["z"]),
            mu=float(row["mu"]),
            j=float(row["J"]),
            k=float(row["k"]),
            b=float(row["B"]),
        )
        return CountRecord(row["label"], n_plus, n_minus, params)
    except (KeyError, TypeError, ValueError) as exc:
        raise RecordFormatError(row_number, str(exc)) from exc


def record_to_row(rec: CountRecord) -> dict:
    p = rec.params
    return {"label": rec.label, "n_plus": rec.n_plus, "n_minus": rec.n_minus,
            "B": repr(p.b), "mu": repr(p.mu), "k": repr(p.k), "J": repr(p.j), "z": p.z}


def read_count_records(text: str) -> list[CountRecord]:
    """Parse CountRecord CSV text (header ``label,n_plus,n_minus,B,mu,k,J,z``)."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise RecordFormatError(0, "empty file")
    missing = [f for f in COUNT_FIELDS if f not in reader.fieldnames]
    if missing:
        raise RecordFormatError(1, f"missing columns {missing}")
    records = [record_from_row(row, i) for i, row in enumerate(reader, start=2)]
    if not records:
        raise RecordFormatError(1, "no data rows")
    return records


def write_count_records(records: Iterable[CountRecord]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=COUNT_FIELDS, lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow(record_to_row(rec))
    return buf.getvalue()


def count_records_to_json(records: Sequence[CountRecord]) -> str:
    return json.dumps([record_to_row(r) | {"B": r.params.b, "mu": r.params.mu,
                                           "k": r.params.k, "J": r.params.j}
                       for r in records])


def count_records_from_json(text: str) -> list[CountRecord]:
    return [record_from_row(row, i) for i, row in enumerate(json.loads(text), start=1)]
