import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from agenttemp.domain import (
    CountRecord,
    DomainError,
    EstimateMethod,
    SpinConfiguration,
    SurplusEstimate,
    SystemParams,
    TemperatureReading,
    Topology,
    Variant,
    count_records_from_json,
    count_records_to_json,
    read_count_records,
    validate_params,
    write_count_records,
)

BASE = dict(n_agents=100, z=12, mu=1.0, j=0.0, k=1.0, b=1.0)


def test_fig1_parameters_valid():
    p = SystemParams(**BASE)
    assert validate_params(p) is p
    assert p.t0 == 1.0


@pytest.mark.parametrize("field,value,needle", [
    ("b", 0.0, "B must lie in (0,1]"),
    ("b", 1.5, "B must lie in (0,1]"),
    ("k", -1.0, "k"),
    ("mu", 0.0, "mu"),
    ("j", -0.5, "J"),
    ("n_agents", 0, "N"),
    ("z", 0, "z"),
    ("mu", math.nan, "mu"),
])
def test_invalid_parameters_name_the_field(field, value, needle):
    with pytest.raises(DomainError, match=needle.replace("(", r"\(").replace("]", r"\]")):
        SystemParams(**{**BASE, field: value})


def test_validate_is_idempotent():
    p = SystemParams(**BASE)
    assert validate_params(validate_params(p)) == p


def test_ratios_are_currency_free():
    p = SystemParams(**{**BASE, "mu": 100.0, "k": 100.0, "j": 50.0})
    assert p.t0 == 1.0
    assert p.coupling == 6.0


@pytest.mark.parametrize("topo,z,n_edges", [
    (Topology.ring(10), 2, 10),
    (Topology.ring(2), 1, 1),
    (Topology.square(4), 4, 32),
    (Topology.hypercubic(3, 3), 6, 81),
    (Topology.fully_connected(12), 11, 66),
])
def test_topology_edges(topo, z, n_edges):
    assert topo.z == z
    e = topo.edges()
    assert e.shape == (n_edges, 2)
    assert np.all(e[:, 0] < e[:, 1])
    assert len({tuple(r) for r in e}) == n_edges
    nbr = topo.neighbor_table()
    assert nbr.shape == (topo.n_sites, z)


def test_topology_z_must_match_params():
    p = SystemParams(**{**BASE, "n_agents": 16, "z": 12})
    with pytest.raises(DomainError):
        Topology.square(4).check_params(p)
    with pytest.raises(DomainError, match="z <= N-1"):
        Topology.fully_connected(16).check_params(SystemParams(**{**BASE, "n_agents": 16, "z": 16}))


def test_square_requires_perfect_square():
    with pytest.raises(DomainError):
        Topology.from_spec("square", n=15)
    assert Topology.from_spec("square", n=16) == Topology.square(4)


def test_spin_configuration_rejects_other_values():
    with pytest.raises(DomainError):
        SpinConfiguration(np.array([1, 0, -1]))
    c = SpinConfiguration.from_counts(3, 2)
    assert (c.n_plus, c.n_minus) == (3, 2)
    with pytest.raises(ValueError):
        c.states[0] = -1


def test_value_types_check_invariants():
    with pytest.raises(DomainError):
        SurplusEstimate(1.2, 10, 0.0, EstimateMethod.CENSUS)
    with pytest.raises(DomainError):
        TemperatureReading(math.inf, 0.0, False, Variant.EXACT)
    with pytest.raises(DomainError):
        CountRecord("x", 0, 0, SystemParams(**BASE))


reals = st.floats(min_value=1e-6, max_value=1e6, allow_nan=False)


@given(n_plus=st.integers(0, 10**7), n_minus=st.integers(1, 10**7), b=st.floats(1e-9, 1.0),
       mu=reals, k=reals, j=st.floats(0, 1e6), z=st.integers(1, 1000))
def test_count_record_roundtrip(n_plus, n_minus, b, mu, k, j, z):
    p = SystemParams(n_agents=n_plus + n_minus, z=z, mu=mu, j=j, k=k, b=b)
    rec = CountRecord("row,with \"quotes\"", n_plus, n_minus, p)
    back_csv = read_count_records(write_count_records([rec]))[0]
    back_json = count_records_from_json(count_records_to_json([rec]))[0]
    for back in (back_csv, back_json):
        assert back == rec
        assert back.params == p


def test_params_dict_roundtrip():
    p = SystemParams(**{**BASE, "b": 0.1 + 0.2})
    assert SystemParams.from_dict(json.loads(json.dumps(p.to_dict()))) == p
