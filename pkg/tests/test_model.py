import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as hs

from conftest import fixture_path, net_of
from hetnet.errors import InvariantError, ParseError, SchemaError
from hetnet.model import (AC, EXTENDED, Connection, complementary_subspace, dumps, load_network,
                          loads, network_from_dict, network_to_dict, roles_at)
from strategies import instances


def doc_of(name):
    return json.loads(fixture_path(name).read_text())


def test_clique4_loads_as_ac_with_five_connections():
    net = net_of("clique4")
    assert net.mode == AC
    assert len(net.connections) == 5
    assert [c.key for c in net.sorted_connections] == [(1, 2), (1, 3), (2, 3), (3, 4), (4, 1)]


def test_role_annotated_fixture_is_extended():
    assert net_of("planar_node").mode == EXTENDED


def test_two_cycle_rejected():
    doc = doc_of("triangle")
    doc["connections"].append({"from": 2, "to": 1, "dim": 1, "subspace": [1, 2]})
    with pytest.raises(InvariantError):
        network_from_dict(doc)


def test_two_equilibria_on_one_axis_rejected():
    doc = doc_of("clique4")
    doc["equilibria"][3]["axis"] = 3
    with pytest.raises(InvariantError):
        network_from_dict(doc)


def test_unknown_key_is_a_schema_error():
    doc = doc_of("triangle")
    doc["colour"] = "blue"
    with pytest.raises(SchemaError):
        network_from_dict(doc)


def test_bad_json_is_a_parse_error(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ParseError):
        load_network(p)


@pytest.mark.parametrize("sub, n, want", [
    ({1, 2}, 4, {3, 4}),
    ({1, 2, 3}, 5, {4, 5}),
    ({1, 2, 3}, 3, set()),
])
def test_complementary_subspace(sub, n, want):
    conn = Connection(1, 2, len(sub) - 1, frozenset(sub))
    assert complementary_subspace(conn, n) == want


def test_fixture_files_are_canonical():
    for p in sorted(fixture_path("x").parent.glob("*.json")):
        assert dumps(load_network(p)) == p.read_text(), p.name


def test_derived_roles_at_m_point():
    r = roles_at(net_of("clique4"), 2)
    assert r.radial == {2}
    assert r.expanding == {3}
    assert r.contracting == {1}
    assert r.cliques == ((1, 3),)


@settings(max_examples=50, deadline=None)
@given(instances())
def test_round_trip(net):
    again = loads(dumps(net))
    assert network_to_dict(again) == network_to_dict(net)
    assert dumps(again) == dumps(net)


@settings(max_examples=30, deadline=None)
@given(instances(), hs.randoms(use_true_random=False))
def test_order_of_lists_does_not_matter(net, rnd):
    doc = network_to_dict(net)
    shuffled = dict(doc)
    shuffled["connections"] = rnd.sample(doc["connections"], len(doc["connections"]))
    shuffled["equilibria"] = rnd.sample(doc["equilibria"], len(doc["equilibria"]))
    assert dumps(network_from_dict(shuffled)) == dumps(net)


@settings(max_examples=50, deadline=None)
@given(instances())
def test_roles_partition_coordinates(net):
    for j in net.ids:
        r = roles_at(net, j)
        parts = [r.radial, r.contracting, r.expanding, r.transverse]
        assert sum(len(p) for p in parts) == net.n
        assert frozenset().union(*parts) == set(range(1, net.n + 1))
