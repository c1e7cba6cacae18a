"""Shared instance builders for the test suite."""

import pytest

from sfcprov.solution import Provisioning
from sfcprov.topology import load_topology
from sfcprov.workload import load_catalog, load_workload


def switch(node_id, parent, mu):
    return {"id": node_id, "kind": "switch", "parent": parent, "mu": mu}


def server(node_id, parent, server_type="st"):
    return {"id": node_id, "kind": "server", "parent": parent,
            "server_type": server_type}


def make_topology(nodes, root="r"):
    return load_topology({"root": root, "nodes": nodes})


def make_catalog(gamma_rows, server_types=("st",), vnf_types=("f",)):
    return load_catalog({
        "server_types": list(server_types),
        "vnf_types": list(vnf_types),
        "gamma": [
            {"server_type": s, "vnf": v, "rate": r} for s, v, r in gamma_rows
        ],
    })


def make_workload(chains, catalog):
    return load_workload({"chains": chains}, catalog)


@pytest.fixture
def chain_tree():
    """Smallest useful tree: root -> switch -> server."""
    return make_topology([
        switch("r", None, 100.0),
        switch("s", "r", 100.0),
        server("l", "s"),
    ])


@pytest.fixture
def fig_tree():
    """Three-level tree: root, two aggregations, four TORs, eight servers."""
    nodes = [switch("r", None, 4000.0)]
    for a in range(2):
        nodes.append(switch(f"agg{a}", "r", 2000.0))
    for j in range(4):
        nodes.append(switch(f"tor{j}", f"agg{j // 2}", 1000.0))
    for i in range(8):
        nodes.append(server(f"srv{i}", f"tor{i // 2}"))
    return make_topology(nodes)


@pytest.fixture
def one_vnf_catalog():
    return make_catalog([("st", "f", 50.0)])


@pytest.fixture
def one_chain_workload(one_vnf_catalog):
    return make_workload(
        [{"id": "c1", "vnfs": ["f"], "lambda": 5.0}], one_vnf_catalog)


@pytest.fixture
def unit_provisioning():
    """Chain c1's single VNF fully served by server l."""
    return Provisioning(
        placement={"l": "f"},
        assignment={("c1", 1, "l"): 1.0},
        transitions={},
        deployed={"c1": 1},
    )
