import random

import pytest

from sfcprov.workload import load_catalog, load_workload

from conftest import make_catalog, make_workload


@pytest.fixture
def catalog():
    return make_catalog(
        [("st", v, 100.0) for v in ("lb", "nat", "fw")],
        vnf_types=("lb", "nat", "fw"),
    )


def test_single_chain_total_rate(catalog):
    w = make_workload([{"id": "c1", "vnfs": ["lb", "nat", "fw"], "lambda": 10.0}],
                      catalog)
    assert w.total_rate == 10.0
    assert w.chain("c1").sequence == ("lb", "nat", "fw")
    assert w.chain("c1").priority == 1.0


def test_ten_chains_sum(catalog):
    rng = random.Random(1)
    chains = []
    for i in range(10):
        length = rng.randint(1, 4)
        chains.append({
            "id": f"c{i}",
            "vnfs": [rng.choice(["lb", "nat", "fw"]) for _ in range(length)],
            "lambda": rng.uniform(1, 20),
        })
    w = make_workload(chains, catalog)
    assert w.total_rate == pytest.approx(sum(c["lambda"] for c in chains), abs=0)
    assert len(w.chains) == 10
    assert all(len(c.sequence) <= 4 for c in w.chains)


def test_total_rate_invariant_under_reorder(catalog):
    chains = [{"id": f"c{i}", "vnfs": ["lb"], "lambda": float(i + 1)}
              for i in range(5)]
    w1 = make_workload(chains, catalog)
    w2 = make_workload(list(reversed(chains)), catalog)
    assert w1.total_rate == w2.total_rate


def test_unknown_vnf_names_chain_and_vnf(catalog):
    with pytest.raises(ValueError, match="'c9'.*'dpi'"):
        make_workload([{"id": "c9", "vnfs": ["dpi"], "lambda": 1.0}], catalog)


def test_rejects_bad_chains(catalog):
    with pytest.raises(ValueError, match="non-positive lambda"):
        make_workload([{"id": "c1", "vnfs": ["lb"], "lambda": 0.0}], catalog)
    with pytest.raises(ValueError, match="empty"):
        make_workload([{"id": "c1", "vnfs": [], "lambda": 1.0}], catalog)
    with pytest.raises(ValueError, match="duplicate chain"):
        make_workload([
            {"id": "c1", "vnfs": ["lb"], "lambda": 1.0},
            {"id": "c1", "vnfs": ["fw"], "lambda": 2.0},
        ], catalog)
    with pytest.raises(ValueError, match="no chains"):
        load_workload({"chains": []}, catalog)


def test_repeated_vnfs_allowed(catalog):
    w = make_workload([{"id": "c1", "vnfs": ["fw", "fw", "fw"], "lambda": 1.0}],
                      catalog)
    assert w.chain("c1").length == 3


def test_priority_parsing(catalog):
    w = make_workload(
        [{"id": "c1", "vnfs": ["lb"], "lambda": 1.0, "priority": 3.5}], catalog)
    assert w.chain("c1").priority == 3.5
    with pytest.raises(ValueError, match="negative priority"):
        make_workload(
            [{"id": "c1", "vnfs": ["lb"], "lambda": 1.0, "priority": -1}], catalog)


def test_catalog_validation():
    with pytest.raises(ValueError, match="unknown server_type"):
        load_catalog({"server_types": ["st"], "vnf_types": ["f"],
                      "gamma": [{"server_type": "xx", "vnf": "f", "rate": 1.0}]})
    with pytest.raises(ValueError, match="unknown vnf"):
        load_catalog({"server_types": ["st"], "vnf_types": ["f"],
                      "gamma": [{"server_type": "st", "vnf": "g", "rate": 1.0}]})
    with pytest.raises(ValueError, match="must be positive"):
        load_catalog({"server_types": ["st"], "vnf_types": ["f"],
                      "gamma": [{"server_type": "st", "vnf": "f", "rate": 0.0}]})
    with pytest.raises(ValueError, match="duplicate gamma"):
        load_catalog({"server_types": ["st"], "vnf_types": ["f"],
                      "gamma": [{"server_type": "st", "vnf": "f", "rate": 1.0},
                                {"server_type": "st", "vnf": "f", "rate": 2.0}]})


def test_catalog_rates(catalog):
    assert catalog.rate("st", "lb") == 100.0
    assert catalog.rate("st", "missing") is None
    assert catalog.max_rate() == 100.0
    assert catalog.min_rate() == 100.0
