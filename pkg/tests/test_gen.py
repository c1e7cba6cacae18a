import json

import pytest

from sfcprov.gen import GenSpec, generate, generate_documents
from sfcprov.heuristic import round_robin_place
from sfcprov.solution import check_feasibility


def test_same_seed_same_documents():
    spec = GenSpec(servers=16, chains=8, seed=5)
    docs1 = generate_documents(spec)
    docs2 = generate_documents(spec)
    assert json.dumps(docs1) == json.dumps(docs2)


def test_different_seed_different_documents():
    a = generate_documents(GenSpec(servers=16, chains=8, seed=5))
    b = generate_documents(GenSpec(servers=16, chains=8, seed=6))
    assert json.dumps(a) != json.dumps(b)


def test_small_instance_shape():
    t, catalog, w = generate(GenSpec(servers=8, chains=4, seed=1))
    assert len(t.servers) == 8
    assert len(w.chains) == 4
    assert w.total_rate == pytest.approx(sum(c.rate for c in w.chains))
    assert all(1 <= c.length <= 4 for c in w.chains)


def test_spec_validation():
    with pytest.raises(ValueError):
        GenSpec(servers=0, chains=1)
    with pytest.raises(ValueError):
        GenSpec(servers=4, chains=0)
    with pytest.raises(ValueError):
        GenSpec(servers=4, chains=1, tors=8)
    with pytest.raises(ValueError):
        GenSpec(servers=8, chains=1, tors=2, agg_switches=4)
    with pytest.raises(ValueError):
        GenSpec(servers=8, chains=1, max_chain_len=0)
    with pytest.raises(ValueError):
        GenSpec(servers=8, chains=1, lambda_range=(5.0, 1.0))


def test_generated_instances_validate_and_deploy():
    # generated demand must leave room for a full deployment
    for seed in range(6):
        t, catalog, w = generate(GenSpec(servers=16, chains=8, seed=seed))
        prov, log = round_robin_place(t, w, catalog)
        assert log.deployment_rate() == 1.0, f"seed {seed}"
        assert check_feasibility(t, w, catalog, prov).feasible


def test_demand_scaled_to_fraction():
    spec = GenSpec(servers=8, chains=4, seed=9, demand_fraction=0.2)
    t, catalog, w = generate(spec)
    worst_capacity = sum(
        min(catalog.rate(t.server_type[l], v) for v in catalog.vnf_types)
        for l in t.servers
    )
    demand = sum(c.rate * c.length for c in w.chains)
    assert demand == pytest.approx(0.2 * worst_capacity, rel=1e-9)


def test_switch_rates_ordered_by_level():
    t, _, _ = generate(GenSpec(servers=64, chains=8, seed=2))
    for tor in t.tors():
        agg = t.parent[tor]
        assert t.mu[tor] <= t.mu[agg] <= t.mu[t.root]


def test_three_level_structure():
    t, _, _ = generate(GenSpec(servers=32, tors=8, agg_switches=2, chains=4,
                               seed=3))
    assert len(t.aggregation_switches()) == 2
    assert len(t.tors()) == 8
    for s in t.servers:
        assert t.depth[s] == 3


def test_large_scale_generation_is_fast():
    t, catalog, w = generate(GenSpec(servers=1024, chains=256, seed=4))
    assert len(t.servers) == 1024
    assert len(w.chains) == 256
