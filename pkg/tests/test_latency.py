import math

import pytest

from sfcprov.latency import (
    EvalConfig,
    QueueParams,
    SaturationError,
    chain_latency,
    chain_latency_values,
    drop_probability,
    evaluate,
    expected_resends,
    node_latency,
    queue_curves,
)
from sfcprov.solution import Provisioning

from conftest import make_catalog, make_topology, make_workload, server, switch


def test_light_load_matches_infinite_buffer():
    # rho=0.5 with K=100: the buffer is effectively infinite
    tau = node_latency(QueueParams(10.0, 20.0, 100))
    assert tau == pytest.approx(1.0 / (20.0 - 10.0), rel=1e-12)


def test_zero_arrivals_is_pure_service():
    assert node_latency(QueueParams(0.0, 8.0, 100)) == pytest.approx(0.125)


def test_critical_load_limit():
    assert node_latency(QueueParams(10.0, 10.0, 100)) == pytest.approx(101 / 20)
    # inside the guard band the limit formula applies
    assert node_latency(QueueParams(10.0, 10.0 * (1 + 1e-9), 100)) == \
        pytest.approx(101 / 20)


def test_saturated_node_raises():
    with pytest.raises(SaturationError):
        node_latency(QueueParams(11.0, 10.0, 100))


def test_queue_params_validation():
    with pytest.raises(ValueError):
        QueueParams(1.0, 0.0, 10)
    with pytest.raises(ValueError):
        QueueParams(1.0, 2.0, 0)
    with pytest.raises(ValueError):
        QueueParams(-1.0, 2.0, 10)


def test_drop_probability_cases():
    assert drop_probability(QueueParams(0.0, 10.0, 5)) == 0.0
    # K=1 with rho=0.5 is the single-slot blocking probability 1/3
    assert drop_probability(QueueParams(10.0, 20.0, 1)) == pytest.approx(1 / 3)
    assert drop_probability(QueueParams(10.0, 10.0, 100)) == pytest.approx(1 / 101)
    # well defined above saturation too
    assert drop_probability(QueueParams(20.0, 10.0, 50)) == pytest.approx(0.5)


def test_expected_resends():
    assert expected_resends(0.0) == 1.0
    assert expected_resends(0.5) == 2.0
    assert expected_resends(2 / 7) == pytest.approx(1.4)
    assert expected_resends(1.0) == math.inf
    with pytest.raises(ValueError):
        expected_resends(-0.1)


def test_chain_latency_recursion():
    assert chain_latency_values([0.1], [0.0]) == pytest.approx(0.1)
    assert chain_latency_values([0.1, 0.1], [0.0, 0.5]) == pytest.approx(0.3)
    # no drops: the recursion collapses to the plain sum
    assert chain_latency_values([0.1] * 3, [0.0] * 3) == pytest.approx(0.3, abs=1e-12)


def test_chain_latency_from_params():
    q = QueueParams(10.0, 20.0, 100)
    three = chain_latency([q, q, q])
    assert three == pytest.approx(3 * node_latency(q), rel=1e-9)


def test_latency_strictly_increasing_in_load():
    taus = [node_latency(QueueParams(10.0, 10.0 / rho, 100))
            for rho in [x / 100 for x in range(5, 100, 5)]]
    assert all(a < b for a, b in zip(taus, taus[1:]))


def test_matches_unbounded_queue_for_huge_k():
    for rho in (0.3, 0.6, 0.9):
        q = QueueParams(10.0, 10.0 / rho, 10 ** 6)
        expected = 1.0 / (q.mu - q.lam)
        assert node_latency(q) == pytest.approx(expected, rel=1e-6)


def test_drop_monotone_in_rho_and_k():
    drops = [drop_probability(QueueParams(10.0, 10.0 / rho, 100))
             for rho in [x / 100 for x in range(5, 100, 5)]]
    assert all(a < b for a, b in zip(drops, drops[1:]))
    by_k = [drop_probability(QueueParams(10.0, 12.5, k)) for k in (1, 5, 20, 80)]
    assert all(a > b for a, b in zip(by_k, by_k[1:]))


def test_steep_growth_near_full_utilization():
    tau_half = node_latency(QueueParams(10.0, 20.0, 100))
    tau_high = node_latency(QueueParams(10.0, 10.0 / 0.99, 100))
    assert tau_high > 10 * tau_half


def test_evaluate_single_chain(chain_tree, one_vnf_catalog, one_chain_workload,
                               unit_provisioning):
    report = evaluate(chain_tree, one_chain_workload, one_vnf_catalog,
                      unit_provisioning)
    assert report.overall == pytest.approx(report.per_chain["c1"])
    # r, s, l, s, r with no drops at this load: nearly the sum of sojourns
    taus = report.node_tau
    expected = 2 * taus["r"] + 2 * taus["s"] + taus["l"]
    assert report.per_chain["c1"] == pytest.approx(expected, rel=1e-6)
    assert report.saturated == ()


def test_evaluate_symmetric_chains(fig_tree):
    catalog = make_catalog([("st", "f", 50.0)])
    w = make_workload([
        {"id": "c1", "vnfs": ["f"], "lambda": 5.0},
        {"id": "c2", "vnfs": ["f"], "lambda": 5.0},
    ], catalog)
    p = Provisioning(
        placement={"srv0": "f", "srv4": "f"},
        assignment={("c1", 1, "srv0"): 1.0, ("c2", 1, "srv4"): 1.0},
        deployed={"c1": 1, "c2": 1},
    )
    report = evaluate(fig_tree, w, catalog, p)
    assert report.per_chain["c1"] == pytest.approx(report.per_chain["c2"])
    assert report.overall == pytest.approx(report.per_chain["c1"])


def test_evaluate_flags_saturation(one_chain_workload):
    nodes = [switch("r", None, 100.0), switch("s", "r", 8.0), server("l", "s")]
    t = make_topology(nodes)     # switch s sees 10 pkts/s but serves only 8
    catalog = make_catalog([("st", "f", 50.0)])
    p = Provisioning(placement={"l": "f"}, assignment={("c1", 1, "l"): 1.0},
                     deployed={"c1": 1})
    report = evaluate(t, one_chain_workload, catalog, p)
    assert "s" in report.saturated
    assert math.isinf(report.per_chain["c1"])
    assert math.isinf(report.overall)
    doc = report.to_document()
    assert doc["per_chain"]["c1"] is None
    assert doc["unbounded_chains"] == ["c1"]


def test_evaluate_weights_deployed_only(chain_tree, one_vnf_catalog):
    catalog = make_catalog([("st", "f", 50.0)])
    w = make_workload([
        {"id": "c1", "vnfs": ["f"], "lambda": 5.0},
        {"id": "c2", "vnfs": ["f"], "lambda": 50.0},
    ], catalog)
    p = Provisioning(placement={"l": "f"}, assignment={("c1", 1, "l"): 1.0},
                     deployed={"c1": 1, "c2": 0})
    report = evaluate(chain_tree, w, catalog, p)
    assert set(report.per_chain) == {"c1"}
    assert report.overall == pytest.approx(report.per_chain["c1"])


def test_evaluate_nothing_deployed(chain_tree, one_vnf_catalog,
                                   one_chain_workload):
    p = Provisioning(deployed={"c1": 0})
    report = evaluate(chain_tree, one_chain_workload, one_vnf_catalog, p)
    assert report.per_chain == {}
    assert report.overall is None


def test_eval_config_k_resolution():
    cfg = EvalConfig(k_default=100, k_by_kind={"server": 10},
                     k_by_node={"n1": 5})
    assert cfg.k_for("n1", "server") == 5
    assert cfg.k_for("n2", "server") == 10
    assert cfg.k_for("n2", "switch") == 100


def test_queue_curves_shape():
    rows = queue_curves(lam=10.0, k=100)
    rhos = [r for r, _, _ in rows]
    assert rhos[0] == 0.05 and rhos[-1] == 0.99
    taus = [tau for _, tau, _ in rows]
    drops = [pk for _, _, pk in rows]
    assert all(a < b for a, b in zip(taus, taus[1:]))
    assert all(a < b for a, b in zip(drops, drops[1:]))
