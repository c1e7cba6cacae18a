import pytest

from sfcprov.gen import GenSpec, generate
from sfcprov.heuristic import (
    HeuristicConfig,
    random_place,
    round_robin_place,
)
from sfcprov.mip import Budget, exact_solve
from sfcprov.solution import check_feasibility, compute_traffic

from conftest import make_catalog, make_topology, make_workload, server, switch


def two_tor_topology(mu=10_000.0):
    return make_topology([
        switch("r", None, mu),
        switch("tor0", "r", mu), switch("tor1", "r", mu),
        server("s00", "tor0"), server("s01", "tor0"),
        server("s10", "tor1"), server("s11", "tor1"),
    ])


def test_config_validation():
    with pytest.raises(ValueError):
        HeuristicConfig(initial_util_limit=0.0)
    with pytest.raises(ValueError):
        HeuristicConfig(limit_max=1.0)
    with pytest.raises(ValueError):
        HeuristicConfig(initial_util_limit=0.8, limit_max=0.5)
    with pytest.raises(ValueError):
        HeuristicConfig(limit_step=0.0)
    with pytest.raises(ValueError):
        HeuristicConfig(chain_order="by-vibes")


def test_round_robin_spreads_chains_across_tors():
    t = two_tor_topology()
    catalog = make_catalog([("st", "f", 100.0)])
    w = make_workload([
        {"id": "c1", "vnfs": ["f"], "lambda": 10.0},
        {"id": "c2", "vnfs": ["f"], "lambda": 10.0},
    ], catalog)
    prov, log = round_robin_place(t, w, catalog)
    assert log.deployment_rate() == 1.0
    tor_of_chain = {}
    for (c, i, s), f in prov.assignment.items():
        tor_of_chain.setdefault(c, set()).add("tor0" if s.startswith("s0") else "tor1")
    assert tor_of_chain["c1"] != tor_of_chain["c2"]
    assert log.outcome("c1").start_tor != log.outcome("c2").start_tor


def test_impossible_chain_left_undeployed():
    t = make_topology([switch("r", None, 1000.0), switch("tor", "r", 1000.0),
                       server("s", "tor")])
    catalog = make_catalog([("st", "f", 10.0)])
    w = make_workload([{"id": "c1", "vnfs": ["f"], "lambda": 50.0}], catalog)
    prov, log = round_robin_place(t, w, catalog)
    assert prov.deployed == {"c1": 0}
    assert prov.assignment == {}
    assert prov.placement == {}
    assert "insufficient" in log.outcome("c1").reason
    assert check_feasibility(t, w, catalog, prov).feasible


def test_oversized_demand_splits_across_instances():
    t = two_tor_topology()
    catalog = make_catalog([("st", "f", 100.0)])
    # one chain needing 80 pkts/s: over one server's 0.5 limit, under two
    w = make_workload([{"id": "c1", "vnfs": ["f"], "lambda": 80.0}], catalog)
    prov, log = round_robin_place(t, w, catalog)
    assert log.deployment_rate() == 1.0
    shares = {s: f for (c, i, s), f in prov.assignment.items()}
    assert len(shares) == 2
    # both instances were empty, so the proportional split is even
    assert sorted(shares.values()) == pytest.approx([0.5, 0.5])
    assert check_feasibility(t, w, catalog, prov).feasible


def test_limit_escalation_is_monotone():
    t = make_topology([switch("r", None, 1000.0), switch("tor", "r", 1000.0),
                       server("s", "tor")])
    catalog = make_catalog([("st", "f", 100.0)])
    w = make_workload([{"id": "c1", "vnfs": ["f"], "lambda": 65.0}], catalog)
    prov, log = round_robin_place(t, w, catalog)
    assert prov.deployed == {"c1": 1}
    assert log.limits_visited == pytest.approx([0.5, 0.6, 0.7])
    assert all(a < b for a, b in
               zip(log.limits_visited, log.limits_visited[1:]))
    assert log.limits_visited[-1] <= 0.99


def test_limit_capped_at_max():
    t = make_topology([switch("r", None, 1000.0), switch("tor", "r", 1000.0),
                       server("s", "tor")])
    catalog = make_catalog([("st", "f", 100.0)])
    w = make_workload([{"id": "c1", "vnfs": ["f"], "lambda": 99.5}], catalog)
    prov, log = round_robin_place(t, w, catalog)
    assert prov.deployed == {"c1": 0}
    assert log.limits_visited[-1] == pytest.approx(0.99)


def test_round_robin_is_deterministic():
    t, catalog, w = generate(GenSpec(servers=16, chains=8, seed=21))
    p1, log1 = round_robin_place(t, w, catalog)
    p2, log2 = round_robin_place(t, w, catalog)
    assert p1 == p2
    assert log1.to_document() == log2.to_document()


def test_instance_reuse_before_new_server():
    t = two_tor_topology()
    catalog = make_catalog([("st", "f", 100.0)])
    w = make_workload([
        {"id": "c1", "vnfs": ["f"], "lambda": 10.0},
        {"id": "c2", "vnfs": ["f"], "lambda": 10.0},
        {"id": "c3", "vnfs": ["f"], "lambda": 10.0},
    ], catalog)
    prov, _ = round_robin_place(t, w, catalog)
    # chain 3 lands on tor0 again and reuses chain 1's instance
    assert prov.servers_used() == 2


def test_switch_capacity_repair_demotes_or_moves():
    # tor0 is too slow to carry even one chain; the repair must move traffic
    t = make_topology([
        switch("r", None, 10_000.0),
        switch("tor0", "r", 15.0), switch("tor1", "r", 10_000.0),
        server("s00", "tor0"), server("s01", "tor0"),
        server("s10", "tor1"), server("s11", "tor1"),
    ])
    catalog = make_catalog([("st", "f", 100.0)])
    w = make_workload([
        {"id": "c1", "vnfs": ["f"], "lambda": 10.0},
        {"id": "c2", "vnfs": ["f"], "lambda": 10.0},
    ], catalog)
    prov, log = round_robin_place(t, w, catalog)
    report = check_feasibility(t, w, catalog, prov)
    assert report.feasible
    assert log.deployment_rate() == 1.0
    used_tors = {s[:3] for s in prov.placement}
    assert used_tors == {"s10"[:3]} or all(s.startswith("s1") for s in prov.placement)


def test_both_methods_feasible_both_modes():
    for seed in (0, 1, 2):
        t, catalog, w = generate(GenSpec(servers=8, chains=4, seed=seed))
        for mode in ("physical", "paper"):
            cfg = HeuristicConfig(traffic_mode=mode)
            prov, _ = round_robin_place(t, w, catalog, cfg)
            assert check_feasibility(t, w, catalog, prov, mode).feasible, \
                f"round-robin seed={seed} mode={mode}"
            rprov, _ = random_place(t, w, catalog, seed=seed, traffic_mode=mode)
            assert check_feasibility(t, w, catalog, rprov, mode).feasible, \
                f"random seed={seed} mode={mode}"


def test_random_place_deterministic_per_seed():
    t, catalog, w = generate(GenSpec(servers=8, chains=4, seed=13))
    p1, log1 = random_place(t, w, catalog, seed=99)
    p2, log2 = random_place(t, w, catalog, seed=99)
    assert p1 == p2
    assert log1.to_document() == log2.to_document()
    p3, _ = random_place(t, w, catalog, seed=100)
    assert p3 != p1 or True      # different seed may coincide on tiny instances


def test_random_place_ample_capacity_deploys():
    t = make_topology([switch("r", None, 1000.0), switch("tor", "r", 1000.0),
                       server("s", "tor")])
    catalog = make_catalog([("st", "f", 100.0)])
    w = make_workload([{"id": "c1", "vnfs": ["f"], "lambda": 5.0}], catalog)
    prov, log = random_place(t, w, catalog, seed=0)
    assert log.deployment_rate() == 1.0
    assert prov.assignment == {("c1", 1, "s"): 1.0}


def test_random_place_rolls_back_failed_chain():
    t = make_topology([switch("r", None, 1000.0), switch("tor", "r", 1000.0),
                       server("s", "tor")])
    catalog = make_catalog([("st", "f", 10.0), ("st", "g", 10.0)],
                           vnf_types=("f", "g"))
    # second position cannot fit anywhere: chain must vanish entirely
    w = make_workload([{"id": "c1", "vnfs": ["f", "g"], "lambda": 5.0}], catalog)
    prov, log = random_place(t, w, catalog, seed=0)
    assert prov.deployed == {"c1": 0}
    assert prov.assignment == {} and prov.placement == {}
    assert check_feasibility(t, w, catalog, prov).feasible


def test_random_baseline_deploys_less_under_pressure():
    # tight demand with few types: whole-position random placement cannot
    # split oversized chains, so its success rate falls below round-robin's
    rr_rates, random_rates = [], []
    for inst_seed in range(4):
        t, catalog, w = generate(GenSpec(servers=16, chains=10, seed=inst_seed,
                                         vnf_type_count=3, demand_fraction=0.8))
        _, rr_log = round_robin_place(t, w, catalog)
        rr_rates.append(rr_log.deployment_rate())
        for seed in range(5):
            _, r_log = random_place(t, w, catalog, seed=seed)
            random_rates.append(r_log.deployment_rate())
    rr_mean = sum(rr_rates) / len(rr_rates)
    random_mean = sum(random_rates) / len(random_rates)
    assert random_mean < rr_mean


def test_heuristic_not_below_exact_at_equal_budget():
    # low demand keeps the heuristic unsplit, so the unsplit optimum applies
    t, catalog, w = generate(GenSpec(servers=4, tors=2, chains=2,
                                     max_chain_len=2, seed=31,
                                     demand_fraction=0.08,
                                     lambda_range=(1.0, 3.0)))
    prov, _ = round_robin_place(t, w, catalog)
    assert all(f == 1.0 for f in prov.assignment.values())
    tp = compute_traffic(t, w, catalog, prov)
    result, best = exact_solve(t, w, catalog, beta=0.0,
                               budget=Budget(max_servers=tp.servers_used))
    assert result.status == "optimal"
    best_tp = compute_traffic(t, w, catalog, best)
    assert tp.rho_max >= best_tp.rho_max - 1e-9
