"""Efficient-frontier generation: trade-off points between servers and congestion.

Points come from two sources: weight sweeps of the exact solver (or any
solver backend honoring its interface), and heuristic runs on successively
smaller subnetworks. A Pareto filter keeps the non-dominated points in the
(servers used, max utilization) plane.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .heuristic import HeuristicConfig, round_robin_place
from .latency import EvalConfig, evaluate
from .mip import Budget, exact_solve
from .solution import compute_traffic
from .topology import Topology, subnetwork
from .workload import VnfCatalog, Workload

CSV_COLUMNS = ("method", "beta", "label", "servers_used", "rho_max",
               "expected_latency", "deployment_rate", "solve_time", "error")


@dataclass(frozen=True)
class FrontierPoint:
    method: str
    beta: float | None = None
    label: str = ""
    servers_used: int | None = None
    rho_max: float | None = None
    expected_latency: float | None = None
    deployment_rate: float | None = None
    solve_time: float | None = None
    error: str | None = None

    def to_document(self) -> dict:
        return {col: getattr(self, col) for col in CSV_COLUMNS}

    def csv_row(self) -> str:
        def cell(v):
            if v is None:
                return ""
            if isinstance(v, float):
                return repr(v)
            return str(v)

        return ",".join(cell(getattr(self, col)) for col in CSV_COLUMNS)


def points_to_csv(points: list[FrontierPoint]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    lines.extend(p.csv_row() for p in points)
    return "\n".join(lines) + "\n"


def sweep_beta(t: Topology, w: Workload, catalog: VnfCatalog,
               betas: list[float], backend="exact",
               budget: Budget = Budget(), mode: str = "physical",
               eval_config: EvalConfig | None = None) -> list[FrontierPoint]:
    """One solver point per weight; backend failures become failure records."""
    if eval_config is None:
        eval_config = EvalConfig(traffic_mode=mode)
    points = []
    for beta in betas:
        try:
            if backend == "exact":
                result, prov = exact_solve(t, w, catalog, beta, budget, mode)
                solve_time = result.wall_time
                if prov is None:
                    points.append(FrontierPoint(
                        method="exact", beta=beta, solve_time=solve_time,
                        error=f"solver status {result.status}"))
                    continue
                method = "exact"
            else:
                start = time.perf_counter()
                prov = backend(t, w, catalog, beta)
                solve_time = time.perf_counter() - start
                method = "mip"
            tp = compute_traffic(t, w, catalog, prov, mode)
            report = evaluate(t, w, catalog, prov, eval_config)
            deployed = sum(prov.deployed_flag(c.id) for c in w.chains)
            points.append(FrontierPoint(
                method=method, beta=beta, servers_used=tp.servers_used,
                rho_max=tp.rho_max, expected_latency=report.overall,
                deployment_rate=deployed / len(w.chains), solve_time=solve_time,
            ))
        except Exception as exc:                      # record and continue
            points.append(FrontierPoint(method=str(backend) if backend != "exact"
                                        else "exact", beta=beta, error=str(exc)))
    return points


def default_removal_plan(t: Topology) -> list[set[str]]:
    """Cumulatively drop aggregation switches left to right, keeping one."""
    aggs = t.aggregation_switches()
    plan: list[set[str]] = [set()]
    for count in range(1, len(aggs)):
        plan.append(set(aggs[:count]))
    return plan


def heuristic_frontier(t: Topology, w: Workload, catalog: VnfCatalog,
                       removal_plan: list[set[str]] | None = None,
                       cfg: HeuristicConfig = HeuristicConfig(),
                       eval_config: EvalConfig | None = None,
                       ) -> list[FrontierPoint]:
    """One heuristic point per subnetwork of the removal plan."""
    if removal_plan is None:
        removal_plan = default_removal_plan(t)
    if eval_config is None:
        eval_config = EvalConfig(traffic_mode=cfg.traffic_mode)
    points = []
    for idx, removed in enumerate(removal_plan):
        label = f"removed:{','.join(sorted(removed))}" if removed else "full"
        try:
            sub = subnetwork(t, removed)
            start = time.perf_counter()
            prov, log = round_robin_place(sub, w, catalog, cfg)
            solve_time = time.perf_counter() - start
            tp = compute_traffic(sub, w, catalog, prov, cfg.traffic_mode)
            report = evaluate(sub, w, catalog, prov, eval_config)
            points.append(FrontierPoint(
                method="heuristic", label=label, servers_used=tp.servers_used,
                rho_max=tp.rho_max, expected_latency=report.overall,
                deployment_rate=log.deployment_rate(), solve_time=solve_time,
            ))
        except Exception as exc:
            points.append(FrontierPoint(method="heuristic", label=label,
                                        error=str(exc)))
    return points


def pareto_filter(points: list[FrontierPoint]) -> list[FrontierPoint]:
    """Points not dominated in (servers_used, rho_max), both minimized."""
    valid = [p for p in points if p.servers_used is not None
             and p.rho_max is not None]

    def dominated(p: FrontierPoint) -> bool:
        return any(
            q.servers_used <= p.servers_used and q.rho_max <= p.rho_max
            and (q.servers_used < p.servers_used or q.rho_max < p.rho_max)
            for q in valid
        )

    kept = [p for p in valid if not dominated(p)]
    kept.sort(key=lambda p: (p.servers_used, p.rho_max))
    return kept
