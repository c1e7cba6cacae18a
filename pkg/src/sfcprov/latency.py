"""Analytic expected-latency evaluation with finite-buffer queues.

Each node is a single FIFO server with Poisson arrivals, exponential
service, and room for K packets (K-1 queued plus one in service). Arrivals
to a full node are dropped and retransmitted from the start of the node
sequence, so end-to-end chain latency follows a resend recursion over the
per-node sojourn times and drop probabilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .solution import Provisioning, compute_traffic, node_sequences, server_capacity
from .topology import Topology
from .workload import VnfCatalog, Workload

RHO_GUARD = 1e-6   # width of the band around utilization 1 using limit formulas


class SaturationError(ValueError):
    """Raised when a node's arrival rate is at or above its service rate."""


@dataclass(frozen=True)
class QueueParams:
    lam: float        # arrival rate, pkts/s
    mu: float         # service rate, pkts/s
    k: int = 100      # system capacity in packets

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError(f"service rate must be positive, got {self.mu}")
        if self.lam < 0:
            raise ValueError(f"arrival rate must be non-negative, got {self.lam}")
        if self.k < 1:
            raise ValueError(f"capacity must be at least 1, got {self.k}")

    @property
    def rho(self) -> float:
        return self.lam / self.mu


def _pow(rho: float, n: float) -> float:
    # log-domain power so large exponents underflow to 0 instead of raising
    if rho == 0.0:
        return 0.0
    return math.exp(n * math.log(rho))


def node_latency(q: QueueParams) -> float:
    """Mean sojourn time (queueing plus service) of an accepted packet."""
    if q.lam == 0.0:
        return 1.0 / q.mu
    rho = q.rho
    if abs(rho - 1.0) < RHO_GUARD:
        return (q.k + 1) / (2.0 * q.lam)
    if rho > 1.0:
        raise SaturationError(
            f"arrival rate {q.lam} is not below service rate {q.mu}"
        )
    k = q.k
    num = rho - (1.0 + k * (1.0 - rho)) * _pow(rho, k + 1)
    den = q.lam * (1.0 - rho) * (1.0 - _pow(rho, k))
    return num / den


def drop_probability(q: QueueParams) -> float:
    """Probability an arriving packet finds the node full and is dropped."""
    rho = q.rho
    if rho == 0.0:
        return 0.0
    if abs(rho - 1.0) < RHO_GUARD:
        return 1.0 / (q.k + 1)
    if rho < 1.0:
        return (1.0 - rho) * _pow(rho, q.k) / (1.0 - _pow(rho, q.k + 1))
    # above saturation the blocking probability is still well defined;
    # rescale by rho^-(k+1) to keep it finite in floating point
    return (rho - 1.0) / (rho - _pow(rho, -q.k))


def expected_resends(pk: float) -> float:
    """Expected number of attempts to get a packet past a node that drops
    with probability pk; unbounded (inf) when pk reaches 1."""
    if pk < 0.0:
        raise ValueError(f"drop probability must be non-negative, got {pk}")
    if pk >= 1.0:
        return math.inf
    return 1.0 / (1.0 - pk)


def chain_latency_values(taus: list[float], drop_probs: list[float]) -> float:
    """Resend recursion over given per-node sojourn times and drop chances.

    The first node's drop probability is unused: packets start there, and a
    drop at a later node restarts the journey from the first node.
    """
    if len(taus) != len(drop_probs):
        raise ValueError("taus and drop_probs must have equal length")
    if not taus:
        return 0.0
    total = taus[0]
    for tau, pk in zip(taus[1:], drop_probs[1:]):
        total = tau + expected_resends(pk) * total
    return total


def chain_latency(params: list[QueueParams]) -> float:
    """End-to-end expected latency over a node sequence."""
    taus = [node_latency(q) for q in params]
    pks = [drop_probability(q) for q in params]
    return chain_latency_values(taus, pks)


@dataclass(frozen=True)
class EvalConfig:
    k_default: int = 100
    k_by_kind: dict = field(default_factory=dict)    # "switch"/"server" -> K
    k_by_node: dict = field(default_factory=dict)    # node id -> K
    traffic_mode: str = "physical"

    def k_for(self, node: str, kind: str) -> int:
        if node in self.k_by_node:
            return self.k_by_node[node]
        return self.k_by_kind.get(kind, self.k_default)


@dataclass(frozen=True)
class LatencyReport:
    per_chain: dict            # chain -> E(T_c) seconds, inf when saturated
    overall: float | None      # traffic-weighted mean over deployed chains
    node_tau: dict             # node -> mean sojourn (inf when saturated)
    node_drop: dict            # node -> P(K)
    node_resends: dict         # node -> E(R)
    node_utilization: dict     # node -> rho_n
    saturated: tuple = ()      # nodes with utilization >= 1
    per_chain_halfwidth: dict = field(default_factory=dict)   # simulation only
    overall_halfwidth: float | None = None
    notes: tuple = ()

    def to_document(self) -> dict:
        def num(x):
            if x is None:
                return None
            return None if math.isinf(x) else x

        return {
            "per_chain": {c: num(v) for c, v in sorted(self.per_chain.items())},
            "overall": num(self.overall),
            "unbounded_chains": sorted(
                c for c, v in self.per_chain.items() if math.isinf(v)
            ),
            "node_tau": {n: num(v) for n, v in sorted(self.node_tau.items())},
            "node_drop": dict(sorted(self.node_drop.items())),
            "node_resends": {n: num(v) for n, v in sorted(self.node_resends.items())},
            "node_utilization": dict(sorted(self.node_utilization.items())),
            "saturated": sorted(self.saturated),
            "per_chain_halfwidth": dict(sorted(self.per_chain_halfwidth.items())),
            "overall_halfwidth": self.overall_halfwidth,
            "notes": list(self.notes),
        }

    def to_csv(self) -> str:
        lines = ["chain,latency"]
        for c, v in sorted(self.per_chain.items()):
            lines.append(f"{c},{'inf' if math.isinf(v) else repr(v)}")
        return "\n".join(lines) + "\n"


def _node_params(t: Topology, catalog: VnfCatalog, p: Provisioning,
                 b: dict, config: EvalConfig) -> dict[str, QueueParams]:
    params = {}
    for n in t.switches:
        params[n] = QueueParams(b[n], t.mu[n], config.k_for(n, "switch"))
    for l in t.servers:
        if l in p.placement:
            cap = server_capacity(t, catalog, p, l)
            params[l] = QueueParams(b[l], cap, config.k_for(l, "server"))
    return params


def evaluate(t: Topology, w: Workload, catalog: VnfCatalog, p: Provisioning,
             config: EvalConfig = EvalConfig()) -> LatencyReport:
    """Analytic latency report for a feasible provisioning."""
    tp = compute_traffic(t, w, catalog, p, config.traffic_mode)
    params = _node_params(t, catalog, p, tp.b, config)

    node_tau, node_drop, node_res, saturated = {}, {}, {}, []
    for n, q in params.items():
        node_drop[n] = drop_probability(q)
        node_res[n] = expected_resends(node_drop[n])
        try:
            node_tau[n] = node_latency(q)
        except SaturationError:
            node_tau[n] = math.inf
            saturated.append(n)

    sequences = node_sequences(t, w, p)
    per_chain: dict[str, float] = {}
    for chain in w.chains:
        if not p.deployed_flag(chain.id):
            continue
        total = 0.0
        for nodes, prob in sequences[chain.id]:
            taus = [node_tau[n] for n in nodes]
            if any(math.isinf(x) for x in taus):
                total = math.inf
                break
            pks = [node_drop[n] for n in nodes]
            total += prob * chain_latency_values(taus, pks)
        per_chain[chain.id] = total

    deployed_rate = sum(c.rate for c in w.chains if p.deployed_flag(c.id))
    if deployed_rate > 0:
        overall = sum(
            (c.rate / deployed_rate) * per_chain[c.id]
            for c in w.chains if p.deployed_flag(c.id)
        )
    else:
        overall = None

    return LatencyReport(
        per_chain=per_chain, overall=overall, node_tau=node_tau,
        node_drop=node_drop, node_resends=node_res,
        node_utilization={n: q.rho for n, q in params.items()},
        saturated=tuple(sorted(saturated)),
    )


def queue_curves(lam: float = 10.0, k: int = 100,
                 rhos: list[float] | None = None) -> list[tuple[float, float, float]]:
    """(utilization, sojourn, drop probability) rows for plot-ready curve files."""
    if rhos is None:
        rhos = [i / 100 for i in range(5, 100, 5)] + [0.99]
    rows = []
    for rho in rhos:
        q = QueueParams(lam, lam / rho, k)
        rows.append((rho, node_latency(q), drop_probability(q)))
    return rows
