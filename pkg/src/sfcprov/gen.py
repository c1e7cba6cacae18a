"""Seeded random instance generator for benchmarking and tests.

Produces three-level trees (root, aggregation switches, TORs, servers),
a total VNF rate catalog, and chain workloads whose aggregate demand is
scaled to a configurable fraction of worst-case server capacity, so a
feasible placement exists with high probability at a utilization limit
just under one. Switch rates scale with subtree leaf counts so switches
are loaded but not trivially the bottleneck.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .topology import Topology, load_topology
from .workload import VnfCatalog, Workload, load_catalog, load_workload


@dataclass(frozen=True)
class GenSpec:
    servers: int
    chains: int
    tors: int | None = None              # default: one TOR per 4 servers
    agg_switches: int | None = None      # default: one aggregation per 4 TORs
    max_chain_len: int = 4
    vnf_type_count: int | None = None    # default scales with server count
    server_type_count: int = 2
    lambda_range: tuple[float, float] = (1.0, 10.0)   # pre-scaling, log-uniform
    gamma_range: tuple[float, float] = (100.0, 200.0)
    demand_fraction: float = 0.35        # of total worst-case server capacity
    mu_headroom: float = 3.0             # switch rate over expected traffic share
    seed: int = 0

    def __post_init__(self):
        if self.servers < 1:
            raise ValueError("need at least one server")
        if self.chains < 1:
            raise ValueError("need at least one chain")
        if self.max_chain_len < 1:
            raise ValueError("max_chain_len must be at least 1")
        if self.n_tors > self.servers:
            raise ValueError(
                f"tors ({self.n_tors}) cannot exceed servers ({self.servers})"
            )
        if self.n_aggs > self.n_tors:
            raise ValueError(
                f"agg_switches ({self.n_aggs}) cannot exceed tors ({self.n_tors})"
            )
        if not 0.0 < self.demand_fraction:
            raise ValueError("demand_fraction must be positive")
        lo, hi = self.lambda_range
        if not 0 < lo <= hi:
            raise ValueError(f"bad lambda_range {self.lambda_range}")
        lo, hi = self.gamma_range
        if not 0 < lo <= hi:
            raise ValueError(f"bad gamma_range {self.gamma_range}")
        if not 1 <= self.server_type_count <= 26:
            raise ValueError("server_type_count must be in 1..26")

    @property
    def n_tors(self) -> int:
        return self.tors if self.tors is not None else max(1, self.servers // 4)

    @property
    def n_aggs(self) -> int:
        if self.agg_switches is not None:
            return self.agg_switches
        return max(1, self.n_tors // 4)

    @property
    def n_vnf_types(self) -> int:
        if self.vnf_type_count is not None:
            return self.vnf_type_count
        return min(8, max(2, self.servers // 2))


def generate_documents(spec: GenSpec) -> tuple[dict, dict, dict]:
    """Topology, catalog, and workload JSON documents for the spec."""
    rng = random.Random(spec.seed)
    n_srv, n_tor, n_agg = spec.servers, spec.n_tors, spec.n_aggs

    server_types = [f"st_{chr(ord('a') + i)}" for i in range(spec.server_type_count)]
    vnf_types = [f"vnf{i:02d}" for i in range(spec.n_vnf_types)]

    glo, ghi = spec.gamma_range
    gamma_rows = []
    gamma: dict[tuple[str, str], float] = {}
    for si, st in enumerate(server_types):
        factor = 1.0 + 0.25 * si
        for v in vnf_types:
            rate = rng.uniform(glo, ghi) * factor
            gamma[(st, v)] = rate
            gamma_rows.append({"server_type": st, "vnf": v, "rate": rate})
    catalog_doc = {
        "server_types": server_types,
        "vnf_types": vnf_types,
        "gamma": gamma_rows,
    }

    st_of_server = [server_types[i % len(server_types)] for i in range(n_srv)]

    llo, lhi = spec.lambda_range
    chains = []
    for ci in range(spec.chains):
        length = rng.randint(1, spec.max_chain_len)
        seq = [vnf_types[rng.randrange(len(vnf_types))] for _ in range(length)]
        lam = math.exp(rng.uniform(math.log(llo), math.log(lhi)))
        chains.append({"id": f"c{ci:04d}", "vnfs": seq, "lambda": lam,
                       "priority": 1.0})

    worst_capacity = sum(
        min(gamma[(st, v)] for v in vnf_types) for st in st_of_server
    )
    raw_demand = sum(c["lambda"] * len(c["vnfs"]) for c in chains)
    scale = spec.demand_fraction * worst_capacity / raw_demand
    for c in chains:
        c["lambda"] *= scale
    workload_doc = {"chains": chains}

    # traffic volume proxy: every packet visits its servers plus the two root legs
    volume = sum(c["lambda"] * (len(c["vnfs"]) + 2) for c in chains)
    tor_leaves = [0] * n_tor
    for i in range(n_srv):
        tor_leaves[i % n_tor] += 1
    agg_leaves = [0] * n_agg
    for j in range(n_tor):
        agg_leaves[j % n_agg] += tor_leaves[j]

    nodes = [{"id": "root", "kind": "switch", "parent": None,
              "mu": spec.mu_headroom * volume}]
    for a in range(n_agg):
        nodes.append({
            "id": f"agg{a:02d}", "kind": "switch", "parent": "root",
            "mu": spec.mu_headroom * volume * agg_leaves[a] / n_srv,
        })
    for j in range(n_tor):
        nodes.append({
            "id": f"tor{j:03d}", "kind": "switch", "parent": f"agg{j % n_agg:02d}",
            "mu": spec.mu_headroom * volume * tor_leaves[j] / n_srv,
        })
    for i in range(n_srv):
        nodes.append({
            "id": f"srv{i:04d}", "kind": "server", "parent": f"tor{i % n_tor:03d}",
            "server_type": st_of_server[i],
        })
    topology_doc = {"root": "root", "nodes": nodes}
    return topology_doc, catalog_doc, workload_doc


def generate(spec: GenSpec) -> tuple[Topology, VnfCatalog, Workload]:
    """Validated instance objects; deterministic for a fixed seed."""
    tdoc, cdoc, wdoc = generate_documents(spec)
    t = load_topology(tdoc)
    catalog = load_catalog(cdoc)
    w = load_workload(wdoc, catalog)
    return t, catalog, w
