"""Provisioning solutions and the arithmetic shared by every method.

A Provisioning records which VNF each server hosts, the fraction of each
chain position's traffic served by each server, the transition fractions
between consecutive positions, and per-chain deployment flags. From it we
derive per-node traffic rates, utilizations, feasibility against the
constraint system (ids 9..19), and the weighted objective.

Traffic modes: the "paper" mode charges every non-root node a constant
term of lambda_c per deployed chain on top of the routed legs; the
"physical" default drops that constant for non-root nodes, since chain
traffic only enters and leaves the network at the root.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .topology import Topology, path
from .workload import VnfCatalog, Workload

TOL = 1e-6

TRAFFIC_MODES = ("physical", "paper")

AssignKey = tuple[str, int, str]            # (chain, i, server), i is 1-based
TransKey = tuple[str, int, str, str]        # (chain, i, from, to)


@dataclass
class Provisioning:
    placement: dict[str, str] = field(default_factory=dict)       # server -> vnf
    assignment: dict[AssignKey, float] = field(default_factory=dict)
    transitions: dict[TransKey, float] = field(default_factory=dict)
    deployed: dict[str, int] = field(default_factory=dict)        # chain -> 0|1

    def deployed_flag(self, chain_id: str) -> int:
        return self.deployed.get(chain_id, 1)

    def servers_used(self) -> int:
        return len(self.placement)

    def to_document(self) -> dict:
        return {
            "placement": [
                {"server": s, "vnf": v} for s, v in sorted(self.placement.items())
            ],
            "assignment": [
                {"chain": c, "i": i, "server": s, "fraction": f}
                for (c, i, s), f in sorted(self.assignment.items())
            ],
            "transitions": [
                {"chain": c, "i": i, "from": k, "to": l, "fraction": f}
                for (c, i, k, l), f in sorted(self.transitions.items())
            ],
            "deployed": [
                {"chain": c, "d": d} for c, d in sorted(self.deployed.items())
            ],
        }


def load_solution(document) -> Provisioning:
    """Parse a solution JSON document (text or parsed dict)."""
    if isinstance(document, str):
        document = json.loads(document)
    placement: dict[str, str] = {}
    for entry in document.get("placement", []):
        s = entry["server"]
        if s in placement:
            raise ValueError(
                f"constraint 9 violated in document: server {s!r} placed twice"
            )
        placement[s] = entry["vnf"]
    assignment = {
        (e["chain"], int(e["i"]), e["server"]): float(e["fraction"])
        for e in document.get("assignment", [])
    }
    transitions = {
        (e["chain"], int(e["i"]), e["from"], e["to"]): float(e["fraction"])
        for e in document.get("transitions", [])
    }
    deployed = {e["chain"]: int(e["d"]) for e in document.get("deployed", [])}
    return Provisioning(placement, assignment, transitions, deployed)


@dataclass(frozen=True)
class TrafficProfile:
    b: dict[str, float]                  # node -> pkts/s into the node
    rho_per_node: dict[str, float]
    rho_max: float
    servers_used: int


@dataclass(frozen=True)
class Violation:
    constraint: int
    where: tuple
    magnitude: float

    def to_document(self) -> dict:
        return {
            "constraint": self.constraint,
            "where": list(self.where),
            "magnitude": self.magnitude,
        }


@dataclass(frozen=True)
class FeasibilityReport:
    violations: tuple[Violation, ...]

    @property
    def feasible(self) -> bool:
        return not self.violations

    def constraints_hit(self) -> set[int]:
        return {v.constraint for v in self.violations}

    def to_document(self) -> dict:
        return {
            "feasible": self.feasible,
            "violations": [v.to_document() for v in self.violations],
        }


def _check_ids(t: Topology, w: Workload, p: Provisioning) -> None:
    chain_ids = {c.id for c in w.chains}
    servers = set(t.servers)
    for s in p.placement:
        if s not in servers:
            raise ValueError(f"placement references unknown server {s!r}")
    for (c, i, s) in p.assignment:
        if c not in chain_ids:
            raise ValueError(f"assignment references unknown chain {c!r}")
        if s not in servers:
            raise ValueError(f"assignment references unknown server {s!r}")
        if not 1 <= i <= w.chain(c).length:
            raise ValueError(f"assignment for chain {c!r} has position {i} out of range")
    for (c, i, k, l) in p.transitions:
        if c not in chain_ids:
            raise ValueError(f"transition references unknown chain {c!r}")
        if k not in servers or l not in servers:
            raise ValueError(f"transition for chain {c!r} references unknown server")
        if not 1 <= i < w.chain(c).length:
            raise ValueError(f"transition for chain {c!r} has position {i} out of range")
    for c in p.deployed:
        if c not in chain_ids:
            raise ValueError(f"deployment flag references unknown chain {c!r}")


def traffic_rates(t: Topology, w: Workload, p: Provisioning,
                  mode: str = "physical") -> dict[str, float]:
    """Per-node traffic rate b_k implied by the assignment and transitions."""
    if mode not in TRAFFIC_MODES:
        raise ValueError(f"unknown traffic mode {mode!r}")
    _check_ids(t, w, p)
    b = {n: 0.0 for n in t.kind}
    root = t.root

    by_chain_pos: dict[tuple[str, int], list[tuple[str, float]]] = {}
    for (c, i, s), f in p.assignment.items():
        if f > 0.0:
            by_chain_pos.setdefault((c, i), []).append((s, f))

    const_total = 0.0
    for chain in w.chains:
        lam = chain.rate
        const_total += lam * p.deployed_flag(chain.id)
        q = chain.length
        for s, f in by_chain_pos.get((chain.id, 1), ()):       # root -> first VNF
            for n in path(t, root, s):
                b[n] += lam * f
        for s, f in by_chain_pos.get((chain.id, q), ()):       # last VNF -> root
            for n in path(t, s, root):
                b[n] += lam * f
    for (c, i, k, l), f in p.transitions.items():              # consecutive VNFs
        if f > 0.0:
            lam = w.chain(c).rate
            for n in path(t, k, l):
                b[n] += lam * f

    b[root] += const_total
    if mode == "paper":
        for n in b:
            if n != root:
                b[n] += const_total
    return b


def server_capacity(t: Topology, catalog: VnfCatalog, p: Provisioning,
                    server: str) -> float:
    """Available processing rate at a server: gamma of the hosted VNF, 0 if empty."""
    v = p.placement.get(server)
    if v is None:
        return 0.0
    rate = catalog.rate(t.server_type[server], v)
    if rate is None:
        raise ValueError(
            f"no gamma rate defined for VNF {v!r} on server type "
            f"{t.server_type[server]!r} (server {server!r})"
        )
    return rate


def compute_traffic(t: Topology, w: Workload, catalog: VnfCatalog,
                    p: Provisioning, mode: str = "physical") -> TrafficProfile:
    """Traffic rates plus utilizations; strict about servers lacking a VNF."""
    b = traffic_rates(t, w, p, mode)
    rho: dict[str, float] = {}
    for n in t.switches:
        rho[n] = b[n] / t.mu[n]
    for l in t.servers:
        if l in p.placement:
            rho[l] = b[l] / server_capacity(t, catalog, p, l)
        elif b[l] > TOL:
            raise ValueError(f"server {l!r} carries traffic but hosts no VNF")
        else:
            rho[l] = 0.0
    rho_max = max(rho.values()) if rho else 0.0
    return TrafficProfile(b=b, rho_per_node=rho, rho_max=rho_max,
                          servers_used=p.servers_used())


def check_feasibility(t: Topology, w: Workload, catalog: VnfCatalog,
                      p: Provisioning, mode: str = "physical") -> FeasibilityReport:
    """Report every violated constraint by id (9..19); empty report means feasible."""
    _check_ids(t, w, p)
    violations: list[Violation] = []

    def hit(cid: int, where: tuple, magnitude: float):
        violations.append(Violation(cid, where, magnitude))

    y_by_chain: dict[str, list[tuple[int, str, float]]] = {}
    for (c, i, s), y in p.assignment.items():
        y_by_chain.setdefault(c, []).append((i, s, y))
    z_by_chain: dict[str, list[tuple[int, str, str, float]]] = {}
    for (c, i, k, l), z in p.transitions.items():
        z_by_chain.setdefault(c, []).append((i, k, l, z))

    for chain in w.chains:
        c, q = chain.id, chain.length
        d = p.deployed_flag(c)
        ysum = {i: 0.0 for i in range(1, q + 1)}
        for i, s, y in y_by_chain.get(c, ()):
            ysum[i] += y
            # traffic may only go to a server hosting the position's VNF type
            if y > TOL and p.placement.get(s) != chain.sequence[i - 1]:
                hit(10, (c, i, s), y)
        for i in range(1, q + 1):
            if abs(ysum[i] - d) > TOL:
                hit(11, (c, i), abs(ysum[i] - d))
        zsum = {i: 0.0 for i in range(1, q)}
        flow_in: dict[str, float] = {}
        flow_out: dict[str, float] = {}
        for i, k, l, z in z_by_chain.get(c, ()):
            zsum[i] += z
            flow_out[k] = flow_out.get(k, 0.0) + z
            flow_in[l] = flow_in.get(l, 0.0) + z
            yk = p.assignment.get((c, i, k), 0.0)
            yl = p.assignment.get((c, i + 1, l), 0.0)
            if z > yk + TOL:
                hit(12, (c, i, k, l), z - yk)
            if z > yl + TOL:
                hit(13, (c, i, k, l), z - yl)
        for i in range(1, q):
            if abs(zsum[i] - d) > TOL:
                hit(14, (c, i), abs(zsum[i] - d))
        # conservation at each server: first-position inflow plus transition
        # inflow equals transition outflow plus last-position outflow
        touched = set(flow_in) | set(flow_out)
        for i, s, y in y_by_chain.get(c, ()):
            if i == 1 or i == q:
                touched.add(s)
        for k in sorted(touched):
            lhs = p.assignment.get((c, 1, k), 0.0) + flow_in.get(k, 0.0)
            rhs = flow_out.get(k, 0.0) + p.assignment.get((c, q, k), 0.0)
            if abs(lhs - rhs) > TOL:
                hit(15, (c, k), abs(lhs - rhs))

    b = traffic_rates(t, w, p, mode)
    for n in t.switches:
        if b[n] > t.mu[n] + TOL:
            hit(18, (n,), b[n] - t.mu[n])
    for l in t.servers:
        cap = server_capacity(t, catalog, p, l)
        if b[l] > cap + TOL:
            hit(19, (l,), b[l] - cap)

    violations.sort(key=lambda v: (v.constraint, v.where))
    return FeasibilityReport(tuple(violations))


def objective(p: Provisioning, tp: TrafficProfile, beta: float,
              server_count: int) -> float:
    """Weighted trade-off between congestion and server usage."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must be in [0, 1], got {beta}")
    if server_count <= 0:
        raise ValueError("server_count must be positive")
    return (1.0 - beta) * tp.rho_max + beta * (tp.servers_used / server_count)


def node_sequences(t: Topology, w: Workload, p: Provisioning,
                   ) -> dict[str, list[tuple[list[str], float]]]:
    """Realized end-to-end node sequences per deployed chain, with probabilities.

    A chain's traffic enters at the root, visits one server per position, and
    returns to the root. Split flows are decomposed hop by hop: the chance of
    continuing to server l given the packet is at server k for position i is
    the transition fraction normalized by the assignment fraction at k.
    """
    _check_ids(t, w, p)
    out: dict[str, list[tuple[list[str], float]]] = {}
    root = t.root
    for chain in w.chains:
        c, q = chain.id, chain.length
        if not p.deployed_flag(c):
            continue
        for (cc, i, k, l), z in p.transitions.items():
            if cc == c and z > TOL and p.assignment.get((c, i, k), 0.0) <= TOL:
                raise ValueError(
                    f"chain {c!r} position {i}: transition mass from {k!r} "
                    f"with zero assignment (normalization failure)"
                )
        supports = []
        for i in range(1, q + 1):
            sup = sorted(
                s for s in t.servers if p.assignment.get((c, i, s), 0.0) > TOL
            )
            supports.append(sup)
        paths: list[tuple[list[str], float]] = []

        def walk(i: int, servers_so_far: list[str], prob: float):
            if i > q:
                nodes = [root]
                prev = root
                for s in servers_so_far:
                    nodes.extend(path(t, prev, s))
                    prev = s
                nodes.extend(path(t, prev, root))
                paths.append((nodes, prob))
                return
            if i == 1:
                for s in supports[0]:
                    walk(2, [s], prob * p.assignment[(c, 1, s)])
                return
            k = servers_so_far[-1]
            yk = p.assignment.get((c, i - 1, k), 0.0)
            for s in supports[i - 1]:
                z = p.transitions.get((c, i - 1, k, s), 0.0)
                if z > TOL:
                    walk(i + 1, servers_so_far + [s], prob * z / yk)

        walk(1, [], 1.0)
        out[c] = paths
    return out
