"""Scalable round-robin placement and the random-placement baseline.

The round-robin heuristic spreads chains across top-of-rack switches: each
chain starts one TOR after the previous chain's starting TOR, every VNF is
assigned to servers under the current TOR subject to a machine utilization
limit, traffic spills to additional instances and then to the next TOR when
capacity runs out, and the limit is raised stepwise when the whole network
is exhausted. Chains that still cannot be placed are left undeployed.

Switch capacity is not considered while placing (the utilization limit
governs machines only); capacity overloads found afterwards are repaired by
re-placing the most recently placed offending chain starting from another
TOR, undeploying it when no start works.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .solution import Provisioning, TOL, traffic_rates
from .topology import Topology, path
from .workload import ServiceChain, VnfCatalog, Workload

FRACTION_EPS = 1e-12


@dataclass(frozen=True)
class HeuristicConfig:
    initial_util_limit: float = 0.5
    limit_step: float = 0.1
    limit_max: float = 0.99
    chain_order: str = "priority-then-lambda"   # or "input-order"
    traffic_mode: str = "physical"

    def __post_init__(self):
        if not 0.0 < self.initial_util_limit <= self.limit_max < 1.0:
            raise ValueError(
                "need 0 < initial_util_limit <= limit_max < 1, got "
                f"{self.initial_util_limit} / {self.limit_max}"
            )
        if self.limit_step <= 0.0:
            raise ValueError(f"limit_step must be positive, got {self.limit_step}")
        if self.chain_order not in ("priority-then-lambda", "input-order"):
            raise ValueError(f"unknown chain_order {self.chain_order!r}")


@dataclass
class ChainOutcome:
    chain: str
    deployed: bool
    start_tor: str | None = None
    tors_visited: list[str] = field(default_factory=list)
    reason: str | None = None

    def to_document(self) -> dict:
        return {
            "chain": self.chain,
            "deployed": self.deployed,
            "start_tor": self.start_tor,
            "tors_visited": self.tors_visited,
            "reason": self.reason,
        }


@dataclass
class PlacementLog:
    method: str
    outcomes: list[ChainOutcome] = field(default_factory=list)
    limits_visited: list[float] = field(default_factory=list)

    def outcome(self, chain_id: str) -> ChainOutcome:
        for o in self.outcomes:
            if o.chain == chain_id:
                return o
        raise KeyError(chain_id)

    def deployment_rate(self) -> float:
        if not self.outcomes:
            return 1.0
        return sum(o.deployed for o in self.outcomes) / len(self.outcomes)

    def to_document(self) -> dict:
        return {
            "method": self.method,
            "outcomes": [o.to_document() for o in self.outcomes],
            "limits_visited": self.limits_visited,
            "deployment_rate": self.deployment_rate(),
        }


class _State:
    """Mutable placement state: hosted VNFs, per-server load, chain routing."""

    def __init__(self, t: Topology, catalog: VnfCatalog):
        self.t = t
        self.catalog = catalog
        self.host: dict[str, str | None] = {s: None for s in t.servers}
        self.load: dict[str, float] = {s: 0.0 for s in t.servers}
        self.cap: dict[str, float] = {s: 0.0 for s in t.servers}
        # per-chain applied loads for rollback: (server, rate, instantiated)
        self.applied: dict[str, list[tuple[str, float, bool]]] = {}
        self.assignment: dict[tuple[str, int, str], float] = {}
        self.transitions: dict[tuple[str, int, str, str], float] = {}
        self.placed_order: list[str] = []   # deployed chains, placement order
        self.on_instantiate = lambda server, vnf: None
        self.on_remove = lambda server, vnf: None

    def rate_for(self, server: str, vnf: str) -> float | None:
        return self.catalog.rate(self.t.server_type[server], vnf)

    def add_load(self, chain_id: str, server: str, vnf: str, rate: float):
        instantiated = False
        if self.host[server] is None:
            self.host[server] = vnf
            self.cap[server] = self.rate_for(server, vnf)
            self.on_instantiate(server, vnf)
            instantiated = True
        self.load[server] += rate
        self.applied.setdefault(chain_id, []).append((server, rate, instantiated))

    def rollback(self, chain_id: str):
        for server, rate, _ in reversed(self.applied.get(chain_id, ())):
            self.load[server] -= rate
            if self.load[server] <= FRACTION_EPS:
                self.load[server] = 0.0
                vnf = self.host[server]
                if vnf is not None:
                    self.on_remove(server, vnf)
                    self.host[server] = None
                    self.cap[server] = 0.0
        self.applied.pop(chain_id, None)
        for key in [k for k in self.assignment if k[0] == chain_id]:
            del self.assignment[key]
        for key in [k for k in self.transitions if k[0] == chain_id]:
            del self.transitions[key]
        if chain_id in self.placed_order:
            self.placed_order.remove(chain_id)

    def provisioning(self, deployed: dict[str, int]) -> Provisioning:
        placement = {s: v for s, v in self.host.items() if v is not None}
        return Provisioning(
            placement=placement,
            assignment=dict(self.assignment),
            transitions=dict(self.transitions),
            deployed=dict(deployed),
        )

    def record_routing(self, chain: ServiceChain, per_pos: list[dict[str, float]]):
        """Store assignment fractions plus product-form transition fractions."""
        c = chain.id
        for i, shares in enumerate(per_pos, 1):
            for s, f in shares.items():
                self.assignment[(c, i, s)] = f
        for i in range(1, chain.length):
            cur, nxt = per_pos[i - 1], per_pos[i]
            for k, fk in cur.items():
                for l, fl in nxt.items():
                    f = fk * fl
                    if f > FRACTION_EPS:
                        self.transitions[(c, i, k, l)] = f
        self.placed_order.append(c)


def _order_chains(w: Workload, order: str) -> list[ServiceChain]:
    if order == "input-order":
        return list(w.chains)
    return sorted(w.chains, key=lambda c: (-c.priority, -c.rate, c.id))


def _most_recent_offender(state: _State, w: Workload, node: str,
                          mode: str) -> str | None:
    """Most recently placed chain whose traffic reaches the given node."""
    if mode == "paper":
        # every deployed chain loads every node via the constant term
        return state.placed_order[-1] if state.placed_order else None
    t = state.t
    for c in reversed(state.placed_order):
        chain = w.chain(c)
        q = chain.length
        for i, s in ((i, s) for (cc, i, s), f in state.assignment.items()
                     if cc == c and f > 0.0):
            if i == 1 and node in path(t, t.root, s):
                return c
            if i == q and node in path(t, s, t.root):
                return c
        for (cc, i, k, l), f in state.transitions.items():
            if cc == c and f > 0.0 and node in path(t, k, l):
                return c
    return None


def _capacity_overload(state: _State, w: Workload, deployed: dict[str, int],
                       mode: str) -> str | None:
    """Node (switch or server) most over its processing rate, if any."""
    b = traffic_rates(state.t, w, state.provisioning(deployed), mode)
    worst, excess = None, TOL
    for n in state.t.switches:
        over = b[n] - state.t.mu[n]
        if over > excess:
            worst, excess = n, over
    for s in state.t.servers:
        over = b[s] - (state.cap[s] if state.host[s] is not None else 0.0)
        if over > excess:
            worst, excess = s, over
    return worst


class _TorPlacer:
    """Round-robin TOR scan with utilization-limited proportional splitting."""

    def __init__(self, state: _State):
        self.state = state
        self.tors = state.t.tors()
        if not self.tors:
            raise ValueError("topology has no TOR switch with servers")
        self.servers_by_tor = {
            tor: sorted(c for c in state.t.children[tor]
                        if state.t.kind[c] == "server")
            for tor in self.tors
        }
        self.tor_of = {
            s: tor for tor in self.tors for s in self.servers_by_tor[tor]
        }
        self.hosts: dict[tuple[str, str], list[str]] = {}
        self.free: dict[str, list[str]] = {
            tor: list(self.servers_by_tor[tor]) for tor in self.tors
        }
        state.on_instantiate = self._instantiated
        state.on_remove = self._removed

    def _instantiated(self, server: str, vnf: str):
        tor = self.tor_of[server]
        self.free[tor].remove(server)
        self.hosts.setdefault((tor, vnf), []).append(server)

    def _removed(self, server: str, vnf: str):
        tor = self.tor_of[server]
        self.hosts[(tor, vnf)].remove(server)
        self.free[tor].append(server)

    def _tor_candidates(self, tor: str, vnf: str, need: float,
                        limit: float) -> tuple[list[tuple[str, float]], float]:
        """Smallest preference-ordered server set whose headroom covers need."""
        state = self.state
        chosen: list[tuple[str, float]] = []
        total = 0.0
        hosting = self.hosts.get((tor, vnf), ())
        for s in sorted(hosting, key=lambda s: (state.load[s] / state.cap[s], s)):
            h = limit * state.cap[s] - state.load[s]
            if h > TOL * state.cap[s]:
                chosen.append((s, h))
                total += h
                if total >= need:
                    return chosen, total
        for s in sorted(self.free[tor]):
            rate = state.rate_for(s, vnf)
            if rate is None:
                continue
            chosen.append((s, limit * rate))
            total += limit * rate
            if total >= need:
                return chosen, total
        return chosen, total

    def try_place(self, chain: ServiceChain, start_idx: int,
                  limit: float) -> list[str] | None:
        """Place one chain at the limit; rolls back and returns None on failure."""
        state = self.state
        n_tors = len(self.tors)
        tor_idx = start_idx
        visited: list[str] = []
        per_pos: list[dict[str, float]] = []

        for i, vnf in enumerate(chain.sequence, 1):
            remaining = 1.0
            shares: dict[str, float] = {}
            scanned = 0
            while remaining > FRACTION_EPS and scanned <= n_tors:
                tor = self.tors[tor_idx]
                need = remaining * chain.rate
                chosen, total = self._tor_candidates(tor, vnf, need, limit)
                if chosen:
                    if not visited or visited[-1] != tor:
                        visited.append(tor)
                    amount = min(need, total)
                    left = amount
                    for idx, (s, h) in enumerate(chosen):
                        part = left if idx == len(chosen) - 1 else amount * h / total
                        part = min(part, left)
                        left -= part
                        if part <= FRACTION_EPS * chain.rate:
                            continue
                        state.add_load(chain.id, s, vnf, part)
                        frac = part / chain.rate
                        shares[s] = shares.get(s, 0.0) + frac
                        remaining -= frac
                if remaining > FRACTION_EPS:
                    tor_idx = (tor_idx + 1) % n_tors
                    scanned += 1
            if remaining > FRACTION_EPS:
                state.rollback(chain.id)
                return None
            # snap accumulated rounding so the fractions sum to exactly one
            drift = 1.0 - sum(shares.values())
            if drift != 0.0:
                top = max(shares, key=lambda s: (shares[s], s))
                shares[top] += drift
            per_pos.append(shares)

        state.record_routing(chain, per_pos)
        return visited


def _repair_overloads(state: _State, w: Workload, deployed: dict[str, int],
                      log: PlacementLog, mode: str,
                      retry=None):
    """Demote (and optionally re-place) recent chains until capacity holds."""
    while True:
        worst = _capacity_overload(state, w, deployed, mode)
        if worst is None:
            return
        culprit = _most_recent_offender(state, w, worst, mode)
        if culprit is None:
            return
        outcome = log.outcome(culprit)
        state.rollback(culprit)
        deployed[culprit] = 0
        if retry is not None and retry(culprit, outcome):
            deployed[culprit] = 1
        else:
            outcome.deployed = False
            outcome.reason = f"capacity exceeded at {worst}"


def round_robin_place(t: Topology, w: Workload, catalog: VnfCatalog,
                      cfg: HeuristicConfig = HeuristicConfig(),
                      ) -> tuple[Provisioning, PlacementLog]:
    """Deterministic round-robin placement across TORs with limit escalation."""
    state = _State(t, catalog)
    placer = _TorPlacer(state)
    log = PlacementLog(method="round-robin")
    limit = cfg.initial_util_limit
    log.limits_visited.append(limit)
    deployed: dict[str, int] = {}
    cursor = -1

    for chain in _order_chains(w, cfg.chain_order):
        cursor = (cursor + 1) % len(placer.tors)
        outcome = ChainOutcome(chain.id, deployed=False,
                               start_tor=placer.tors[cursor])
        log.outcomes.append(outcome)
        visited = placer.try_place(chain, cursor, limit)
        while visited is None and limit < cfg.limit_max - 1e-12:
            limit = min(limit + cfg.limit_step, cfg.limit_max)
            log.limits_visited.append(limit)
            visited = placer.try_place(chain, cursor, limit)
        if visited is None:
            deployed[chain.id] = 0
            outcome.reason = (
                f"insufficient server capacity for VNF sequence at limit {limit}"
            )
        else:
            deployed[chain.id] = 1
            outcome.deployed = True
            outcome.tors_visited = visited

    retries: dict[str, int] = {}

    def retry(chain_id: str, outcome: ChainOutcome) -> bool:
        tries = retries.get(chain_id, 0) + 1
        retries[chain_id] = tries
        if tries >= len(placer.tors):
            return False
        base = placer.tors.index(outcome.start_tor)
        idx = (base + tries) % len(placer.tors)
        visited = placer.try_place(w.chain(chain_id), idx, limit)
        if visited is None:
            return False
        outcome.start_tor = placer.tors[idx]
        outcome.tors_visited = visited
        return True

    _repair_overloads(state, w, deployed, log, cfg.traffic_mode, retry)
    log.outcomes.sort(key=lambda o: o.chain)
    return state.provisioning(deployed), log


def random_place(t: Topology, w: Workload, catalog: VnfCatalog, seed: int = 0,
                 max_tries: int = 64, traffic_mode: str = "physical",
                 ) -> tuple[Provisioning, PlacementLog]:
    """Uniform random whole-position placement baseline.

    Each position goes to a uniformly random server that already hosts the
    needed type or is empty; draws violating server capacity are rejected a
    bounded number of times before the chain is marked undeployed.
    """
    state = _State(t, catalog)
    rng = random.Random(seed)
    log = PlacementLog(method="random")
    deployed: dict[str, int] = {}

    empties = list(t.servers)
    empty_pos = {s: i for i, s in enumerate(empties)}
    hosts_by_vnf: dict[str, list[str]] = {}

    def on_instantiate(server, vnf):
        i = empty_pos.pop(server)
        last = empties.pop()
        if last != server:
            empties[i] = last
            empty_pos[last] = i
        hosts_by_vnf.setdefault(vnf, []).append(server)

    def on_remove(server, vnf):
        hosts_by_vnf[vnf].remove(server)
        empty_pos[server] = len(empties)
        empties.append(server)

    state.on_instantiate = on_instantiate
    state.on_remove = on_remove

    for chain in w.chains:
        outcome = ChainOutcome(chain.id, deployed=False)
        log.outcomes.append(outcome)
        servers_chosen: list[str] = []
        ok = True
        for vnf in chain.sequence:
            pool_hosts = hosts_by_vnf.get(vnf, [])
            placed_here = None
            for _ in range(max_tries):
                n = len(pool_hosts) + len(empties)
                if n == 0:
                    break
                k = rng.randrange(n)
                cand = pool_hosts[k] if k < len(pool_hosts) else empties[k - len(pool_hosts)]
                rate = state.cap[cand] if state.host[cand] is not None \
                    else state.rate_for(cand, vnf)
                if rate is None or state.load[cand] + chain.rate > rate + TOL:
                    continue
                placed_here = cand
                break
            if placed_here is None:
                ok = False
                outcome.reason = (
                    f"no server with capacity for {vnf} after {max_tries} tries"
                )
                break
            state.add_load(chain.id, placed_here, vnf, chain.rate)
            servers_chosen.append(placed_here)
        if not ok:
            state.rollback(chain.id)
            deployed[chain.id] = 0
            continue
        deployed[chain.id] = 1
        outcome.deployed = True
        per_pos = [{s: 1.0} for s in servers_chosen]
        state.record_routing(chain, per_pos)

    # the baseline drops offenders outright rather than re-placing them
    _repair_overloads(state, w, deployed, log, traffic_mode, retry=None)
    log.outcomes.sort(key=lambda o: o.chain)
    return state.provisioning(deployed), log
