"""Discrete-event simulation oracle for the queueing latency model.

Per-node finite-buffer FIFO queues are simulated event by event under
Poisson arrivals and exponential service. End-to-end chain latency is then
measured by tagged packets walking the chain's node sequence, drawing each
node experience from that node's simulated queue, and restarting from the
first node whenever a drop occurs. Retransmissions do not add load at the
nodes, matching the analytic model's assumptions.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .latency import EvalConfig, LatencyReport, _node_params
from .solution import Provisioning, compute_traffic, node_sequences
from .topology import Topology
from .workload import VnfCatalog, Workload

SATURATED_DROP = 0.999      # empirical drop rate treated as a saturated node
WALK_VISIT_CAP = 1_000_000  # node visits per tagged packet before giving up


@dataclass(frozen=True)
class QueueSimStats:
    arrivals: int
    accepted: int
    drops: int
    mean_sojourn: float
    drop_rate: float
    pool: np.ndarray    # subsample of accepted sojourn times


@dataclass(frozen=True)
class SimHorizon:
    packets_per_node: int = 200_000
    walks_per_chain: int = 50_000
    pool_size: int = 100_000
    warmup: int | None = None     # arrivals discarded before counting; auto if None
    seed: int = 0


def simulate_mm1k(lam: float, mu: float, k: int, packets: int,
                  rng: np.random.Generator | None = None, seed: int = 0,
                  warmup: int | None = None, pool_size: int = 100_000,
                  ) -> QueueSimStats:
    """Simulate one finite-buffer FIFO queue and collect sojourn/drop stats."""
    if mu <= 0 or k < 1 or packets < 1:
        raise ValueError("need mu > 0, k >= 1, packets >= 1")
    if rng is None:
        rng = np.random.default_rng(seed)
    if warmup is None:
        warmup = min(packets // 20, 50_000)
    if lam == 0.0:
        # empty system: sojourn is pure service time
        pool = rng.exponential(1.0 / mu, min(packets, pool_size))
        return QueueSimStats(0, 0, 0, float(pool.mean()), 0.0, pool)

    stride = max(1, (packets - warmup) // pool_size)
    in_system: deque[float] = deque()     # departure times of packets in the node
    t = 0.0
    arrivals = accepted = drops = 0
    sojourn_sum = 0.0
    pool_vals: list[float] = []
    seen = 0
    chunk = 262_144
    remaining = packets
    while remaining > 0:
        n = min(chunk, remaining)
        remaining -= n
        inter = rng.exponential(1.0 / lam, n)
        svc = rng.exponential(1.0 / mu, n)
        for j in range(n):
            t += inter[j]
            while in_system and in_system[0] <= t:
                in_system.popleft()
            seen += 1
            counted = seen > warmup
            if counted:
                arrivals += 1
            if len(in_system) >= k:
                if counted:
                    drops += 1
                continue
            dep = (in_system[-1] if in_system else t) + svc[j]
            in_system.append(dep)
            if counted:
                accepted += 1
                s = dep - t
                sojourn_sum += s
                if accepted % stride == 0:
                    pool_vals.append(s)

    mean = sojourn_sum / accepted if accepted else math.nan
    pool = np.asarray(pool_vals if pool_vals else [mean], dtype=float)
    return QueueSimStats(arrivals, accepted, drops, mean,
                         drops / arrivals if arrivals else 0.0, pool)


class NodeSampler:
    """Batched (drop, sojourn) experience draws for one node."""

    def __init__(self, drop_prob: float, pool: np.ndarray,
                 rng: np.random.Generator, batch: int = 8192):
        self.drop_prob = float(drop_prob)
        self.pool = pool
        self.rng = rng
        self.batch = batch
        self._u = np.empty(0)
        self._s = np.empty(0)
        self._ui = 0
        self._si = 0

    def dropped(self) -> bool:
        if self.drop_prob == 0.0:
            return False
        if self._ui >= len(self._u):
            self._u = self.rng.random(self.batch)
            self._ui = 0
        u = self._u[self._ui]
        self._ui += 1
        return bool(u < self.drop_prob)

    def sojourn(self) -> float:
        if self._si >= len(self._s):
            self._s = self.rng.choice(self.pool, self.batch)
            self._si = 0
        s = self._s[self._si]
        self._si += 1
        return float(s)


class _WalkOverflow(Exception):
    pass


def sample_resend_walks(samplers: list[NodeSampler], n_walks: int,
                        visit_cap: int = WALK_VISIT_CAP) -> np.ndarray | None:
    """Tagged-packet end-to-end times with resend-from-source semantics.

    Returns None when a walk exceeds the visit cap (effectively unbounded
    latency from a node dropping nearly every packet).
    """
    last = len(samplers) - 1
    totals = np.empty(n_walks)

    def through(n: int, budget: list[int]) -> float:
        budget[0] += 1
        if budget[0] > visit_cap:
            raise _WalkOverflow
        if n == 0:
            return samplers[0].sojourn()
        t = through(n - 1, budget)
        while samplers[n].dropped():
            budget[0] += 1
            if budget[0] > visit_cap:
                raise _WalkOverflow
            t += through(n - 1, budget)
        return t + samplers[n].sojourn()

    try:
        for i in range(n_walks):
            totals[i] = through(last, [0])
    except _WalkOverflow:
        return None
    return totals


def simulate(t: Topology, w: Workload, catalog: VnfCatalog, p: Provisioning,
             config: EvalConfig = EvalConfig(),
             horizon: SimHorizon = SimHorizon()) -> LatencyReport:
    """Empirical latency report for a feasible provisioning."""
    tp = compute_traffic(t, w, catalog, p, config.traffic_mode)
    params = _node_params(t, catalog, p, tp.b, config)
    sequences = node_sequences(t, w, p)

    deployed = [c for c in w.chains if p.deployed_flag(c.id)]
    if not deployed:
        return LatencyReport(per_chain={}, overall=None, node_tau={},
                             node_drop={}, node_resends={}, node_utilization={},
                             notes=("no deployed chains, nothing simulated",))

    needed = sorted({n for c in deployed for nodes, _ in sequences[c.id] for n in nodes})
    seeds = np.random.SeedSequence(horizon.seed).spawn(len(needed) + len(deployed))
    node_stats: dict[str, QueueSimStats] = {}
    for n, ss in zip(needed, seeds[: len(needed)]):
        q = params[n]
        node_stats[n] = simulate_mm1k(
            q.lam, q.mu, q.k, horizon.packets_per_node,
            rng=np.random.default_rng(ss), warmup=horizon.warmup,
            pool_size=horizon.pool_size,
        )

    per_chain: dict[str, float] = {}
    halfwidth: dict[str, float] = {}
    notes: list[str] = []
    for chain, ss in zip(deployed, seeds[len(needed):]):
        rng = np.random.default_rng(ss)
        paths = sequences[chain.id]
        if any(node_stats[n].drop_rate >= SATURATED_DROP
               for nodes, _ in paths for n in nodes):
            per_chain[chain.id] = math.inf
            notes.append(f"chain {chain.id}: saturated node on path")
            continue
        probs = np.asarray([prob for _, prob in paths])
        probs = probs / probs.sum()
        counts = rng.multinomial(horizon.walks_per_chain, probs)
        totals = []
        overflow = False
        for (nodes, _), n_walks in zip(paths, counts):
            if n_walks == 0:
                continue
            samplers = [
                NodeSampler(node_stats[n].drop_rate, node_stats[n].pool, rng)
                for n in nodes
            ]
            res = sample_resend_walks(samplers, int(n_walks))
            if res is None:
                overflow = True
                break
            totals.append(res)
        if overflow:
            per_chain[chain.id] = math.inf
            notes.append(f"chain {chain.id}: resend walk exceeded visit cap")
            continue
        all_totals = np.concatenate(totals)
        mean = float(all_totals.mean())
        hw = float(1.96 * all_totals.std(ddof=1) / math.sqrt(len(all_totals)))
        per_chain[chain.id] = mean
        halfwidth[chain.id] = hw
        if mean > 0 and hw / mean > 0.10:
            notes.append(
                f"chain {chain.id}: confidence halfwidth {hw:.3g} exceeds 10% "
                f"of mean, increase walks_per_chain"
            )

    deployed_rate = sum(c.rate for c in deployed)
    if any(math.isinf(v) for v in per_chain.values()):
        overall: float | None = math.inf
        overall_hw = None
    else:
        overall = sum((c.rate / deployed_rate) * per_chain[c.id] for c in deployed)
        overall_hw = math.sqrt(sum(
            ((c.rate / deployed_rate) * halfwidth.get(c.id, 0.0)) ** 2
            for c in deployed
        ))

    node_tau = {n: s.mean_sojourn for n, s in node_stats.items()}
    node_drop = {n: s.drop_rate for n, s in node_stats.items()}
    node_res = {
        n: (math.inf if s.drop_rate >= 1.0 else 1.0 / (1.0 - s.drop_rate))
        for n, s in node_stats.items()
    }
    return LatencyReport(
        per_chain=per_chain, overall=overall, node_tau=node_tau,
        node_drop=node_drop, node_resends=node_res,
        node_utilization={n: params[n].rho for n in needed},
        saturated=tuple(sorted(
            n for n in needed if node_stats[n].drop_rate >= SATURATED_DROP
        )),
        per_chain_halfwidth=halfwidth, overall_halfwidth=overall_hw,
        notes=tuple(notes),
    )
