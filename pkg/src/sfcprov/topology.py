"""Physical network tree: switches, servers, path and capacity queries.

The network is a rooted tree. Switches are interior nodes (each with a
processing rate in packets/second), servers are leaves (each with a server
type that determines VNF processing rates). Topologies are immutable after
loading, so they are safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

NodeId = str

SWITCH = "switch"
SERVER = "server"


@dataclass(frozen=True)
class Topology:
    root: NodeId
    parent: dict[NodeId, NodeId]          # defined for every non-root node
    kind: dict[NodeId, str]               # "switch" | "server"
    mu: dict[NodeId, float]               # switches only, pkts/s
    server_type: dict[NodeId, str]        # servers only
    children: dict[NodeId, list[NodeId]] = field(repr=False, default_factory=dict)
    depth: dict[NodeId, int] = field(repr=False, default_factory=dict)

    @property
    def nodes(self) -> list[NodeId]:
        return sorted(self.kind)

    @property
    def servers(self) -> list[NodeId]:
        return sorted(n for n, k in self.kind.items() if k == SERVER)

    @property
    def switches(self) -> list[NodeId]:
        return sorted(n for n, k in self.kind.items() if k == SWITCH)

    def tors(self) -> list[NodeId]:
        """Switches with at least one server directly attached."""
        return sorted(
            n for n in self.switches
            if any(self.kind[c] == SERVER for c in self.children.get(n, ()))
        )

    def aggregation_switches(self) -> list[NodeId]:
        """Switch children of the root (the tier removed to shrink the network)."""
        return sorted(
            c for c in self.children.get(self.root, ()) if self.kind[c] == SWITCH
        )

    def servers_under(self, n: NodeId) -> list[NodeId]:
        """All server descendants of n (n itself if it is a server)."""
        out = []
        stack = [n]
        while stack:
            cur = stack.pop()
            if self.kind[cur] == SERVER:
                out.append(cur)
            else:
                stack.extend(self.children.get(cur, ()))
        return sorted(out)

    def to_document(self) -> dict:
        nodes = []
        for n in self.nodes:
            entry: dict = {"id": n, "kind": self.kind[n]}
            entry["parent"] = self.parent.get(n)
            if self.kind[n] == SWITCH:
                entry["mu"] = self.mu[n]
            else:
                entry["server_type"] = self.server_type[n]
            nodes.append(entry)
        return {"root": self.root, "nodes": nodes}


def _build(root: NodeId, parent: dict, kind: dict, mu: dict, server_type: dict) -> Topology:
    """Validate the tree invariants and fill derived structure."""
    if root not in kind:
        raise ValueError(f"root node {root!r} is not declared")
    if kind[root] != SWITCH:
        raise ValueError(f"root node {root!r} must be a switch")
    if root in parent:
        raise ValueError(f"root node {root!r} must not have a parent")

    children: dict[NodeId, list[NodeId]] = {n: [] for n in kind}
    for n in sorted(kind):
        if n == root:
            continue
        if n not in parent:
            raise ValueError(f"node {n!r} has no parent and is not the root")
        p = parent[n]
        if p not in kind:
            raise ValueError(f"node {n!r} has unknown parent {p!r}")
        children[p].append(n)

    for n, k in kind.items():
        if k == SERVER and children[n]:
            raise ValueError(f"server {n!r} is not a leaf")
        if k == SWITCH:
            rate = mu.get(n)
            if rate is None:
                raise ValueError(f"switch {n!r} is missing mu")
            if not rate > 0:
                raise ValueError(f"switch {n!r} has non-positive mu {rate}")
        if k not in (SWITCH, SERVER):
            raise ValueError(f"node {n!r} has unknown kind {k!r}")
    for n, k in kind.items():
        if k == SERVER and n not in server_type:
            raise ValueError(f"server {n!r} is missing server_type")

    # reachability from the root doubles as the cycle check
    depth: dict[NodeId, int] = {root: 0}
    stack = [root]
    while stack:
        cur = stack.pop()
        for c in children[cur]:
            depth[c] = depth[cur] + 1
            stack.append(c)
    if len(depth) != len(kind):
        orphan = sorted(set(kind) - set(depth))[0]
        raise ValueError(f"node {orphan!r} does not reach the root (cycle or detached subtree)")

    t = Topology(root=root, parent=dict(parent), kind=dict(kind), mu=dict(mu),
                 server_type=dict(server_type), children=children, depth=depth)
    if not t.servers:
        raise ValueError("topology has no servers")
    return t


def load_topology(document) -> Topology:
    """Build a validated Topology from a JSON document (text or parsed dict)."""
    if isinstance(document, str):
        document = json.loads(document)
    if not isinstance(document, dict) or "root" not in document or "nodes" not in document:
        raise ValueError("topology document must be an object with 'root' and 'nodes'")

    parent: dict[NodeId, NodeId] = {}
    kind: dict[NodeId, str] = {}
    mu: dict[NodeId, float] = {}
    server_type: dict[NodeId, str] = {}
    for entry in document["nodes"]:
        n = entry.get("id")
        if not isinstance(n, str) or not n:
            raise ValueError(f"node entry {entry!r} has no usable id")
        if n in kind:
            raise ValueError(f"duplicate node id {n!r}")
        k = entry.get("kind")
        if k not in (SWITCH, SERVER):
            raise ValueError(f"node {n!r} has invalid kind {k!r}")
        kind[n] = k
        p = entry.get("parent")
        if p is not None:
            parent[n] = p
        if k == SWITCH:
            if "mu" not in entry:
                raise ValueError(f"switch {n!r} is missing mu")
            mu[n] = float(entry["mu"])
        else:
            if "server_type" not in entry:
                raise ValueError(f"server {n!r} is missing server_type")
            server_type[n] = str(entry["server_type"])

    return _build(document["root"], parent, kind, mu, server_type)


def path(t: Topology, n: NodeId, m: NodeId) -> list[NodeId]:
    """Unique tree path from n to m, excluding n, including m; empty for n == m."""
    if n not in t.kind:
        raise ValueError(f"unknown node {n!r}")
    if m not in t.kind:
        raise ValueError(f"unknown node {m!r}")
    if n == m:
        return []
    # climb both endpoints to equal depth, then in lockstep to the common ancestor
    up: list[NodeId] = []      # nodes after leaving n, towards the ancestor
    down: list[NodeId] = []    # nodes from the ancestor down to m, reversed
    a, b = n, m
    while t.depth[a] > t.depth[b]:
        a = t.parent[a]
        up.append(a)
    while t.depth[b] > t.depth[a]:
        down.append(b)
        b = t.parent[b]
    while a != b:
        a = t.parent[a]
        up.append(a)
        down.append(b)
        b = t.parent[b]
    return up + down[::-1]


def subnetwork(t: Topology, removed: set[NodeId] | list[NodeId]) -> Topology:
    """Topology with the given switches and all their descendants removed."""
    removed = set(removed)
    for n in sorted(removed):
        if n not in t.kind:
            raise ValueError(f"unknown node {n!r}")
        if n == t.root:
            raise ValueError("cannot remove the root")
        if t.kind[n] != SWITCH:
            raise ValueError(f"can only remove switches, {n!r} is a server")
    if not removed:
        return t

    dropped: set[NodeId] = set()
    stack = sorted(removed)
    while stack:
        cur = stack.pop()
        if cur in dropped:
            continue
        dropped.add(cur)
        stack.extend(t.children.get(cur, ()))

    keep = set(t.kind) - dropped
    kind = {n: t.kind[n] for n in keep}
    parent = {n: t.parent[n] for n in keep if n != t.root}
    mu = {n: t.mu[n] for n in keep if t.kind[n] == SWITCH}
    server_type = {n: t.server_type[n] for n in keep if t.kind[n] == SERVER}
    if not any(k == SERVER for k in kind.values()):
        raise ValueError("removal leaves zero servers")
    return _build(t.root, parent, kind, mu, server_type)
