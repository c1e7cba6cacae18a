"""VNF catalog (processing rates per server type) and service chain demands."""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass(frozen=True)
class VnfCatalog:
    server_types: frozenset[str]
    vnf_types: frozenset[str]
    gamma: dict[tuple[str, str], float]   # (server_type, vnf) -> pkts/s

    def rate(self, server_type: str, vnf: str) -> float | None:
        """Processing rate for vnf on that server type, None if undefined."""
        return self.gamma.get((server_type, vnf))

    def max_rate(self) -> float:
        return max(self.gamma.values())

    def min_rate(self) -> float:
        return min(self.gamma.values())

    def to_document(self) -> dict:
        return {
            "server_types": sorted(self.server_types),
            "vnf_types": sorted(self.vnf_types),
            "gamma": [
                {"server_type": s, "vnf": v, "rate": r}
                for (s, v), r in sorted(self.gamma.items())
            ],
        }


@dataclass(frozen=True)
class ServiceChain:
    id: str
    sequence: tuple[str, ...]   # VNF types, repeats allowed
    rate: float                 # Poisson arrival rate, pkts/s
    priority: float = 1.0

    @property
    def length(self) -> int:
        return len(self.sequence)


@dataclass(frozen=True)
class Workload:
    chains: tuple[ServiceChain, ...]
    total_rate: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "total_rate", sum(c.rate for c in self.chains))

    def chain(self, chain_id: str) -> ServiceChain:
        for c in self.chains:
            if c.id == chain_id:
                return c
        raise KeyError(chain_id)

    def to_document(self) -> dict:
        return {
            "chains": [
                {"id": c.id, "vnfs": list(c.sequence), "lambda": c.rate,
                 "priority": c.priority}
                for c in self.chains
            ]
        }


def load_catalog(document) -> VnfCatalog:
    """Build a validated VnfCatalog from a JSON document (text or parsed dict)."""
    if isinstance(document, str):
        document = json.loads(document)
    server_types = set(document.get("server_types", []))
    vnf_types = set(document.get("vnf_types", []))
    if not server_types:
        raise ValueError("catalog declares no server_types")
    if not vnf_types:
        raise ValueError("catalog declares no vnf_types")
    gamma: dict[tuple[str, str], float] = {}
    for entry in document.get("gamma", []):
        s, v = entry["server_type"], entry["vnf"]
        if s not in server_types:
            raise ValueError(f"gamma entry references unknown server_type {s!r}")
        if v not in vnf_types:
            raise ValueError(f"gamma entry references unknown vnf {v!r}")
        r = float(entry["rate"])
        if not r > 0:
            raise ValueError(f"gamma for ({s!r}, {v!r}) must be positive, got {r}")
        if (s, v) in gamma:
            raise ValueError(f"duplicate gamma entry for ({s!r}, {v!r})")
        gamma[(s, v)] = r
    if not gamma:
        raise ValueError("catalog defines no gamma rates")
    return VnfCatalog(frozenset(server_types), frozenset(vnf_types), gamma)


def load_workload(document, catalog: VnfCatalog) -> Workload:
    """Build a validated Workload; every VNF must exist in the catalog."""
    if isinstance(document, str):
        document = json.loads(document)
    chains = []
    seen = set()
    for entry in document.get("chains", []):
        cid = entry["id"]
        if cid in seen:
            raise ValueError(f"duplicate chain id {cid!r}")
        seen.add(cid)
        vnfs = entry.get("vnfs", [])
        if not vnfs:
            raise ValueError(f"chain {cid!r} has an empty VNF sequence")
        for v in vnfs:
            if v not in catalog.vnf_types:
                raise ValueError(f"chain {cid!r} references unknown VNF {v!r}")
        lam = float(entry["lambda"])
        if not lam > 0:
            raise ValueError(f"chain {cid!r} has non-positive lambda {lam}")
        prio = float(entry.get("priority", 1.0))
        if prio < 0:
            raise ValueError(f"chain {cid!r} has negative priority {prio}")
        chains.append(ServiceChain(cid, tuple(vnfs), lam, prio))
    if not chains:
        raise ValueError("workload has no chains")
    return Workload(tuple(chains))
