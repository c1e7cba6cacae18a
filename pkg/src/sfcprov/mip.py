"""Mixed-integer model of the provisioning problem.

Builds the full linear formulation (placement, assignment, transition,
traffic, capacity, and max-utilization rows, tagged with constraint family
ids 9..21 plus the priority rows 23), exports it to LP or MPS interchange
text, reads solver output back into a Provisioning, and emits warm-start
vectors. There is no in-process solver for general instances; a built-in
exhaustive search over unsplit assignments serves as the optimality oracle
for tiny instances.
"""

from __future__ import annotations

import json
import math
import re
import time
from dataclasses import dataclass, field

from .solution import (
    Provisioning,
    check_feasibility,
    compute_traffic,
    objective as solution_objective,
    traffic_rates,
)
from .topology import Topology, path
from .workload import VnfCatalog, Workload

RHO = "rho"

_SANITIZE = re.compile(r"[^A-Za-z0-9]")


def _san(raw: str) -> str:
    return _SANITIZE.sub("_", raw)


def x_name(vnf: str, server: str) -> str:
    return f"x_{_san(vnf)}_{_san(server)}"


def y_name(chain: str, i: int, server: str) -> str:
    return f"y_{_san(chain)}_{i}_{_san(server)}"


def z_name(chain: str, i: int, k: str, l: str) -> str:
    return f"z_{_san(chain)}_{i}_{_san(k)}_{_san(l)}"


def b_name(node: str) -> str:
    return f"b_{_san(node)}"


def d_name(chain: str) -> str:
    return f"d_{_san(chain)}"


@dataclass
class Variable:
    name: str
    ub: float | None = None     # None means unbounded above; lower bound is 0
    binary: bool = False


@dataclass
class Constraint:
    name: str
    tag: int                    # constraint family id
    coeffs: dict[str, float]
    sense: str                  # "<=", ">=", "="
    rhs: float


@dataclass
class ModelMeta:
    t: Topology
    w: Workload
    catalog: VnfCatalog
    beta: float
    mode: str
    priority_extension: bool
    big_m: float
    varmeta: dict[str, tuple]   # name -> semantic tuple


@dataclass
class MipModel:
    name: str
    variables: list[Variable]
    constraints: list[Constraint]
    objective: dict[str, float]         # minimized
    meta: ModelMeta | None = None

    def variable(self, name: str) -> Variable:
        for v in self.variables:
            if v.name == name:
                return v
        raise KeyError(name)

    def constraint_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for c in self.constraints:
            counts[c.tag] = counts.get(c.tag, 0) + 1
        return counts


def big_m_value(catalog: VnfCatalog) -> float:
    """Slack constant for the per-server utilization rows.

    The utilization rows carry traffic pre-divided by the candidate VNF's
    rate, so the constant must dominate max-rate/min-rate, not just the
    rates themselves.
    """
    hi, lo = catalog.max_rate(), catalog.min_rate()
    return 1.0 + max(1.0, hi, hi / lo)


def build_model(t: Topology, w: Workload, catalog: VnfCatalog, beta: float,
                priority_extension: bool = False, mode: str = "physical",
                name: str = "sfc_provisioning") -> MipModel:
    """Assemble variables, constraint rows, and the weighted objective."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must be in [0, 1], got {beta}")
    servers = t.servers
    vnfs = sorted(catalog.vnf_types)
    chains = list(w.chains)
    big_m = big_m_value(catalog)

    placeable = {
        l: [v for v in vnfs if catalog.rate(t.server_type[l], v) is not None]
        for l in servers
    }

    variables: list[Variable] = []
    varmeta: dict[str, tuple] = {}

    def add_var(name_: str, meta: tuple, ub=None, binary=False):
        if name_ in varmeta:
            raise ValueError(f"variable name collision after sanitization: {name_}")
        variables.append(Variable(name_, ub=ub, binary=binary))
        varmeta[name_] = meta

    for v in vnfs:
        for l in servers:
            if v in placeable[l]:
                add_var(x_name(v, l), ("x", v, l), binary=True)
    for c in chains:
        for i in range(1, c.length + 1):
            for l in servers:
                add_var(y_name(c.id, i, l), ("y", c.id, i, l), ub=1.0)
    for c in chains:
        for i in range(1, c.length):
            for k in servers:
                for l in servers:
                    add_var(z_name(c.id, i, k, l), ("z", c.id, i, k, l), ub=1.0)
    for n in t.nodes:
        add_var(b_name(n), ("b", n))
    add_var(RHO, ("rho",))
    if priority_extension:
        for c in chains:
            add_var(d_name(c.id), ("d", c.id), binary=True)

    rows: list[Constraint] = []

    def add_row(tag: int, name_: str, coeffs: dict[str, float], sense: str, rhs: float):
        coeffs = {k: v for k, v in coeffs.items() if v != 0.0}
        if not coeffs:
            return
        rows.append(Constraint(f"c{tag}_{name_}", tag, coeffs, sense, rhs))

    for l in servers:
        add_row(9, _san(l),
                {x_name(v, l): 1.0 for v in placeable[l]}, "<=", 1.0)

    for c in chains:
        for i, v in enumerate(c.sequence, 1):
            for l in servers:
                coeffs = {y_name(c.id, i, l): 1.0}
                if v in placeable[l]:
                    coeffs[x_name(v, l)] = -1.0
                add_row(10, f"{_san(c.id)}_{i}_{_san(l)}", coeffs, "<=", 0.0)

    for c in chains:
        for i in range(1, c.length + 1):
            coeffs = {y_name(c.id, i, l): 1.0 for l in servers}
            if priority_extension:
                coeffs[d_name(c.id)] = -1.0
                add_row(11, f"{_san(c.id)}_{i}", coeffs, "=", 0.0)
            else:
                add_row(11, f"{_san(c.id)}_{i}", coeffs, "=", 1.0)

    for c in chains:
        for i in range(1, c.length):
            for k in servers:
                for l in servers:
                    stem = f"{_san(c.id)}_{i}_{_san(k)}_{_san(l)}"
                    add_row(12, stem,
                            {z_name(c.id, i, k, l): 1.0, y_name(c.id, i, k): -1.0},
                            "<=", 0.0)
                    add_row(13, stem,
                            {z_name(c.id, i, k, l): 1.0, y_name(c.id, i + 1, l): -1.0},
                            "<=", 0.0)

    for c in chains:
        for i in range(1, c.length):
            coeffs = {z_name(c.id, i, k, l): 1.0 for k in servers for l in servers}
            if priority_extension:
                coeffs[d_name(c.id)] = -1.0
                add_row(14, f"{_san(c.id)}_{i}", coeffs, "=", 0.0)
            else:
                add_row(14, f"{_san(c.id)}_{i}", coeffs, "=", 1.0)

    for c in chains:
        q = c.length
        for k in servers:
            coeffs: dict[str, float] = {}
            coeffs[y_name(c.id, 1, k)] = coeffs.get(y_name(c.id, 1, k), 0.0) + 1.0
            for i in range(1, q):
                for m in servers:
                    zi = z_name(c.id, i, m, k)
                    coeffs[zi] = coeffs.get(zi, 0.0) + 1.0
                    zo = z_name(c.id, i, k, m)
                    coeffs[zo] = coeffs.get(zo, 0.0) - 1.0
            yq = y_name(c.id, q, k)
            coeffs[yq] = coeffs.get(yq, 0.0) - 1.0
            add_row(15, f"{_san(c.id)}_{_san(k)}", coeffs, "=", 0.0)

    # leg membership: which nodes each root<->server and server->server path crosses
    first_leg: dict[str, list[str]] = {n: [] for n in t.nodes}
    last_leg: dict[str, list[str]] = {n: [] for n in t.nodes}
    for l in servers:
        for n in path(t, t.root, l):
            first_leg[n].append(l)
        for n in path(t, l, t.root):
            last_leg[n].append(l)
    pair_leg: dict[str, list[tuple[str, str]]] = {n: [] for n in t.nodes}
    for k in servers:
        for l in servers:
            if k != l:
                for n in path(t, k, l):
                    pair_leg[n].append((k, l))

    lam_total = sum(c.rate for c in chains)

    def traffic_row(node: str, include_first: bool, include_const: bool) -> tuple[dict, float]:
        coeffs: dict[str, float] = {b_name(node): 1.0}
        for c in chains:
            lam = c.rate
            q = c.length
            if include_first:
                for l in first_leg[node]:
                    nm = y_name(c.id, 1, l)
                    coeffs[nm] = coeffs.get(nm, 0.0) - lam
            for m in last_leg[node]:
                nm = y_name(c.id, q, m)
                coeffs[nm] = coeffs.get(nm, 0.0) - lam
            for (k, l) in pair_leg[node]:
                for i in range(1, q):
                    nm = z_name(c.id, i, k, l)
                    coeffs[nm] = coeffs.get(nm, 0.0) - lam
        rhs = 0.0
        if include_const:
            if priority_extension:
                for c in chains:
                    coeffs[d_name(c.id)] = coeffs.get(d_name(c.id), 0.0) - c.rate
            else:
                rhs = lam_total
        return coeffs, rhs

    for k in t.nodes:
        if k == t.root:
            continue
        coeffs, rhs = traffic_row(k, include_first=True,
                                  include_const=(mode == "paper"))
        add_row(16, _san(k), coeffs, "=", rhs)
    coeffs, rhs = traffic_row(t.root, include_first=False, include_const=True)
    add_row(17, _san(t.root), coeffs, "=", rhs)

    for n in t.switches:
        add_row(18, _san(n), {b_name(n): 1.0}, "<=", t.mu[n])
    for l in servers:
        coeffs = {b_name(l): 1.0}
        for v in placeable[l]:
            coeffs[x_name(v, l)] = -catalog.rate(t.server_type[l], v)
        add_row(19, _san(l), coeffs, "<=", 0.0)

    for n in t.switches:
        add_row(20, _san(n), {RHO: 1.0, b_name(n): -1.0 / t.mu[n]}, ">=", 0.0)
    for l in servers:
        for v in placeable[l]:
            gamma = catalog.rate(t.server_type[l], v)
            add_row(21, f"{_san(l)}_{_san(v)}",
                    {RHO: 1.0, b_name(l): -1.0 / gamma, x_name(v, l): -big_m},
                    ">=", -big_m)

    if priority_extension:
        for c in chains:
            for c2 in chains:
                if c.priority > c2.priority:
                    add_row(23, f"{_san(c.id)}_{_san(c2.id)}",
                            {d_name(c.id): 1.0, d_name(c2.id): -1.0}, ">=", 0.0)

    obj: dict[str, float] = {}
    if beta < 1.0:
        obj[RHO] = 1.0 - beta
    if beta > 0.0:
        weight = beta / len(servers)
        for v in vnfs:
            for l in servers:
                if v in placeable[l]:
                    obj[x_name(v, l)] = weight

    seen = set()
    for row in rows:
        if row.name in seen:
            raise ValueError(f"constraint name collision after sanitization: {row.name}")
        seen.add(row.name)

    meta = ModelMeta(t=t, w=w, catalog=catalog, beta=beta, mode=mode,
                     priority_extension=priority_extension, big_m=big_m,
                     varmeta=varmeta)
    return MipModel(name=name, variables=variables, constraints=rows,
                    objective=obj, meta=meta)


# ---------------------------------------------------------------- export

def _num(x: float) -> str:
    if x == int(x) and abs(x) < 1e16:
        return repr(float(x))
    return repr(x)


def _lp_terms(coeffs: dict[str, float]) -> str:
    parts: list[str] = []
    for name_, c in coeffs.items():
        if c == 0.0:
            continue
        if not parts:
            parts.append(f"-{_num(-c)} {name_}" if c < 0 else f"{_num(c)} {name_}")
        else:
            parts.append(f"- {_num(-c)} {name_}" if c < 0 else f"+ {_num(c)} {name_}")
    return " ".join(parts) if parts else "0.0 " + RHO


def _write_lp(m: MipModel) -> str:
    out = [f"\\ {m.name}", "Minimize", f" obj: {_lp_terms(m.objective)}", "Subject To"]
    for row in m.constraints:
        out.append(f" {row.name}: {_lp_terms(row.coeffs)} {row.sense} {_num(row.rhs)}")
    out.append("Bounds")
    for v in m.variables:
        if v.ub is None:
            out.append(f" {v.name} >= 0")
        else:
            out.append(f" 0 <= {v.name} <= {_num(v.ub)}")
    binaries = [v.name for v in m.variables if v.binary]
    if binaries:
        out.append("Binaries")
        out.extend(f" {b}" for b in binaries)
    out.append("End")
    return "\n".join(out) + "\n"


def _write_mps(m: MipModel) -> str:
    out = [f"NAME {m.name}", "ROWS", " N obj"]
    sense_code = {"<=": "L", ">=": "G", "=": "E"}
    for row in m.constraints:
        out.append(f" {sense_code[row.sense]} {row.name}")
    columns: dict[str, list[tuple[str, float]]] = {v.name: [] for v in m.variables}
    for name_, c in m.objective.items():
        if c != 0.0:
            columns[name_].append(("obj", c))
    for row in m.constraints:
        for name_, c in row.coeffs.items():
            if c != 0.0:
                columns[name_].append((row.name, c))
    out.append("COLUMNS")
    in_int = False
    marker = 0
    for v in m.variables:
        if v.binary and not in_int:
            marker += 1
            out.append(f"    MARK{marker:04d} 'MARKER' 'INTORG'")
            in_int = True
        elif not v.binary and in_int:
            marker += 1
            out.append(f"    MARK{marker:04d} 'MARKER' 'INTEND'")
            in_int = False
        for row_name, c in columns[v.name]:
            out.append(f"    {v.name} {row_name} {_num(c)}")
    if in_int:
        marker += 1
        out.append(f"    MARK{marker:04d} 'MARKER' 'INTEND'")
    out.append("RHS")
    for row in m.constraints:
        if row.rhs != 0.0:
            out.append(f"    RHS {row.name} {_num(row.rhs)}")
    out.append("BOUNDS")
    for v in m.variables:
        if v.binary:
            out.append(f" BV BND {v.name}")
        elif v.ub is not None:
            out.append(f" UP BND {v.name} {_num(v.ub)}")
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def export(m: MipModel, fmt: str) -> str:
    """Serialize the model to LP or MPS interchange text."""
    fmt = fmt.lower()
    if fmt == "lp":
        return _write_lp(m)
    if fmt == "mps":
        return _write_mps(m)
    raise ValueError(f"unknown export format {fmt!r} (use 'lp' or 'mps')")


# ---------------------------------------------------------------- import

def _row_tag(name: str) -> int:
    m = re.match(r"c(\d+)_", name)
    if not m:
        raise ValueError(f"constraint name {name!r} does not carry a family tag")
    return int(m.group(1))


def _parse_lp(text: str) -> MipModel:
    lines = [ln.rstrip() for ln in text.splitlines()]
    name = "model"
    if lines and lines[0].startswith("\\"):
        name = lines[0][1:].strip() or name
        lines = lines[1:]
    section = None
    objective: dict[str, float] = {}
    rows: list[Constraint] = []
    var_order: list[tuple[str, float | None]] = []
    binaries: set[str] = set()

    def parse_terms(tokens: list[str]) -> dict[str, float]:
        coeffs: dict[str, float] = {}
        sign = 1.0
        i = 0
        while i < len(tokens):
            tok = tokens[i]
            if tok == "+":
                sign = 1.0
                i += 1
                continue
            if tok == "-":
                sign = -1.0
                i += 1
                continue
            coeff = float(tok)
            var = tokens[i + 1]
            coeffs[var] = coeffs.get(var, 0.0) + sign * coeff
            sign = 1.0
            i += 2
        return coeffs

    for ln in lines:
        stripped = ln.strip()
        if not stripped:
            continue
        lowered = stripped.lower()
        if lowered in ("minimize", "subject to", "bounds", "binaries", "end"):
            section = lowered
            continue
        if section == "minimize":
            body = stripped.split(":", 1)[1].strip()
            objective.update(parse_terms(body.split()))
        elif section == "subject to":
            rname, body = stripped.split(":", 1)
            rname = rname.strip()
            tokens = body.split()
            sense_idx = next(
                i for i, tok in enumerate(tokens) if tok in ("<=", ">=", "=")
            )
            coeffs = parse_terms(tokens[:sense_idx])
            rows.append(Constraint(rname, _row_tag(rname), coeffs,
                                   tokens[sense_idx], float(tokens[sense_idx + 1])))
        elif section == "bounds":
            tokens = stripped.split()
            if len(tokens) == 3 and tokens[1] == ">=":       # name >= 0
                var_order.append((tokens[0], None))
            elif len(tokens) == 5 and tokens[1] == "<=" and tokens[3] == "<=":
                var_order.append((tokens[2], float(tokens[4])))
            else:
                raise ValueError(f"unrecognized bounds line: {stripped!r}")
        elif section == "binaries":
            binaries.add(stripped)

    variables = [Variable(n, ub=ub, binary=(n in binaries)) for n, ub in var_order]
    return MipModel(name=name, variables=variables, constraints=rows,
                    objective=objective, meta=None)


def _parse_mps(text: str) -> MipModel:
    name = "model"
    section = None
    senses: dict[str, str] = {}
    row_order: list[str] = []
    var_order: list[str] = []
    var_known: set[str] = set()
    binaries: set[str] = set()
    ubs: dict[str, float] = {}
    coeffs_by_row: dict[str, dict[str, float]] = {}
    objective: dict[str, float] = {}
    rhs: dict[str, float] = {}
    in_int = False
    code_sense = {"L": "<=", "G": ">=", "E": "="}

    for ln in text.splitlines():
        stripped = ln.strip()
        if not stripped or stripped.startswith("*"):
            continue
        upper = stripped.upper()
        if upper.startswith("NAME"):
            parts = stripped.split(None, 1)
            if len(parts) > 1:
                name = parts[1].strip()
            continue
        if upper in ("ROWS", "COLUMNS", "RHS", "BOUNDS", "RANGES", "ENDATA"):
            section = upper
            continue
        tokens = stripped.split()
        if section == "ROWS":
            code, rname = tokens
            if code == "N":
                continue
            senses[rname] = code_sense[code]
            row_order.append(rname)
            coeffs_by_row[rname] = {}
        elif section == "COLUMNS":
            if "'MARKER'" in tokens:
                in_int = "'INTORG'" in tokens
                continue
            var, rname, val = tokens[0], tokens[1], float(tokens[2])
            if var not in var_known:
                var_known.add(var)
                var_order.append(var)
                if in_int:
                    binaries.add(var)
            if rname == "obj":
                objective[var] = val
            else:
                coeffs_by_row[rname][var] = val
        elif section == "RHS":
            rhs[tokens[1]] = float(tokens[2])
        elif section == "BOUNDS":
            kind = tokens[0].upper()
            if kind == "BV":
                binaries.add(tokens[2])
            elif kind == "UP":
                ubs[tokens[2]] = float(tokens[3])
            else:
                raise ValueError(f"unsupported bound type {kind!r}")

    variables = [
        Variable(n, ub=(1.0 if n in binaries else ubs.get(n)), binary=(n in binaries))
        for n in var_order
    ]
    rows = [
        Constraint(rn, _row_tag(rn), coeffs_by_row[rn], senses[rn], rhs.get(rn, 0.0))
        for rn in row_order
    ]
    return MipModel(name=name, variables=variables, constraints=rows,
                    objective=objective, meta=None)


def parse_model(text: str) -> MipModel:
    """Parse LP or MPS text produced by export (format auto-detected)."""
    for ln in text.splitlines():
        stripped = ln.strip()
        if not stripped:
            continue
        if stripped.startswith("\\") or stripped.lower() == "minimize":
            return _parse_lp(text)
        return _parse_mps(text)
    raise ValueError("empty model document")


# ------------------------------------------------------------- solutions

def full_values(t: Topology, w: Workload, catalog: VnfCatalog, p: Provisioning,
                mode: str = "physical", priority_extension: bool = False,
                ) -> dict[str, float]:
    """Complete variable vector (export naming scheme) for a provisioning."""
    tp = compute_traffic(t, w, catalog, p, mode)
    values: dict[str, float] = {}
    for l in t.servers:
        for v in sorted(catalog.vnf_types):
            if catalog.rate(t.server_type[l], v) is not None:
                values[x_name(v, l)] = 1.0 if p.placement.get(l) == v else 0.0
    for c in w.chains:
        for i in range(1, c.length + 1):
            for l in t.servers:
                values[y_name(c.id, i, l)] = p.assignment.get((c.id, i, l), 0.0)
        for i in range(1, c.length):
            for k in t.servers:
                for l in t.servers:
                    values[z_name(c.id, i, k, l)] = p.transitions.get(
                        (c.id, i, k, l), 0.0)
    for n in t.nodes:
        values[b_name(n)] = tp.b[n]
    values[RHO] = tp.rho_max
    if priority_extension:
        for c in w.chains:
            values[d_name(c.id)] = float(p.deployed_flag(c.id))
    return values


def warm_start(m: MipModel, p: Provisioning) -> str:
    """JSON start vector (name -> value) covering every model variable."""
    if m.meta is None:
        raise ValueError("model carries no instance context (parsed from text?)")
    meta = m.meta
    report = check_feasibility(meta.t, meta.w, meta.catalog, p, meta.mode)
    if not report.feasible:
        ids = sorted(report.constraints_hit())
        raise ValueError(f"warm start requires a feasible provisioning; "
                         f"violated constraints: {ids}")
    values = full_values(meta.t, meta.w, meta.catalog, p, meta.mode,
                         meta.priority_extension)
    ordered = {v.name: values[v.name] for v in m.variables}
    return json.dumps(ordered, indent=1)


def _parse_value_document(document: str) -> dict[str, float]:
    stripped = document.lstrip()
    if stripped.startswith("{"):
        return {k: float(v) for k, v in json.loads(document).items()}
    values: dict[str, float] = {}
    for ln in document.splitlines():
        line = ln.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"cannot parse solution line {ln!r}")
        values[parts[0]] = float(parts[1])
    return values


def ingest_solution(m: MipModel, document: str) -> Provisioning:
    """Rebuild a Provisioning from solver output and verify it end to end."""
    if m.meta is None:
        raise ValueError("model carries no instance context (parsed from text?)")
    meta = m.meta
    values = _parse_value_document(document)

    missing = [v.name for v in m.variables if v.name not in values]
    if missing:
        shown = ", ".join(missing[:10])
        more = f" (+{len(missing) - 10} more)" if len(missing) > 10 else ""
        raise ValueError(f"solution is missing variables: {shown}{more}")

    for v in m.variables:
        val = values[v.name]
        ub = 1.0 if v.binary else v.ub
        if val < -1e-6 or (ub is not None and val > ub + 1e-6):
            raise ValueError(f"value {val} of {v.name} violates bounds")
        if v.binary and abs(val - round(val)) > 1e-6:
            raise ValueError(f"binary variable {v.name} has fractional value {val}")

    placement: dict[str, str] = {}
    assignment: dict[tuple[str, int, str], float] = {}
    transitions: dict[tuple[str, int, str, str], float] = {}
    deployed: dict[str, int] = {}
    solver_b: dict[str, float] = {}
    solver_rho = 0.0
    for v in m.variables:
        kind = meta.varmeta[v.name]
        val = values[v.name]
        if kind[0] == "x" and val > 0.5:
            _, vnf, server = kind
            if server in placement:
                raise ValueError(
                    f"feasibility mismatch for constraint 9: server {server!r} "
                    f"hosts both {placement[server]!r} and {vnf!r}"
                )
            placement[server] = vnf
        elif kind[0] == "y" and val > 1e-9:
            assignment[(kind[1], kind[2], kind[3])] = val
        elif kind[0] == "z" and val > 1e-9:
            transitions[(kind[1], kind[2], kind[3], kind[4])] = val
        elif kind[0] == "b":
            solver_b[kind[1]] = val
        elif kind[0] == "rho":
            solver_rho = val
        elif kind[0] == "d":
            deployed[kind[1]] = int(round(val))
    if not meta.priority_extension:
        deployed = {c.id: 1 for c in meta.w.chains}

    p = Provisioning(placement, assignment, transitions, deployed)
    report = check_feasibility(meta.t, meta.w, meta.catalog, p, meta.mode)
    if not report.feasible:
        worst = report.violations[0]
        raise ValueError(
            f"feasibility mismatch for constraint {worst.constraint}: "
            f"{worst.where} off by {worst.magnitude:.3g}"
        )
    expected_b = traffic_rates(meta.t, meta.w, p, meta.mode)
    for n, exp in expected_b.items():
        if abs(solver_b.get(n, 0.0) - exp) > 1e-5 * max(1.0, abs(exp)):
            tag = 17 if n == meta.t.root else 16
            raise ValueError(
                f"feasibility mismatch for constraint {tag}: traffic at {n!r} "
                f"is {solver_b.get(n, 0.0):.6g}, expected {exp:.6g}"
            )
    tp = compute_traffic(meta.t, meta.w, meta.catalog, p, meta.mode)
    if abs(solver_rho - tp.rho_max) > 1e-5:
        raise ValueError(
            f"feasibility mismatch for constraints 20/21: solver rho "
            f"{solver_rho:.6g} vs computed max utilization {tp.rho_max:.6g}"
        )
    return p


# ------------------------------------------------------------ exact oracle

EXACT_MAX_SERVERS = 8
EXACT_MAX_POSITIONS = 8


@dataclass(frozen=True)
class Budget:
    max_servers: int | None = None
    time_limit: float | None = None


@dataclass
class SolverResult:
    status: str                       # optimal | feasible | infeasible | timeout
    values: dict[str, float] | None
    objective: float | None
    wall_time: float


def _binary_provisioning(w: Workload, choice: dict[tuple[str, int], str],
                         host: dict[str, str],
                         deployed: dict[str, int]) -> Provisioning:
    assignment = {(c, i, s): 1.0 for (c, i), s in choice.items()}
    transitions = {}
    for chain in w.chains:
        if not deployed.get(chain.id, 1):
            continue
        for i in range(1, chain.length):
            k = choice[(chain.id, i)]
            l = choice[(chain.id, i + 1)]
            transitions[(chain.id, i, k, l)] = 1.0
    return Provisioning(dict(host), assignment, transitions, dict(deployed))


def _search(t: Topology, w: Workload, catalog: VnfCatalog, beta: float,
            deployed: dict[str, int], budget: Budget, mode: str):
    """Exhaustive DFS over unsplit position-to-server assignments."""
    servers = t.servers
    positions: list[tuple[str, int, str, float, bool]] = []
    for chain in w.chains:
        if not deployed.get(chain.id, 1):
            continue
        for i, v in enumerate(chain.sequence, 1):
            positions.append((chain.id, i, v, chain.rate, i == 1))

    const = 0.0
    if mode == "paper":
        const = sum(c.rate for c in w.chains if deployed.get(c.id, 1))

    deadline = None
    if budget.time_limit is not None:
        deadline = time.monotonic() + budget.time_limit

    host: dict[str, str] = {}
    load: dict[str, float] = {s: 0.0 for s in servers}
    choice: dict[tuple[str, int], str] = {}
    best: dict = {"objective": None, "prov": None, "tp": None}
    timed_out = False

    n_servers = len(servers)
    max_servers = budget.max_servers if budget.max_servers is not None else n_servers

    def dfs(idx: int, prev_server: str | None, rho_floor: float):
        nonlocal timed_out
        if timed_out:
            return
        if deadline is not None and time.monotonic() > deadline:
            timed_out = True
            return
        if best["objective"] is not None:
            bound = (1.0 - beta) * rho_floor + beta * (len(host) / n_servers)
            if bound >= best["objective"] - 1e-12:
                return
        if idx == len(positions):
            prov = _binary_provisioning(w, choice, host, deployed)
            tp = compute_traffic(t, w, catalog, prov, mode)
            if tp.rho_max > 1.0 + 1e-9:
                return
            obj = solution_objective(prov, tp, beta, n_servers)
            if best["objective"] is None or obj < best["objective"] - 1e-12:
                best.update(objective=obj, prov=prov, tp=tp)
            return
        c, i, v, lam, is_first = positions[idx]
        for s in servers:
            hosted = host.get(s)
            if hosted is not None and hosted != v:
                continue
            gamma = catalog.rate(t.server_type[s], v)
            if gamma is None:
                continue
            arrives = is_first or choice[(c, i - 1)] != s
            extra = lam if arrives else 0.0
            if const + load[s] + extra > gamma + 1e-9:
                continue
            fresh = hosted is None
            if fresh and len(host) + 1 > max_servers:
                continue
            host[s] = v
            load[s] += extra
            choice[(c, i)] = s
            new_floor = max(rho_floor, (const + load[s]) / gamma)
            dfs(idx + 1, s, new_floor)
            del choice[(c, i)]
            load[s] -= extra
            if fresh:
                del host[s]
        return

    start = time.monotonic()
    dfs(0, None, 0.0)
    wall = time.monotonic() - start
    if best["objective"] is None:
        status = "timeout" if timed_out else "infeasible"
        return SolverResult(status, None, None, wall), None
    status = "feasible" if timed_out else "optimal"
    return SolverResult(status, None, best["objective"], wall), best["prov"]


def exact_solve(t: Topology, w: Workload, catalog: VnfCatalog, beta: float,
                budget: Budget = Budget(), mode: str = "physical",
                ) -> tuple[SolverResult, Provisioning | None]:
    """Optimal unsplit provisioning by exhaustive enumeration (tiny instances).

    Every chain position is assigned wholly to one server, transitions follow
    the assignment, and the best weighted objective wins; the guard refuses
    instances beyond a few servers or positions.
    """
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must be in [0, 1], got {beta}")
    total_q = sum(c.length for c in w.chains)
    if len(t.servers) > EXACT_MAX_SERVERS or total_q > EXACT_MAX_POSITIONS:
        raise ValueError(
            f"instance too large for exact enumeration "
            f"(|servers|={len(t.servers)} > {EXACT_MAX_SERVERS} or "
            f"positions={total_q} > {EXACT_MAX_POSITIONS})"
        )
    deployed = {c.id: 1 for c in w.chains}
    result, prov = _search(t, w, catalog, beta, deployed, budget, mode)
    if prov is not None:
        result.values = full_values(t, w, catalog, prov, mode)
    return result, prov


def two_phase_solve(t: Topology, w: Workload, catalog: VnfCatalog, beta: float,
                    budget: Budget = Budget(), mode: str = "physical",
                    ) -> tuple[SolverResult, Provisioning]:
    """Deploy as many chains as priorities allow, then optimize the trade-off.

    Phase one maximizes the number of deployed chains subject to the priority
    order (a lower-priority chain may only deploy if every strictly
    higher-priority chain does); phase two fixes those deployment flags and
    minimizes the weighted objective.
    """
    total_q = sum(c.length for c in w.chains)
    if len(t.servers) > EXACT_MAX_SERVERS or total_q > EXACT_MAX_POSITIONS:
        raise ValueError("instance too large for exact enumeration")
    chains = list(w.chains)
    by_priority = sorted(range(len(chains)),
                         key=lambda j: (-chains[j].priority, j))

    def respects_priorities(flags: tuple[int, ...]) -> bool:
        return all(
            flags[j] >= flags[j2]
            for j in range(len(chains)) for j2 in range(len(chains))
            if chains[j].priority > chains[j2].priority
        )

    candidates = [
        flags for flags in _all_flags(len(chains)) if respects_priorities(flags)
    ]
    candidates.sort(
        key=lambda f: (-sum(f), tuple(1 - f[j] for j in by_priority))
    )
    start = time.monotonic()
    for flags in candidates:
        deployed = {c.id: int(flags[j]) for j, c in enumerate(chains)}
        result, prov = _search(t, w, catalog, beta, deployed, budget, mode)
        if prov is not None:
            result.wall_time = time.monotonic() - start
            result.values = full_values(t, w, catalog, prov, mode,
                                        priority_extension=True)
            return result, prov
    raise RuntimeError("unreachable: the empty deployment is always feasible")


def _all_flags(n: int):
    for mask in range(2 ** n):
        yield tuple((mask >> j) & 1 for j in range(n))
