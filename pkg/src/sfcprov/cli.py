"""Command-line interface for the provisioning pipeline.

Subcommands: gen, place, export-mip, ingest, evaluate, simulate, frontier,
compare. Exit codes: 0 success, 1 input error, 2 infeasible or undeployed
chains (reports still written), 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import frontier as frontier_mod
from . import gen as gen_mod
from . import mip as mip_mod
from .heuristic import HeuristicConfig, random_place, round_robin_place
from .latency import EvalConfig, evaluate, queue_curves
from .simulate import SimHorizon, simulate
from .solution import check_feasibility, compute_traffic, load_solution
from .topology import load_topology
from .workload import load_catalog, load_workload

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INFEASIBLE = 2
EXIT_INTERNAL = 3


def _write_json(path: Path, document) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(document, indent=2) + "\n")


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _load_instance(args):
    t = load_topology(Path(args.topology).read_text())
    catalog = load_catalog(Path(args.catalog).read_text())
    w = load_workload(Path(args.workload).read_text(), catalog)
    return t, catalog, w


def _instance_flags(sub):
    sub.add_argument("--topology", required=True)
    sub.add_argument("--catalog", required=True)
    sub.add_argument("--workload", required=True)
    sub.add_argument("--traffic-mode", default="physical",
                     choices=["physical", "paper"])


def _eval_config(args) -> EvalConfig:
    k_by_kind = {}
    if getattr(args, "k_switch", None) is not None:
        k_by_kind["switch"] = args.k_switch
    if getattr(args, "k_server", None) is not None:
        k_by_kind["server"] = args.k_server
    return EvalConfig(k_default=args.k_default, k_by_kind=k_by_kind,
                      traffic_mode=args.traffic_mode)


def _k_flags(sub):
    sub.add_argument("--k-default", type=int, default=100,
                     help="queue capacity per node (packets)")
    sub.add_argument("--k-switch", type=int, default=None)
    sub.add_argument("--k-server", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sfcprov",
        description="Service function chain provisioning on tree networks",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("gen", help="generate a random instance")
    p.add_argument("--spec", default=None,
                   help="GenSpec JSON file; replaces the sizing flags")
    p.add_argument("--servers", type=int, default=None)
    p.add_argument("--chains", type=int, default=None)
    p.add_argument("--tors", type=int, default=None)
    p.add_argument("--aggs", type=int, default=None)
    p.add_argument("--max-chain-len", type=int, default=4)
    p.add_argument("--vnf-types", type=int, default=None)
    p.add_argument("--server-types", type=int, default=2)
    p.add_argument("--demand-fraction", type=float, default=0.35)
    p.add_argument("--mu-headroom", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")

    p = subs.add_parser("place", help="place chains with a chosen method")
    _instance_flags(p)
    p.add_argument("--method", required=True,
                   choices=["round-robin", "random", "exact"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--beta", type=float, default=0.0, help="exact method only")
    p.add_argument("--limit-initial", type=float, default=0.5)
    p.add_argument("--limit-step", type=float, default=0.1)
    p.add_argument("--limit-max", type=float, default=0.99)
    p.add_argument("--chain-order", default="priority-then-lambda",
                   choices=["priority-then-lambda", "input-order"])
    p.add_argument("--max-servers", type=int, default=None)
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--out", required=True, help="output directory")

    p = subs.add_parser("export-mip", help="write the model in LP or MPS form")
    _instance_flags(p)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--format", default="lp", choices=["lp", "mps"])
    p.add_argument("--priority-extension", action="store_true")
    p.add_argument("--out", required=True, help="model file path")
    p.add_argument("--warm-start", default=None,
                   help="solution JSON to convert into a start vector")
    p.add_argument("--warm-start-out", default=None)

    p = subs.add_parser("ingest", help="read solver output into a solution")
    _instance_flags(p)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--priority-extension", action="store_true")
    p.add_argument("--solution-file", required=True,
                   help="solver output (name value lines or JSON)")
    p.add_argument("--out", required=True, help="solution JSON path")

    p = subs.add_parser("evaluate", help="analytic latency report")
    _instance_flags(p)
    p.add_argument("--solution", required=True)
    _k_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--queue-curves", default=None,
                   help="also write utilization curve files with this prefix")

    p = subs.add_parser("simulate", help="discrete-event latency estimate")
    _instance_flags(p)
    p.add_argument("--solution", required=True)
    _k_flags(p)
    p.add_argument("--packets", type=int, default=200_000,
                   help="simulated arrivals per node")
    p.add_argument("--walks", type=int, default=50_000,
                   help="tagged packets per chain")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")

    p = subs.add_parser("frontier", help="trade-off report across solutions")
    _instance_flags(p)
    p.add_argument("--method", default="both",
                   choices=["exact", "heuristic", "both"])
    p.add_argument("--betas", default="0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1")
    p.add_argument("--time-limit", type=float, default=None)
    _k_flags(p)
    p.add_argument("--out", required=True, help="output file prefix")

    p = subs.add_parser("compare", help="heuristic vs random vs exact table")
    _instance_flags(p)
    p.add_argument("--seeds", default="0", help="comma list for the random baseline")
    p.add_argument("--time-limit", type=float, default=None)
    _k_flags(p)
    p.add_argument("--out", required=True, help="output file prefix")

    return parser


def _cmd_gen(args) -> int:
    if args.spec is not None:
        doc = json.loads(Path(args.spec).read_text())
        for key in ("lambda_range", "gamma_range"):
            if key in doc:
                doc[key] = tuple(doc[key])
        spec = gen_mod.GenSpec(**doc)
    elif args.servers is None or args.chains is None:
        raise ValueError("gen needs either --spec or both --servers and --chains")
    else:
        spec = gen_mod.GenSpec(
            servers=args.servers, chains=args.chains, tors=args.tors,
            agg_switches=args.aggs, max_chain_len=args.max_chain_len,
            vnf_type_count=args.vnf_types, server_type_count=args.server_types,
            demand_fraction=args.demand_fraction, mu_headroom=args.mu_headroom,
            seed=args.seed,
        )
    tdoc, cdoc, wdoc = gen_mod.generate_documents(spec)
    out = Path(args.out)
    _write_json(out / "topology.json", tdoc)
    _write_json(out / "catalog.json", cdoc)
    _write_json(out / "workload.json", wdoc)
    return EXIT_OK


def _cmd_place(args) -> int:
    t, catalog, w = _load_instance(args)
    out = Path(args.out)
    if args.method == "exact":
        result, prov = mip_mod.exact_solve(
            t, w, catalog, args.beta,
            mip_mod.Budget(args.max_servers, args.time_limit),
            args.traffic_mode,
        )
        _write_json(out / "solve_result.json", {
            "status": result.status,
            "objective": result.objective,
            "wall_time": result.wall_time,
        })
        if prov is None:
            return EXIT_INFEASIBLE
        _write_json(out / "solution.json", prov.to_document())
        return EXIT_OK
    if args.method == "round-robin":
        cfg = HeuristicConfig(
            initial_util_limit=args.limit_initial, limit_step=args.limit_step,
            limit_max=args.limit_max, chain_order=args.chain_order,
            traffic_mode=args.traffic_mode,
        )
        prov, log = round_robin_place(t, w, catalog, cfg)
    else:
        prov, log = random_place(t, w, catalog, seed=args.seed,
                                 traffic_mode=args.traffic_mode)
    _write_json(out / "solution.json", prov.to_document())
    _write_json(out / "placement_log.json", log.to_document())
    if log.deployment_rate() < 1.0:
        return EXIT_INFEASIBLE
    return EXIT_OK


def _cmd_export_mip(args) -> int:
    t, catalog, w = _load_instance(args)
    model = mip_mod.build_model(t, w, catalog, args.beta,
                                priority_extension=args.priority_extension,
                                mode=args.traffic_mode)
    _write_text(Path(args.out), mip_mod.export(model, args.format))
    if args.warm_start:
        prov = load_solution(Path(args.warm_start).read_text())
        start = mip_mod.warm_start(model, prov)
        dest = args.warm_start_out or str(Path(args.out).with_suffix(".start.json"))
        _write_text(Path(dest), start + "\n")
    return EXIT_OK


def _cmd_ingest(args) -> int:
    t, catalog, w = _load_instance(args)
    model = mip_mod.build_model(t, w, catalog, args.beta,
                                priority_extension=args.priority_extension,
                                mode=args.traffic_mode)
    prov = mip_mod.ingest_solution(model, Path(args.solution_file).read_text())
    _write_json(Path(args.out), prov.to_document())
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    t, catalog, w = _load_instance(args)
    prov = load_solution(Path(args.solution).read_text())
    report_dir = Path(args.out)
    feas = check_feasibility(t, w, catalog, prov, args.traffic_mode)
    _write_json(report_dir / "feasibility.json", feas.to_document())
    if not feas.feasible:
        return EXIT_INFEASIBLE
    report = evaluate(t, w, catalog, prov, _eval_config(args))
    _write_json(report_dir / "latency.json", report.to_document())
    _write_text(report_dir / "latency.csv", report.to_csv())
    if args.queue_curves:
        rows = queue_curves(k=args.k_default)
        tau_lines = ["rho,tau"] + [f"{repr(r)},{repr(tau)}" for r, tau, _ in rows]
        drop_lines = ["rho,drop_probability"] + [
            f"{repr(r)},{repr(pk)}" for r, _, pk in rows
        ]
        _write_text(Path(args.queue_curves + "_rho_tau.csv"),
                    "\n".join(tau_lines) + "\n")
        _write_text(Path(args.queue_curves + "_rho_drop.csv"),
                    "\n".join(drop_lines) + "\n")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    t, catalog, w = _load_instance(args)
    prov = load_solution(Path(args.solution).read_text())
    horizon = SimHorizon(packets_per_node=args.packets,
                         walks_per_chain=args.walks, seed=args.seed)
    report = simulate(t, w, catalog, prov, _eval_config(args), horizon)
    out = Path(args.out)
    _write_json(out / "latency_sim.json", report.to_document())
    _write_text(out / "latency_sim.csv", report.to_csv())
    return EXIT_OK


def _cmd_frontier(args) -> int:
    t, catalog, w = _load_instance(args)
    betas = [float(x) for x in args.betas.split(",") if x != ""]
    eval_config = _eval_config(args)
    points = []
    if args.method in ("exact", "both"):
        points.extend(frontier_mod.sweep_beta(
            t, w, catalog, betas, "exact",
            mip_mod.Budget(time_limit=args.time_limit), args.traffic_mode,
            eval_config,
        ))
    if args.method in ("heuristic", "both"):
        cfg = HeuristicConfig(traffic_mode=args.traffic_mode)
        points.extend(frontier_mod.heuristic_frontier(
            t, w, catalog, None, cfg, eval_config))

    prefix = args.out
    _write_text(Path(prefix + ".csv"), frontier_mod.points_to_csv(points))
    _write_json(Path(prefix + ".json"),
                [pt.to_document() for pt in points])
    kept = frontier_mod.pareto_filter(points)
    _write_text(Path(prefix + "_pareto.csv"), frontier_mod.points_to_csv(kept))
    valid = [pt for pt in points if pt.rho_max is not None]
    plots = [
        ("servers_rho", "servers_used,rho_max",
         [(pt.servers_used, pt.rho_max) for pt in valid]),
        ("servers_latency", "servers_used,expected_latency",
         [(pt.servers_used, pt.expected_latency) for pt in valid
          if pt.expected_latency is not None]),
        ("rho_latency", "rho_max,expected_latency",
         [(pt.rho_max, pt.expected_latency) for pt in valid
          if pt.expected_latency is not None]),
    ]
    for stem, header, rows in plots:
        rows.sort()
        lines = [header] + [f"{repr(a)},{repr(b)}" for a, b in rows]
        _write_text(Path(f"{prefix}_{stem}.csv"), "\n".join(lines) + "\n")
    if any(pt.error for pt in points):
        return EXIT_INFEASIBLE
    return EXIT_OK


def _cmd_compare(args) -> int:
    t, catalog, w = _load_instance(args)
    eval_config = _eval_config(args)
    mode = args.traffic_mode
    rows = []

    start = time.perf_counter()
    h_prov, h_log = round_robin_place(
        t, w, catalog, HeuristicConfig(traffic_mode=mode))
    h_time = time.perf_counter() - start
    h_tp = compute_traffic(t, w, catalog, h_prov, mode)
    h_lat = evaluate(t, w, catalog, h_prov, eval_config).overall
    rows.append({
        "method": "round-robin", "deployment_rate": h_log.deployment_rate(),
        "servers_used": h_tp.servers_used, "rho_max": h_tp.rho_max,
        "expected_latency": h_lat, "solve_time": h_time,
        "optimality_gap_pct": None, "latency_gap_pct": None,
    })

    seeds = [int(s) for s in args.seeds.split(",") if s != ""]
    rates, times = [], []
    for seed in seeds:
        start = time.perf_counter()
        _, r_log = random_place(t, w, catalog, seed=seed, traffic_mode=mode)
        times.append(time.perf_counter() - start)
        rates.append(r_log.deployment_rate())
    rows.append({
        "method": "random", "deployment_rate": sum(rates) / len(rates),
        "servers_used": None, "rho_max": None, "expected_latency": None,
        "solve_time": sum(times) / len(times),
        "optimality_gap_pct": None, "latency_gap_pct": None,
    })

    exact_error = None
    try:
        result, e_prov = mip_mod.exact_solve(
            t, w, catalog, beta=0.0,
            budget=mip_mod.Budget(max_servers=h_tp.servers_used,
                                  time_limit=args.time_limit),
            mode=mode,
        )
        if e_prov is not None:
            e_tp = compute_traffic(t, w, catalog, e_prov, mode)
            e_lat = evaluate(t, w, catalog, e_prov, eval_config).overall
            gap = ((h_tp.rho_max - e_tp.rho_max) / e_tp.rho_max * 100.0
                   if e_tp.rho_max > 0 else None)
            lat_gap = ((h_lat - e_lat) / e_lat * 100.0
                       if (h_lat is not None and e_lat) else None)
            rows.append({
                "method": "exact", "deployment_rate": 1.0,
                "servers_used": e_tp.servers_used, "rho_max": e_tp.rho_max,
                "expected_latency": e_lat, "solve_time": result.wall_time,
                "optimality_gap_pct": None, "latency_gap_pct": None,
            })
            rows[0]["optimality_gap_pct"] = gap
            rows[0]["latency_gap_pct"] = lat_gap
    except ValueError as exc:
        exact_error = str(exc)

    document = {"rows": rows}
    if exact_error:
        document["exact_skipped"] = exact_error
    prefix = args.out
    _write_json(Path(prefix + ".json"), document)
    cols = ["method", "deployment_rate", "servers_used", "rho_max",
            "expected_latency", "solve_time", "optimality_gap_pct",
            "latency_gap_pct"]
    lines = [",".join(cols)]
    for row in rows:
        lines.append(",".join(
            "" if row[c] is None else
            (repr(row[c]) if isinstance(row[c], float) else str(row[c]))
            for c in cols
        ))
    _write_text(Path(prefix + ".csv"), "\n".join(lines) + "\n")
    if rows[0]["deployment_rate"] < 1.0:
        return EXIT_INFEASIBLE
    return EXIT_OK


_COMMANDS = {
    "gen": _cmd_gen,
    "place": _cmd_place,
    "export-mip": _cmd_export_mip,
    "ingest": _cmd_ingest,
    "evaluate": _cmd_evaluate,
    "simulate": _cmd_simulate,
    "frontier": _cmd_frontier,
    "compare": _cmd_compare,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:                       # pragma: no cover
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
