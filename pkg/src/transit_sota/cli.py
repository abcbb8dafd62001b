"""Command line interface.

Subcommands: ingest, solve, policy, simulate, compare, bench, serve.

Durations accept "15s" / "2.5m" / "1h". Network arguments accept a path to
a sota-net/1 JSON file or a built-in name ("demo" for the single-station
showcase, "corridor" for the three-line corridor); built-ins need no
bundle. Failures print machine-readable JSON on stderr and exit 2.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from .baseline import compare_sota_let, let_path
from .fileio import (
    load_instance,
    run_manifest,
    save_instance,
    write_json,
)
from .grid import parse_duration_seconds
from .gtfs import CalibrationConfig, build_bundle, load_slice
from .instances import (
    Instance,
    corridor_mode_overrides,
    random_instance,
    single_station_demo,
    three_line_corridor,
)
from .network import build_expanded_graph
from .oracle import enumerate_oracle
from .policy import extract_policy, simulate
from .solver import HeuristicConfig, SolveMode, solve


class CliError(Exception):
    def __init__(self, message: str, code: int = 2) -> None:
        super().__init__(message)
        self.code = code


def _fail(message: str, code: int = 2) -> "NoReturn":  # noqa: F821
    raise CliError(message, code)


def _load_named_instance(args: argparse.Namespace) -> tuple[Instance, dict]:
    """Resolve --net/--bundle (or a built-in name) to an instance."""
    net = getattr(args, "net", None)
    if net in ("demo", "corridor"):
        inst = single_station_demo() if net == "demo" else three_line_corridor()
        return inst, {"builtin": net}
    if net is None:
        _fail("--net is required (path or built-in name demo|corridor)")
    bundle = getattr(args, "bundle", None)
    if bundle is None:
        _fail("--bundle is required when --net is a file")
    net_path, bundle_path = Path(net), Path(bundle)
    for p in (net_path, bundle_path):
        if not p.exists():
            _fail(f"input file not found: {p}")
    inst = load_instance(net_path, bundle_path)
    manifest = run_manifest({"network": net_path, "bundle": bundle_path}, {})
    return inst, manifest


def _resolve_od(inst: Instance, od: str | None) -> tuple[str, str]:
    if od is None:
        return inst.origin, inst.destination
    parts = od.split(":")
    if len(parts) != 2:
        _fail(f"--od must look like ORIGIN:DEST, got {od!r}")
    return parts[0], parts[1]


def _budget_ticks(inst: Instance, text: str) -> int:
    grid = inst.spec.grid
    try:
        ticks = int(text)
    except ValueError:
        ticks = grid.ticks(text)
    if not 0 <= ticks <= grid.budget_ticks:
        _fail(f"budget {text!r} outside the grid horizon of {grid.budget_ticks} ticks")
    return ticks


def _sweep_ticks(inst: Instance, text: str) -> list[int]:
    parts = text.split(":")
    if len(parts) != 3:
        _fail(f"--budget-sweep must look like LO:HI:STEP, got {text!r}")
    lo, hi, step = (parse_duration_seconds(p) for p in parts)
    if step <= 0 or hi < lo:
        _fail(f"bad sweep range {text!r}")
    grid = inst.spec.grid
    out = []
    value = lo
    while value <= hi + 1e-9:
        ticks = grid.ticks(value)
        if not 0 <= ticks <= grid.budget_ticks:
            _fail(f"sweep budget {value}s outside the grid horizon")
        out.append(ticks)
        value += step
    return out


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# --- subcommands -------------------------------------------------------------


def cmd_ingest(args: argparse.Namespace) -> int:
    window = tuple(args.window.split("-"))
    if len(window) != 2:
        _fail(f"--window must look like 06:00-10:00, got {args.window!r}")
    sigma_parts = args.sigma.split(":")
    sigma = (float(sigma_parts[0]), float(sigma_parts[-1]))
    config = CalibrationConfig(
        sigma_range=sigma,
        seed=args.seed,
        window=(window[0], window[1]),
        delta=args.delta,
        horizon=args.horizon,
        service_date=args.date,
    )
    feed = Path(args.gtfs)
    if not feed.is_dir():
        _fail(f"GTFS directory not found: {feed}")
    slice_ = load_slice(feed, config)
    instance, report = build_bundle(slice_, config)
    out = Path(args.out)
    report_path = out.with_suffix(".report.json")
    manifest = run_manifest(
        {name: feed / name for name in ("stops.txt", "routes.txt", "trips.txt", "stop_times.txt")},
        {
            "window": args.window,
            "delta": args.delta,
            "sigma": args.sigma,
            "seed": args.seed,
            "horizon": args.horizon,
            "date": args.date,
        },
    )
    payload = report.to_dict()
    payload["manifest"] = manifest
    write_json(report_path, payload)
    if instance is None:
        sys.stderr.write(json.dumps({"error": "empty slice", "report": str(report_path)}) + "\n")
        return 2
    net_path = save_instance(instance, out, meta={"seed": args.seed, "manifest": manifest})
    for warning in report.warnings:
        sys.stderr.write(f"warning: {warning}\n")
    _emit(
        {
            "bundle": str(out),
            "network": str(net_path),
            "report": str(report_path),
            "lines": report.n_lines,
            "stations": report.n_stations,
        },
        None,
    )
    return 0


def _heuristic_from_args(args: argparse.Namespace) -> HeuristicConfig:
    return HeuristicConfig(
        epsilon=getattr(args, "epsilon", 0.75), beta=getattr(args, "beta", 1.25)
    )


def cmd_solve(args: argparse.Namespace) -> int:
    inst, manifest = _load_named_instance(args)
    origin, destination = _resolve_od(inst, args.od)
    graph = build_expanded_graph(inst.spec, inst.pmfs, origin, destination)
    for warning in graph.warnings:
        sys.stderr.write(f"warning: {warning}\n")
    mode = SolveMode(args.mode)
    heuristic = _heuristic_from_args(args)

    if args.budget_sweep:
        budgets = _sweep_ticks(inst, args.budget_sweep)
        rows = []
        for b in budgets:
            result = solve(graph, b, mode=mode, heuristic=heuristic)
            rows.append(
                {
                    "budget_ticks": b,
                    "budget_minutes": round(b * inst.spec.grid.delta_seconds / 60.0, 6),
                    "root_utility": result.root,
                    "station_evals": result.stats.station_evals,
                    "wall_time_s": round(result.stats.wall_time_s, 6),
                }
            )
        out = args.out or "sweep.csv"
        with open(out, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
        sys.stdout.write(json.dumps({"sweep": out, "rows": len(rows)}) + "\n")
        return 0

    if not args.budget:
        _fail("either --budget or --budget-sweep is required")
    budget = _budget_ticks(inst, args.budget)
    result = solve(graph, budget, mode=mode, heuristic=heuristic)
    payload = {
        "root_utility": result.root,
        "budget_ticks": budget,
        "mode": mode.value,
        "od": f"{origin}:{destination}",
        "stats": result.stats.to_dict(),
        "manifest": {**manifest, "config": {"mode": mode.value, "budget": args.budget}},
    }
    if args.dump_table:
        payload["table"] = {
            "stations": [
                {"station": n.station, "mask": n.mask, "t": t, "r": r, "u": v}
                for n, t, r, v in result.table.iter_station_entries()
            ],
            "arrivals": [
                {
                    "station": n.station,
                    "line": graph.line_id(n.station, n.line),
                    "mask": n.mask,
                    "t": t,
                    "r": r,
                    "u": v,
                    "decision": d,
                }
                for n, t, r, v, d in result.table.iter_arrival_entries()
            ],
        }
    _emit(payload, args.out)
    return 0


def cmd_policy(args: argparse.Namespace) -> int:
    inst, manifest = _load_named_instance(args)
    origin, destination = _resolve_od(inst, args.od)
    graph = build_expanded_graph(inst.spec, inst.pmfs, origin, destination)
    budget = _budget_ticks(inst, args.budget)
    result = solve(graph, budget, mode=SolveMode(args.mode))
    policy = extract_policy(result)
    entries = [
        {
            "station": station,
            "line": graph.line_id(station, line),
            "pending_mask": mask,
            "t": t,
            "r": r,
            "decision": decision,
        }
        for (station, line, mask, t, r), decision in sorted(policy.decisions.items())
    ]
    _emit(
        {
            "root_utility": result.root,
            "budget_ticks": budget,
            "approximate": policy.approximate,
            "decisions": entries,
            "manifest": manifest,
        },
        args.out,
    )
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    inst, manifest = _load_named_instance(args)
    origin, destination = _resolve_od(inst, args.od)
    graph = build_expanded_graph(inst.spec, inst.pmfs, origin, destination)
    budget = _budget_ticks(inst, args.budget)
    result = solve(graph, budget, mode=SolveMode(args.mode))
    policy = extract_policy(result)
    report = simulate(
        policy,
        graph,
        n=args.n,
        seed=args.seed,
        budget_ticks=budget,
        collision_policy=args.collision,
    )
    payload = report.to_dict()
    payload["solver_root"] = result.root
    if args.out and args.out.endswith(".csv"):
        fields = ["n", "successes", "rate", "ci_lo", "ci_hi", "seed",
                  "budget_ticks", "collision_policy", "solver_root"]
        with open(args.out, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields)
            writer.writeheader()
            writer.writerow({k: payload[k] for k in fields})
        sys.stdout.write(json.dumps({"out": args.out}) + "\n")
        return 0
    payload["manifest"] = manifest
    _emit(payload, args.out)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    inst, _manifest = _load_named_instance(args)
    origin, destination = _resolve_od(inst, args.od)
    graph = build_expanded_graph(inst.spec, inst.pmfs, origin, destination)
    budgets = _sweep_ticks(inst, args.sweep)
    rows, let = compare_sota_let(graph, budgets)
    out = args.out or "compare.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["budget_ticks", "budget_minutes", "sota", "let", "diff"])
        for row in rows:
            writer.writerow(
                [
                    row.budget_ticks,
                    round(row.budget_ticks * inst.spec.grid.delta_seconds / 60.0, 6),
                    f"{row.sota:.12f}",
                    f"{row.let:.12f}",
                    f"{row.diff:.12f}",
                ]
            )
    peak = max(rows, key=lambda r: r.diff)
    sys.stdout.write(
        json.dumps(
            {
                "out": out,
                "rows": len(rows),
                "let_path": [
                    {"line": leg.line_id, "board": leg.board, "alight": leg.alight}
                    for leg in let.legs
                ],
                "max_diff": peak.diff,
                "max_diff_budget_ticks": peak.budget_ticks,
            }
        )
        + "\n"
    )
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    instances: list[tuple[str, Instance]] = []
    rng = np.random.default_rng(args.seed)
    if args.net and args.net not in ("demo", "corridor"):
        # file-based instance (e.g. a downsampled real feed); numbers are
        # reported, not asserted
        inst, _ = _load_named_instance(args)
        origin, destination = _resolve_od(inst, args.od)
        inst = Instance(spec=inst.spec, pmfs=inst.pmfs, origin=origin, destination=destination)
        instances.append((Path(args.net).stem, inst))
    for name in args.instances.split(","):
        name = name.strip()
        if not name:
            continue
        if name == "demo":
            instances.append(("demo", single_station_demo()))
        elif name == "corridor":
            instances.append(("corridor", three_line_corridor()))
        elif name in ("low", "high"):
            for k in range(args.n_instances):
                overrides = corridor_mode_overrides(name, rng)
                instances.append(
                    (f"{name}-{k}", three_line_corridor(travel_overrides=overrides, seed=args.seed + k))
                )
        elif name.startswith("random"):
            for k in range(args.n_instances):
                instances.append((f"random-{k}", random_instance(args.seed + k)))
        else:
            _fail(f"unknown bench instance {name!r} (demo|corridor|low|high|random)")
    if not instances:
        _fail("nothing to bench")

    modes = [SolveMode(m.strip()) for m in args.modes.split(",")]
    rows = []
    for label, inst in instances:
        graph = build_expanded_graph(inst.spec, inst.pmfs, inst.origin, inst.destination)
        budgets = _sweep_ticks(inst, args.sweep) if args.sweep else [inst.spec.grid.budget_ticks]
        for mode in modes:
            for b in budgets:
                start = time.perf_counter()
                result = solve(graph, b, mode=mode)
                elapsed = time.perf_counter() - start
                stats = result.stats
                rows.append(
                    {
                        "instance": label,
                        "mode": mode.value,
                        "budget_ticks": b,
                        "root_utility": f"{result.root:.12f}",
                        "wall_time_s": f"{elapsed:.6f}",
                        "station_evals": stats.station_evals,
                        "arrival_evals": stats.arrival_evals,
                        "dom_hits": stats.dom_hits,
                        "prune_boarding_bound": stats.prune_boarding_bound,
                        "prune_candidate_subset": stats.prune_candidate_subset,
                        "prune_cutoff": stats.prune_cutoff,
                        "heuristic_fires": stats.heuristic_board_probability
                        + stats.heuristic_single_line
                        + stats.heuristic_relaxed_cutoff,
                    }
                )
    out = args.out or "bench.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    sys.stdout.write(json.dumps({"out": out, "rows": len(rows)}) + "\n")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from .service import create_app

    networks: dict[str, Instance] = {}
    if args.demo:
        networks["demo"] = single_station_demo()
        networks["corridor"] = three_line_corridor()
    if args.net:
        inst = load_instance(Path(args.net), Path(args.bundle))
        networks[Path(args.net).stem] = inst
    if not networks:
        _fail("nothing to serve: pass --net/--bundle or --demo")
    app = create_app(networks, session_log=args.session_log)
    import uvicorn

    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    inst, _ = _load_named_instance(args)
    budget = _budget_ticks(inst, args.budget)
    value = enumerate_oracle(inst, budget, cap=args.cap)
    _emit({"oracle_utility": value, "budget_ticks": budget}, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="transit-sota",
        description="Adaptive transit routing maximizing on-time arrival probability",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="calibrate a GTFS feed into a network + bundle")
    p.add_argument("--gtfs", required=True, help="GTFS feed directory")
    p.add_argument("--window", default="06:00-10:00")
    p.add_argument("--delta", default="15s")
    p.add_argument("--horizon", default="45m", help="grid horizon (max budget)")
    p.add_argument("--sigma", default="0.25:0.5", help="sigma range lo:hi")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--date", default=None, help="service date YYYYMMDD")
    p.add_argument("--out", required=True, help="bundle output path")
    p.set_defaults(func=cmd_ingest)

    def add_common(p: argparse.ArgumentParser, budget: bool = True) -> None:
        p.add_argument("--net", help="network JSON or built-in name (demo|corridor)")
        p.add_argument("--bundle", help="distribution bundle JSON")
        p.add_argument("--od", help="ORIGIN:DEST (defaults from the network file)")
        if budget:
            p.add_argument("--budget", help="time budget (ticks or duration)")
        p.add_argument("--out", help="output path (default stdout)")

    p = sub.add_parser("solve", help="compute the root utility / a budget sweep")
    add_common(p)
    p.add_argument("--budget-sweep", help="LO:HI:STEP durations, writes CSV")
    p.add_argument("--mode", default="dominance", choices=[m.value for m in SolveMode])
    p.add_argument("--epsilon", type=float, default=0.75)
    p.add_argument("--beta", type=float, default=1.25)
    p.add_argument("--dump-table", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("policy", help="extract the board/wait policy")
    add_common(p)
    p.add_argument("--mode", default="plain", choices=[m.value for m in SolveMode])
    p.set_defaults(func=cmd_policy)

    p = sub.add_parser("simulate", help="Monte Carlo validation of an extracted policy")
    add_common(p)
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", default="plain", choices=[m.value for m in SolveMode])
    p.add_argument("--collision", default="redraw", choices=["redraw", "fail"])
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="adaptive policy vs least-expected-time path")
    add_common(p, budget=False)
    p.add_argument("--sweep", required=True, help="LO:HI:STEP durations")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("bench", help="pruning/time benchmarks across modes")
    p.add_argument("--instances", default="corridor", help="comma list: demo,corridor,low,high,random")
    p.add_argument("--net", help="additionally bench a network file (with --bundle/--od); pass --instances '' to bench only it")
    p.add_argument("--bundle")
    p.add_argument("--od")
    p.add_argument("--n-instances", type=int, default=3)
    p.add_argument("--sweep", default="10m:45m:2.5m")
    p.add_argument("--modes", default="plain,dominance,heuristic")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("oracle", help="exhaustive enumeration value (small instances)")
    add_common(p)
    p.add_argument("--cap", type=int, default=10**6)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("serve", help="run the HTTP advisory service")
    p.add_argument("--net")
    p.add_argument("--bundle")
    p.add_argument("--demo", action="store_true", help="serve the built-in networks")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--session-log", default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        sys.stderr.write(json.dumps({"error": str(exc)}) + "\n")
        return exc.code
    except (OSError, ValueError, KeyError) as exc:
        sys.stderr.write(json.dumps({"error": f"{type(exc).__name__}: {exc}"}) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
