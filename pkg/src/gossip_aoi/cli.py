"""Command-line harness: solve / fpp / simulate / lattice / compare.

Every command emits a versioned report (JSON by default, CSV with
--format csv) to stdout or --out.  Reports are deterministic for a fixed
seed — including across --workers settings — so the wall-clock runtime is
logged to stderr rather than embedded in the document.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Sequence

from . import __version__, fpp, lattice, moments, reporting, simulate
from .montecarlo import check_seed
from .network import GossipNetwork, NetworkConfigError, NodeSubset, load_network
from .reporting import SCHEMA_VERSION, TOOL_NAME

WORKERS_ENV = "GOSSIP_AOI_WORKERS"


@dataclass(frozen=True)
class RunConfig:
    """Resolved, result-affecting parameters of one CLI invocation."""

    command: str
    network: str | None = None
    subset: tuple[int, ...] | None = None
    k: int | None = None
    samples: int | None = None
    replicas: int | None = None
    horizon: float | None = None
    burn_in: float | None = None
    mode: str | None = None
    d: int | None = None
    ell: int | None = None
    se_threshold: float | None = None
    seed: int = 0

    def echo(self) -> dict[str, Any]:
        return {key: value for key, value in asdict(self).items() if value is not None}


def _parse_subset(text: str) -> tuple[int, ...]:
    try:
        ids = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"subset must be comma-separated integers, got {text!r}")
    if not ids:
        raise argparse.ArgumentTypeError("subset must contain at least one node id")
    return ids


def _default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=TOOL_NAME,
        description="Age-of-information moments for gossip networks: exact recursion, "
        "first-passage sampling, event-driven simulation, and lattice boxes.",
    )
    parser.add_argument("--version", action="version", version=f"{TOOL_NAME} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (default 0, always recorded)")
    common.add_argument("--workers", type=int, default=None, help=f"parallel workers (default ${WORKERS_ENV} or 1)")
    common.add_argument("--format", choices=("json", "csv"), default="json", help="report format")
    common.add_argument("--out", type=str, default=None, help="write the report here instead of stdout")

    networked = argparse.ArgumentParser(add_help=False)
    networked.add_argument("--network", type=str, required=True, help="path to a network JSON document")
    networked.add_argument("--k", type=int, default=1, help="highest moment order (default 1)")

    p = sub.add_parser("solve", parents=[common, networked], help="exact subset moments")
    p.add_argument("--subset", type=_parse_subset, default=None,
                   help="node ids, e.g. 1,2; omit for the full exhaustive table")
    p.add_argument("--memo-limit", type=int, default=moments.DEFAULT_MEMO_LIMIT,
                   help="abort after this many memoized subsets")

    p = sub.add_parser("fpp", parents=[common, networked], help="first-passage Monte-Carlo moments")
    p.add_argument("--subset", type=_parse_subset, required=True)
    p.add_argument("--samples", type=int, default=100_000, help="independent weight samples")

    p = sub.add_parser("simulate", parents=[common, networked], help="event-driven simulation moments")
    p.add_argument("--subset", type=_parse_subset, required=True)
    p.add_argument("--mode", choices=("replication", "timeavg"), default="replication")
    p.add_argument("--replicas", type=int, default=10_000, help="replication mode: replica count")
    p.add_argument("--horizon", type=float, default=None,
                   help="end time; default for replication is 3x the worst pilot t0, "
                   "required for timeavg")
    p.add_argument("--burn-in", type=float, default=None,
                   help="timeavg mode: averaging start (default 2x the worst pilot t0)")
    p.add_argument("--trace", type=str, default=None,
                   help="timeavg mode: also write an event-trace CSV to this path")

    p = sub.add_parser("lattice", parents=[common], help="lattice box passage values")
    p.add_argument("--d", type=int, required=True, help="lattice dimension")
    p.add_argument("--ell", type=int, required=True, help="box radius")
    p.add_argument("--samples", type=int, default=100_000, help="Monte-Carlo cross-check samples")

    p = sub.add_parser("compare", parents=[common, networked],
                       help="solver vs both Monte-Carlo oracles, with z-scores")
    p.add_argument("--subset", type=_parse_subset, required=True)
    p.add_argument("--samples", type=int, default=100_000, help="first-passage samples")
    p.add_argument("--replicas", type=int, default=10_000, help="simulation replicas")
    p.add_argument("--horizon", type=float, default=None,
                   help="simulation horizon (default 3x the worst pilot t0)")
    p.add_argument("--se-threshold", type=float, default=4.0,
                   help="fail when any |z| exceeds this many standard errors")

    return parser


def _document(config: RunConfig, results: dict[str, Any]) -> dict[str, Any]:
    return {
        "schema": SCHEMA_VERSION,
        "tool": TOOL_NAME,
        "version": __version__,
        "command": config.command,
        "seed": config.seed,
        "config": config.echo(),
        "results": results,
    }


def _csv_preamble(config: RunConfig) -> str:
    import json

    echo = json.dumps(reporting.json_ready(config.echo()), sort_keys=True, separators=(",", ":"))
    return f"# {TOOL_NAME} {__version__} schema={SCHEMA_VERSION} config={echo}\n"


def _emit(config: RunConfig, results: dict[str, Any], header: Sequence[str],
          rows: Sequence[Sequence[Any]], fmt: str, out: str | None) -> None:
    if fmt == "json":
        text = reporting.render_json(_document(config, results))
    else:
        text = reporting.render_csv(header, rows, preamble=_csv_preamble(config))
    reporting.write_text(text, out)


def _load(path: str) -> GossipNetwork:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise NetworkConfigError(f"cannot read network file {path}: {exc}") from exc
    return load_network(text)


def _resolve_horizon(net: GossipNetwork, subset, horizon: float | None, seed: int) -> float:
    if horizon is not None:
        return horizon
    return 3.0 * max(simulate.pilot_t0(net, subset, seed=seed))


# ---- command handlers -------------------------------------------------------


def _cmd_solve(args: argparse.Namespace) -> int:
    net = _load(args.network)
    config = RunConfig(command="solve", network=args.network, subset=args.subset,
                       k=args.k, seed=check_seed(args.seed))
    solver = moments.MomentSolver(net, args.k, memo_limit=args.memo_limit)
    if args.subset is not None:
        vector = solver.solve(args.subset)
        results: dict[str, Any] = {
            "subset": list(net.check_subset(args.subset).ids()),
            "moments": [{"k": k, "value": vector[k]} for k in range(1, args.k + 1)],
        }
        rows: list[list[Any]] = [[k, vector[k]] for k in range(1, args.k + 1)]
        header = ["k", "value"]
    else:
        table = solver.solve_all()
        results = {"entries": len(table.entries), "table": table.json_map()}
        rows = table.csv_rows()
        header = table.csv_header()
    if solver.zero_rate_subsets:
        results["zero_rate_subsets"] = [",".join(map(str, s.ids())) for s in solver.zero_rate_subsets]
    _emit(config, results, header, rows, args.format, args.out)
    return 0


def _cmd_fpp(args: argparse.Namespace) -> int:
    net = _load(args.network)
    config = RunConfig(command="fpp", network=args.network, subset=args.subset,
                       k=args.k, samples=args.samples, seed=check_seed(args.seed))
    estimates = fpp.estimate_moments(net, args.subset, args.k, args.samples,
                                     seed=args.seed, workers=args.workers)
    results = {
        "subset": list(net.check_subset(args.subset).ids()),
        "estimates": reporting.estimate_payload(estimates),
    }
    _emit(config, results, ["k", "mean", "std_error", "samples"],
          reporting.estimate_rows(estimates), args.format, args.out)
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    net = _load(args.network)
    seed = check_seed(args.seed)
    subset = net.check_subset(args.subset)
    if args.mode == "replication":
        if args.trace is not None:
            raise NetworkConfigError("--trace requires --mode timeavg (a single trajectory)")
        horizon = _resolve_horizon(net, subset, args.horizon, seed)
        config = RunConfig(command="simulate", network=args.network, subset=args.subset,
                           k=args.k, replicas=args.replicas, horizon=horizon,
                           mode=args.mode, seed=seed)
        result = simulate.replication_results(net, [subset], args.k, args.replicas,
                                              horizon, seed=seed, workers=args.workers)[subset]
        if result.pending > simulate.PENDING_TOLERANCE * args.replicas:
            raise simulate.PendingReplicasError(
                f"{result.pending} of {args.replicas} replicas never fully informed "
                f"subset {subset} by horizon {horizon}; raise --horizon"
            )
        estimates = list(result.estimates)
        results = {
            "subset": list(subset.ids()),
            "mode": args.mode,
            "replicas": result.replicas,
            "pending": result.pending,
            "estimates": reporting.estimate_payload(estimates),
        }
    else:
        if args.horizon is None:
            raise NetworkConfigError("--mode timeavg requires --horizon")
        burn_in = args.burn_in
        if burn_in is None:
            burn_in = 2.0 * max(simulate.pilot_t0(net, subset, seed=seed))
        config = RunConfig(command="simulate", network=args.network, subset=args.subset,
                           k=args.k, horizon=args.horizon, burn_in=burn_in,
                           mode=args.mode, seed=seed)
        trace: list[simulate.SimEvent] | None = [] if args.trace else None
        estimates = simulate.estimate_moments_timeavg(net, subset, args.k, args.horizon,
                                                      burn_in, seed=seed, trace=trace)
        if args.trace:
            trace_rows = [
                [e.time, e.edge.from_node, e.edge.to_node, e.new_timestamp] for e in trace or []
            ]
            reporting.write_text(
                reporting.render_csv(["time", "from", "to", "new_timestamp"], trace_rows),
                args.trace,
            )
        results = {
            "subset": list(subset.ids()),
            "mode": args.mode,
            "batches": simulate.TIMEAVG_BATCHES,
            "estimates": reporting.estimate_payload(estimates),
        }
    _emit(config, results, ["k", "mean", "std_error", "samples"],
          reporting.estimate_rows(estimates), args.format, args.out)
    return 0


def _cmd_lattice(args: argparse.Namespace) -> int:
    seed = check_seed(args.seed)
    config = RunConfig(command="lattice", d=args.d, ell=args.ell,
                       samples=args.samples, seed=seed)
    exact = lattice.time_constant_estimate(args.d, args.ell)
    mc = lattice.mc_boundary_passage(args.d, args.ell, args.samples,
                                     seed=seed, workers=args.workers)
    results = {
        "d": exact.d,
        "ell": exact.ell,
        "raw": exact.raw,
        "normalized": exact.normalized,
        "mc_mean": mc.mean,
        "mc_se": mc.std_error,
        "samples": mc.sample_count,
    }
    header = ["d", "ell", "raw", "normalized", "mc_mean", "mc_se", "samples"]
    rows = [[results[key] for key in header]]
    _emit(config, results, header, rows, args.format, args.out)
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    net = _load(args.network)
    seed = check_seed(args.seed)
    subset = net.check_subset(args.subset)
    horizon = _resolve_horizon(net, subset, args.horizon, seed)
    config = RunConfig(command="compare", network=args.network, subset=args.subset,
                       k=args.k, samples=args.samples, replicas=args.replicas,
                       horizon=horizon, se_threshold=args.se_threshold, seed=seed)
    vector = moments.solve_moments(net, subset, args.k)
    fpp_estimates = fpp.estimate_moments(net, subset, args.k, args.samples,
                                         seed=seed, workers=args.workers)
    sim_estimates = simulate.estimate_moments_replication(net, subset, args.k, args.replicas,
                                                          horizon, seed=seed, workers=args.workers)
    rows = reporting.build_compare_rows(vector, fpp_estimates, sim_estimates, args.se_threshold)
    all_pass = all(row.passed for row in rows)
    results = {
        "subset": list(subset.ids()),
        "threshold": args.se_threshold,
        "rows": [asdict(row) for row in rows],
        "pass": all_pass,
    }
    header = ["k", "solver", "fpp_mean", "fpp_se", "fpp_z", "sim_mean", "sim_se", "sim_z", "pass"]
    csv_rows = [
        [r.k, r.solver, r.fpp_mean, r.fpp_se, r.fpp_z, r.sim_mean, r.sim_se, r.sim_z, r.passed]
        for r in rows
    ]
    _emit(config, results, header, csv_rows, args.format, args.out)
    return 0 if all_pass else 1


_HANDLERS = {
    "solve": _cmd_solve,
    "fpp": _cmd_fpp,
    "simulate": _cmd_simulate,
    "lattice": _cmd_lattice,
    "compare": _cmd_compare,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", None) is None:
        args.workers = _default_workers()
    start = time.perf_counter()
    try:
        code = _HANDLERS[args.command](args)
    except (NetworkConfigError, ValueError, RuntimeError) as exc:
        print(f"{TOOL_NAME}: error: {exc}", file=sys.stderr)
        return 2
    elapsed = time.perf_counter() - start
    print(f"{TOOL_NAME}: {args.command} finished in {elapsed:.3f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
