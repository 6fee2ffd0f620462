"""Command-line front end.

Subcommands:
  simulate        run the Monte Carlo experiment from a config file -> CSV
  theory          emit the analytic benchmark curves -> CSV
  graph-stats     sample topologies, summarize component sizes and the
                  collaboration bound
  corollary-check evaluate the noise-variance bound on the pinned topology

Exit codes: 0 success, 2 invalid config, 3 graph generation failure, 4 I/O.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .experiments import (corollary_holds, emit_csv, load_config,
                          pinned_topology, run, sim_series, structure_for,
                          theory_series, topology_for_replica)
from .topology import GenerationError, corollary_rhs


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="colme")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the experiment and write a CSV")
    sim.add_argument("--config", required=True)
    sim.add_argument("--override", action="append", default=[], metavar="K=V")
    sim.add_argument("--out", required=True)

    theo = sub.add_parser("theory", help="write the analytic curves as CSV")
    theo.add_argument("--config", required=True)
    theo.add_argument("--override", action="append", default=[], metavar="K=V")
    theo.add_argument("--out", required=True)

    stats = sub.add_parser("graph-stats", help="component-size statistics over topology draws")
    stats.add_argument("--config", required=True)
    stats.add_argument("--override", action="append", default=[], metavar="K=V")
    stats.add_argument("--samples", type=int, default=100)

    cor = sub.add_parser("corollary-check", help="noise bound on the pinned topology")
    cor.add_argument("--config", required=True)
    cor.add_argument("--override", action="append", default=[], metavar="K=V")
    return parser


def _cmd_simulate(args) -> int:
    config = load_config(args.config, args.override)
    result = run(config)
    emit_csv([sim_series(result)], args.out)
    print(f"wrote {args.out}: rule={config.rule.kind} replicas={config.replicas} "
          f"t_max={config.t_max}")
    return 0


def _cmd_theory(args) -> int:
    config = load_config(args.config, args.override)
    emit_csv(theory_series(config), args.out)
    print(f"wrote {args.out}: theory-local, theory-ideal, theory-thm1")
    return 0


def _cmd_graph_stats(args) -> int:
    config = load_config(args.config, args.override)
    sigma_sq_of = np.full(config.num_agents, config.sigma**2)
    sizes: list[int] = []
    rhs_values = []
    for i in range(args.samples):
        graph, class_of = topology_for_replica(config, i)
        structure = structure_for(config, graph, class_of)
        sizes.extend(structure.component_size.tolist())
        rhs_values.append(corollary_rhs(structure, sigma_sq_of))
    counts = np.bincount(np.asarray(sizes))
    print(f"samples={args.samples} M={config.num_agents} r={config.degree}")
    print("n_a  agents")
    for n in np.flatnonzero(counts).tolist():
        print(f"{n:4d}  {int(counts[n])}")
    finite = [x for x in rhs_values if math.isfinite(x)]
    mean_rhs = float(np.mean(finite)) if finite else math.inf
    print(f"mean corollary_rhs = {mean_rhs:.6g}")
    return 0


def _cmd_corollary_check(args) -> int:
    config = load_config(args.config, args.override)
    graph, class_of = pinned_topology(config)
    structure = structure_for(config, graph, class_of)
    sigma_sq_of = np.full(config.num_agents, config.sigma**2)
    privacy = config.privacy()
    rhs = corollary_rhs(structure, sigma_sq_of)
    holds = corollary_holds(structure, sigma_sq_of, privacy)
    print(f"rhs = {rhs:.6g}")
    print(f"sigma_dp_sq = {privacy.sigma_dp_sq:.6g}")
    print(f"verdict = {'holds' if holds else 'violated'}")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "theory": _cmd_theory,
    "graph-stats": _cmd_graph_stats,
    "corollary-check": _cmd_corollary_check,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ValueError as exc:  # ConfigError included
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GenerationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
