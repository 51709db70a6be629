"""Command-line entry point: ``splitmax {run,gen,diagnose,plot}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .data import ConfigError, DataError, generate_synthetic, load_instance, save_instance
from .diffusion import model_from_name
from .harness import PLOT_KINDS, ExperimentConfig, emit_plot_data, load_config, read_results, results_csv, run_experiment
from .optimizers import ALGORITHMS

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="splitmax", description="Joint billboard-slot and seed-node selection under one budget.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run an algorithm x budget sweep")
    r.add_argument("--config", help="TOML experiment file")
    r.add_argument("--instance", help="instance directory (overrides the config)")
    r.add_argument("--algo", nargs="+", choices=ALGORITHMS)
    r.add_argument("--budget", nargs="+", type=float)
    r.add_argument("--out", help="results CSV (stdout when omitted)")
    r.add_argument("--exact", action="store_true", default=None, help="exact diffusion instead of Monte Carlo")
    r.add_argument("--seed", type=int)
    r.add_argument("--epsilon", type=float)
    r.add_argument("--sims", type=int, help="Monte Carlo worlds R")
    r.add_argument("--prob-model", choices=("uniform", "wc", "trivalency", "explicit"))
    r.add_argument("--pc", type=float)
    r.add_argument("--merge", choices=("rank", "alternate"))
    r.add_argument("--trace", help="write per-step selections as JSON lines")

    g = sub.add_parser("gen", help="write a synthetic instance directory")
    g.add_argument("--users", type=int, required=True)
    g.add_argument("--billboards", type=int, required=True)
    g.add_argument("--edges", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--budget", type=float, default=1000.0)
    g.add_argument("--extent", type=float, default=1000.0)
    g.add_argument("--prob-model", choices=("uniform", "wc", "trivalency"), default="uniform")
    g.add_argument("--pc", type=float, default=0.1)

    d = sub.add_parser("diagnose", help="measure gamma, alpha and the guarantee on a small instance")
    d.add_argument("--instance", required=True)
    d.add_argument("--max-elems", type=int, default=10)
    d.add_argument("--optimum", action="store_true", help="also report the brute-force optimum")

    pl = sub.add_parser("plot", help="turn a results CSV into long-format plot data")
    pl.add_argument("--results", required=True)
    pl.add_argument("--kind", choices=PLOT_KINDS, required=True)
    pl.add_argument("--out", required=True)
    return p


def _run(args) -> int:
    config = load_config(args.config) if args.config else ExperimentConfig()
    config = config.with_overrides(
        algorithms=args.algo,
        budgets=args.budget,
        output=args.out,
        exact=args.exact,
        rng_seed=args.seed,
        epsilon=args.epsilon,
        R=args.sims,
        prob_model=args.prob_model,
        pc=args.pc,
        merge=args.merge,
        trace=args.trace,
        instance_path=args.instance,
    )
    rows = run_experiment(config)
    if not config.output:
        sys.stdout.write(results_csv(rows))
    return EXIT_OK


def _gen(args) -> int:
    inst = generate_synthetic(
        args.users,
        args.billboards,
        args.edges,
        extent=args.extent,
        prob_model=model_from_name(args.prob_model, args.pc, args.seed),
        rng_seed=args.seed,
        budget=args.budget,
    )
    save_instance(inst, args.out)
    return EXIT_OK


def _diagnose(args) -> int:
    from .diagnostics import brute_force_optimum, phi_table, structure_report

    inst = load_instance(args.instance)
    table = phi_table(inst, max_elems=args.max_elems)
    out = structure_report(table).to_dict()
    if args.optimum:
        opt = brute_force_optimum(inst)
        out["optimum"] = {"S": list(opt.best_S), "N": list(opt.best_N), "phi": opt.phi_opt, "pairs": opt.enumerated_count}
    json.dump(out, sys.stdout, indent=1, sort_keys=True)
    sys.stdout.write("\n")
    return EXIT_OK


def _plot(args) -> int:
    emit_plot_data(read_results(args.results), args.kind, args.out)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": _run, "gen": _gen, "diagnose": _diagnose, "plot": _plot}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"splitmax: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, FileNotFoundError) as exc:
        print(f"splitmax: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
