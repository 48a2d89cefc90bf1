"""Command line interface.

Three subcommands:

- simulate: roll one policy through one episode, writing the trajectory and
  (optionally) the drawn inflow traces
- optimize: run the evolutionary policy search, writing the solution set,
  the nondominated genomes, and the hypervolume convergence series
- report: compare solution-set CSVs with a metrics table and a
  parallel-coordinates figure

Exit codes: 0 on success, 2 for usage or configuration problems, 1 for
anything unexpected. Every output directory gets a manifest.json describing
what produced it.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import traceback
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .basin import month_of_step, seconds_in_month
from .config import ENV_CONFIG_VAR, FullConfig, load_config
from .emodps import run_emodps
from .env import REWARD_NAMES, NileEnv, rollout
from .errors import ConfigurationError, UsageError
from .fileio import (RunManifest, objective_headers, read_solution_set_csv,
                     write_convergence_csv, write_csv, write_inflow_trace_csv,
                     write_solution_set_csv, write_trajectory_csv)
from .policy import decode_genome, genome_length
from .report import build_report, format_table

PACKAGE = "nile-momdp"


def _labeled_set(text: str) -> tuple[str, str]:
    label, sep, path = text.partition("=")
    if not sep or not label or not path:
        raise argparse.ArgumentTypeError(
            f"expected LABEL=PATH, got {text!r}")
    return label, path


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PACKAGE,
        description="Multi-reservoir river operation as a four-objective MDP: "
                    "simulate, optimize, report.")
    parser.add_argument("--version", action="version", version=f"{PACKAGE} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None,
                        help=f"configuration YAML (default: ${ENV_CONFIG_VAR}, "
                             f"then the packaged basin)")
    common.add_argument("--out", required=True, help="output directory")

    sim = sub.add_parser("simulate", parents=[common],
                         help="run one episode under a fixed policy")
    sim.add_argument("--seed", type=int, default=0, help="episode seed (default 0)")
    sim.add_argument("--policy", choices=("constant", "rbf"), default="constant")
    sim.add_argument("--fraction", type=float, default=0.5,
                     help="release fraction for --policy constant (default 0.5)")
    sim.add_argument("--policy-file", default=None,
                     help="JSON genome (flat array, or array of genomes) for --policy rbf")
    sim.add_argument("--genome-index", type=int, default=0,
                     help="which genome to use when --policy-file holds several")
    sim.add_argument("--inflow-traces", action="store_true",
                     help="also write the drawn inflow trace of every source")

    opt = sub.add_parser("optimize", parents=[common],
                         help="evolutionary multi-objective policy search")
    opt.add_argument("--seed", type=int, default=0, help="run seed (default 0)")
    opt.add_argument("--workers", type=int, default=1,
                     help="parallel evaluation processes (results do not depend on this)")
    opt.add_argument("--eval-episodes", type=int, default=1,
                     help="episodes averaged per evaluation (default 1)")
    opt.add_argument("--nfe", type=int, default=None, help="override emodps.nfe")
    opt.add_argument("--pop", type=int, default=None, help="override emodps.pop")
    opt.add_argument("--n-rbf", type=int, default=None, help="override emodps.n_rbf")

    rep = sub.add_parser("report", parents=[common],
                         help="compare solution-set CSVs")
    rep.add_argument("--set", dest="sets", type=_labeled_set, action="append",
                     required=True, metavar="LABEL=PATH",
                     help="a solution set to include (repeatable)")
    rep.add_argument("--reference", type=_float_list, default=None,
                     help="shared reference point, comma separated")
    rep.add_argument("--objective-names", type=lambda s: s.split(","), default=None,
                     help="axis labels, comma separated")
    return parser


def _load_genome(args, config: FullConfig) -> np.ndarray:
    if args.policy_file is None:
        raise ConfigurationError("--policy rbf requires --policy-file")
    try:
        with open(args.policy_file, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
    except OSError as exc:
        raise ConfigurationError(f"cannot read {args.policy_file!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{args.policy_file}: invalid JSON: {exc}") from exc
    if isinstance(payload, dict) and "genomes" in payload:
        payload = payload["genomes"]
    arr = np.asarray(payload, dtype=float)
    if arr.ndim == 2:
        if not 0 <= args.genome_index < len(arr):
            raise ConfigurationError(
                f"--genome-index {args.genome_index} out of range for {len(arr)} genomes")
        arr = arr[args.genome_index]
    if arr.ndim != 1:
        raise ConfigurationError(f"{args.policy_file}: expected a flat genome "
                                 f"or a list of genomes")
    return arr


def cmd_simulate(args) -> int:
    config = load_config(args.config)
    env = NileEnv(config)
    if args.policy == "constant":
        if not 0.0 <= args.fraction <= 1.0:
            raise ConfigurationError("--fraction must be in [0, 1]")
        fraction = args.fraction
        action = np.full(env.action_dim, fraction)
        policy = lambda obs: action  # noqa: E731
        policy_desc = {"policy": "constant", "fraction": fraction}
    else:
        genome = _load_genome(args, config)
        expected = genome_length(config.moea.n_rbf, env.observation_dim, env.action_dim)
        if genome.shape != (expected,):
            raise ConfigurationError(
                f"genome length {genome.shape[0]} does not match configuration "
                f"(need {expected} for {config.moea.n_rbf} basis functions)")
        policy = decode_genome(genome, config.moea.n_rbf, env.observation_dim,
                               env.action_dim)
        policy_desc = {"policy": "rbf", "n_rbf": config.moea.n_rbf}

    objectives, rows = rollout(env, policy, seed=args.seed, collect=True)

    os.makedirs(args.out, exist_ok=True)
    outputs = ["trajectory.csv"]
    write_trajectory_csv(os.path.join(args.out, "trajectory.csv"),
                         config.basin.reservoir_order(), REWARD_NAMES, rows)
    if args.inflow_traces:
        for name, volumes in zip(config.basin.inflow_order(), env.inflow_volumes()):
            flows = [float(v) / seconds_in_month(month_of_step(t))
                     for t, v in enumerate(volumes)]
            filename = f"inflow_{name}.csv"
            write_inflow_trace_csv(os.path.join(args.out, filename), flows)
            outputs.append(filename)

    RunManifest(command="simulate", package=PACKAGE, version=__version__,
                seed=args.seed, config_source=config.source,
                parameters={**policy_desc, "horizon": env.horizon},
                outputs=outputs).write(args.out)
    labels = ", ".join(f"{n}={float(v):.6f}" for n, v in zip(REWARD_NAMES, objectives))
    print(f"episode objectives: {labels}")
    print(f"wrote {args.out}/trajectory.csv")
    return 0


def cmd_optimize(args) -> int:
    config = load_config(args.config)
    moea = config.moea
    overrides = {}
    if args.nfe is not None:
        overrides["nfe"] = args.nfe
    if args.pop is not None:
        overrides["pop"] = args.pop
    if args.n_rbf is not None:
        overrides["n_rbf"] = args.n_rbf
    if overrides:
        moea = dataclasses.replace(moea, **overrides)
        config = dataclasses.replace(config, moea=moea)

    result = run_emodps(config, seed=args.seed, workers=args.workers,
                        eval_episodes=args.eval_episodes)

    os.makedirs(args.out, exist_ok=True)
    write_solution_set_csv(os.path.join(args.out, "solution_set.csv"),
                           result.objectives, REWARD_NAMES)
    write_convergence_csv(os.path.join(args.out, "convergence.csv"), result.convergence)
    genomes_path = os.path.join(args.out, "genomes.json")
    with open(genomes_path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump({"n_rbf": moea.n_rbf,
                   "genomes": [[float(g) for g in genome] for genome in result.genomes]},
                  handle, indent=2, sort_keys=True)
        handle.write("\n")

    RunManifest(command="optimize", package=PACKAGE, version=__version__,
                seed=args.seed, config_source=config.source,
                parameters={"nfe": moea.nfe, "pop": moea.pop, "n_rbf": moea.n_rbf,
                            "eta_c": moea.eta_c, "eta_m": moea.eta_m,
                            "eval_episodes": args.eval_episodes,
                            "nfe_used": result.nfe_used,
                            "reference": list(result.reference)},
                outputs=["solution_set.csv", "convergence.csv", "genomes.json"]
                ).write(args.out)
    final_hv = result.convergence[-1][1]
    print(f"nfe used: {result.nfe_used}")
    print(f"archive size: {len(result.objectives)}")
    print(f"final hypervolume: {final_hv!r}")
    return 0


def cmd_report(args) -> int:
    labeled = []
    for label, path in args.sets:
        labeled.append((label, read_solution_set_csv(path)))
    dims = {points.shape[1] for _, points in labeled}
    if len(dims) != 1:
        raise ConfigurationError(f"solution sets disagree on objective count: {sorted(dims)}")
    d = dims.pop()
    if args.objective_names is not None:
        names = args.objective_names
        if len(names) != d:
            raise ConfigurationError(f"--objective-names needs {d} entries")
    elif d == len(REWARD_NAMES):
        names = [n.upper() for n in REWARD_NAMES]
    else:
        names = [f"obj_{i + 1}" for i in range(d)]
    if args.reference is not None and len(args.reference) != d:
        raise ConfigurationError(f"--reference needs {d} entries")

    bundle = build_report(labeled, names, args.reference)

    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "parallel_coordinates.svg"), "w",
              encoding="utf-8", newline="\n") as handle:
        handle.write(bundle.svg)
    table_text = format_table(bundle.rows)
    with open(os.path.join(args.out, "table.txt"), "w", encoding="utf-8",
              newline="\n") as handle:
        handle.write(table_text)
    write_csv(os.path.join(args.out, "table.csv"),
              ["set", "hypervolume", "pct_of_best", "cardinality", "sparsity"],
              [[r.label, r.hypervolume, r.pct_of_best, r.cardinality, r.sparsity]
               for r in bundle.rows])
    write_solution_set_csv(os.path.join(args.out, "merged_solution_set.csv"),
                           bundle.merged,
                           REWARD_NAMES if d == len(REWARD_NAMES) else None)

    RunManifest(command="report", package=PACKAGE, version=__version__,
                seed=None, config_source="<none>",
                parameters={"sets": [label for label, _ in args.sets],
                            "reference": list(bundle.reference)},
                outputs=["parallel_coordinates.svg", "table.txt", "table.csv",
                         "merged_solution_set.csv"]).write(args.out)
    print(table_text, end="")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"simulate": cmd_simulate, "optimize": cmd_optimize,
                "report": cmd_report}
    try:
        return handlers[args.command](args)
    except (ConfigurationError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        print("internal error", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
