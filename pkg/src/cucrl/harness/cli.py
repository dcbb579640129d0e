"""Command-line entry point: ``cucrl {plan,run,sweep,diag,plot}``.

Exit codes: 0 success, 1 configuration error, 2 solver failure (including an
infeasible oracle problem), 3 the learner's baseline fallback hit its cap.
Parameters come from ``--config`` and flags; flags win.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from ..agents import FeasibilityError
from ..cmdp import CmdpError
from ..lp import SolverError
from . import io
from .config import ConfigError, default_output_dir, load_config
from .experiments import build_env, run_one, sweep
from .metrics import OracleError, oracle_plan, regret_diagnostics
from .plotting import line_chart, save_chart

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_FEASIBILITY = 0, 1, 2, 3

logger = logging.getLogger("cucrl")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON config file")
    p.add_argument("--env", choices=["bandit", "three_state", "gridworld"], help="built-in environment with default parameters")
    p.add_argument("--cmdp", type=Path, help="CMDP JSON document to use as the environment")


def _learning(p: argparse.ArgumentParser) -> None:
    p.add_argument("--agent", choices=["cucrl", "rs_ucrl2"])
    p.add_argument("--delta", type=float)
    p.add_argument("--h", type=int)
    p.add_argument("--K", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--lambda", dest="lam", type=float, nargs="+", help="scalarization weights for rs_ucrl2")
    p.add_argument("--output-dir", type=Path, help="defaults to $CUCRL_OUTPUT_DIR or ./runs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cucrl", description="Constrained UCRL experiments on tabular CMDPs.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="solve the true CMDP and print y, policy, reward and costs")
    _common(p)

    p = sub.add_parser("run", help="run one agent on one environment with one seed")
    _common(p)
    _learning(p)
    p.add_argument("--name", help="run directory name inside the output directory")

    p = sub.add_parser("sweep", help="run a grid of seeds (and lambdas for rs_ucrl2)")
    _common(p)
    _learning(p)
    p.add_argument("--seeds", type=int, nargs="+")
    p.add_argument("--lambdas", type=float, nargs="+", action="append", help="repeat once per lambda vector")
    p.add_argument("--workers", type=int)
    p.add_argument("--name", help="sweep directory name inside the output directory")

    p = sub.add_parser("diag", help="constants of the regret analysis for the environment's baseline")
    _common(p)
    p.add_argument("--delta", type=float)
    p.add_argument("--h", type=int)
    p.add_argument("--K", type=int)

    p = sub.add_parser("plot", help="draw episodes.csv files as SVG line charts")
    p.add_argument("inputs", nargs="+", type=Path, help="episodes.csv files or run directories")
    p.add_argument("--what", choices=["regret", "cost"], default="regret")
    p.add_argument("--budget", type=float, help="draw the budget as a reference line (cost plots)")
    p.add_argument("--out", type=Path, required=True)
    return parser


def _overrides(args) -> dict:
    env = None
    if getattr(args, "cmdp", None) is not None:
        env = {"kind": "cmdp", "path": str(args.cmdp)}
    elif getattr(args, "env", None) is not None:
        env = {"kind": args.env}
        if args.env == "gridworld":
            from ..environments import TWO_ROUTE_MAP

            env["map"] = TWO_ROUTE_MAP
    out = {"env": env}
    for key in ("agent", "delta", "h", "K", "seed", "seeds", "workers"):
        out[key] = getattr(args, key, None)
    out["lambda"] = getattr(args, "lam", None)
    out["lambdas"] = getattr(args, "lambdas", None)
    return out


def _print(doc) -> None:
    print(json.dumps(doc, indent=2))


def _output_dir(args, cfg) -> Path:
    if getattr(args, "output_dir", None) is not None:
        return args.output_dir
    if "output_dir" in cfg:
        return Path(cfg["output_dir"])
    return default_output_dir()


def cmd_plan(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    env = build_env(cfg["env"])
    plan = oracle_plan(env.cmdp)
    y = plan.y.y
    _print(
        {
            "status": plan.status.value,
            "y": y.tolist(),
            "policy": plan.policy.probs.tolist(),
            "J": plan.value,
            "C": (env.cmdp.mean_costs @ y).tolist(),
            "budgets": env.budgets.tolist(),
        }
    )
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    name = args.name or f"{cfg['agent']}_{cfg['env']['kind']}_seed{cfg['seed']}"
    out = _output_dir(args, cfg) / name
    result = run_one(cfg, out)
    flags = np.array([e.violation_flags for e in result.metrics.per_episode])
    _print(
        {
            "output": str(out),
            "T": result.log.T,
            "episodes": len(result.log.episodes),
            "total_regret": result.metrics.total_regret,
            "violation_rate": flags.mean(axis=0).tolist(),
        }
    )
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    name = args.name or f"sweep_{cfg['agent']}_{cfg['env']['kind']}"
    out = _output_dir(args, cfg) / name
    result = sweep(cfg, out, workers=cfg.get("workers", 1))
    _print(
        {
            "output": str(out),
            "runs": len(result.runs),
            "violation_probability": {
                " ".join(f"{v:g}" for v in key) or "constrained": probs.tolist() for key, probs in result.violation.items()
            },
        }
    )
    return EXIT_OK


def cmd_diag(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    env = build_env(cfg["env"])
    baseline = env.baseline
    if "baseline" in cfg:
        from ..cmdp import Policy

        baseline = Policy(np.asarray(cfg["baseline"], dtype=float))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        diag = regret_diagnostics(env.cmdp, baseline, cfg["h"], cfg["K"], cfg["delta"])
    for msg in diag.messages:
        logger.warning(msg)
    _print(diag.to_dict())
    return EXIT_OK


def cmd_plot(args) -> int:
    series = {}
    for path in args.inputs:
        csv_path = path / io.EPISODES_FILE if path.is_dir() else path
        episodes = io.read_episodes(csv_path)
        label = csv_path.parent.name or csv_path.stem
        k = [e.k for e in episodes]
        if args.what == "regret":
            series[label] = (k, [e.cum_regret for e in episodes])
        else:
            m = episodes[0].true_costs.size if episodes else 0
            for i in range(m):
                key = label if m == 1 else f"{label} cost {i}"
                series[key] = (k, [e.true_costs[i] for e in episodes])
    hlines = {"budget": args.budget} if args.budget is not None else None
    ylabel = "cumulative pseudo-regret" if args.what == "regret" else "expected cost of planned policy"
    save_chart(args.out, line_chart(series, title=ylabel, xlabel="episode", ylabel=ylabel, hlines=hlines))
    print(str(args.out))
    return EXIT_OK


COMMANDS = {"plan": cmd_plan, "run": cmd_run, "sweep": cmd_sweep, "diag": cmd_diag, "plot": cmd_plot}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except FeasibilityError as exc:
        logger.error("%s", exc)
        return EXIT_FEASIBILITY
    except (SolverError, OracleError) as exc:
        logger.error("%s", exc)
        return EXIT_SOLVER
    except (ConfigError, CmdpError, ValueError, OSError) as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
