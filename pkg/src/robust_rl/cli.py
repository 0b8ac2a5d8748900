"""Command-line front end: ``robust-rl garnet|sample|solve|evaluate|sweep``.

Exit codes: 0 success, 1 invalid input or usage, 2 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from .baselines import LcbConfig, lcb_penalty
from .data import (DatasetError, behavior_partial, behavior_uniform, estimate_model,
                   load_dataset, random_action, sample_dataset, save_dataset)
from .experiment import emit_tables, load_config, run_sweep, suboptimality_gap
from .garnet import generate_garnet
from .mdp import MdpValidationError, exact_value_iteration, load_mdp, save_mdp, value_iteration_arrays
from .robust import (BERNSTEIN, HOEFFDING, EmpiricalRobustModel, RadiusStyle, RobustSolution,
                     load_solution, radius_table, robust_value_iteration,
                     robust_value_iteration_bernstein, save_solution)

SEED_ENV = "ROBUST_RL_SEED"
SOLVE_METHODS = ("dro-hoeffding", "dro-bernstein", "lcb", "nonrobust")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _default_seed(value):
    if value is not None:
        return value
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def cmd_garnet(args):
    if args.states < 2 or args.actions < 1:
        raise UsageError("--states must be >= 2 and --actions >= 1")
    mdp = generate_garnet(args.states, args.actions, _default_seed(args.seed), gamma=args.gamma)
    save_mdp(mdp, args.out)


def cmd_sample(args):
    mdp = load_mdp(args.mdp)
    if args.n < 1:
        raise UsageError("--n must be a positive integer")
    seed = _default_seed(args.seed)
    if args.coverage == "uniform":
        mu = behavior_uniform(mdp.num_states, mdp.num_actions)
    else:
        _, pi_star = exact_value_iteration(mdp, 1e-10)
        eta = random_action(mdp.num_actions, seed) if args.eta is None else args.eta
        if not 0 <= eta < mdp.num_actions:
            raise UsageError(f"--eta must be in [0, {mdp.num_actions})")
        mu = behavior_partial(pi_star, mdp.num_actions, eta)
    save_dataset(sample_dataset(mdp, mu, args.n, seed), args.out)


def cmd_solve(args):
    if not 0.0 <= args.gamma < 1.0:
        raise UsageError("--gamma must be in [0, 1)")
    if args.tol <= 0:
        raise UsageError("--tol must be positive")
    data = load_dataset(args.mdp_data)
    model = estimate_model(data)
    method = args.method
    if method.startswith("dro"):
        style = RadiusStyle(HOEFFDING if method == "dro-hoeffding" else BERNSTEIN, args.delta)
        if args.radius_override is not None:
            if not 0.0 <= args.radius_override <= 2.0:
                raise UsageError("--radius-override must be in [0, 2]")
            radius = np.full(model.counts.shape, args.radius_override)
        else:
            radius = radius_table(model.counts, style)
        rm = EmpiricalRobustModel(model, radius, style, args.gamma)
        if method == "dro-bernstein":
            sol = robust_value_iteration_bernstein(rm, data, args.tol)
        else:
            sol = robust_value_iteration(rm, args.tol)
    else:
        reward = model.reward
        if method == "lcb":
            cfg = LcbConfig(args.delta, args.lcb_scale)
            reward = np.maximum(0.0, reward - lcb_penalty(model.counts, cfg, args.gamma))
        v, pi, iters, gap = value_iteration_arrays(model.kernel, reward, args.gamma, args.tol)
        residual = 0.0 if args.gamma == 0 else gap * args.gamma / (1 - args.gamma)
        sol = RobustSolution(v, pi, iters, residual, method, args.delta if method == "lcb" else None)
    save_solution(sol, args.out)


def cmd_evaluate(args):
    mdp = load_mdp(args.mdp)
    sol = load_solution(args.policy)
    print(repr(suboptimality_gap(mdp, sol.policy, tol=args.tol)))


def cmd_sweep(args):
    cfg = load_config(args.config)
    if args.base_seed is not None:
        cfg.base_seed = args.base_seed
    elif os.environ.get(SEED_ENV) is not None:
        cfg.base_seed = _default_seed(None)
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    res = run_sweep(cfg, jobs=args.jobs)
    emit_tables(res, args.out_dir)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="robust-rl", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("garnet", help="generate a Garnet MDP")
    g.add_argument("--states", type=int, required=True)
    g.add_argument("--actions", type=int, required=True)
    g.add_argument("--seed", type=int)
    g.add_argument("--gamma", type=float, default=0.95)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_garnet)

    s = sub.add_parser("sample", help="draw an offline dataset from an MDP")
    s.add_argument("--mdp", required=True)
    s.add_argument("--coverage", choices=("uniform", "partial"), default="uniform")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--eta", type=int, help="fixed extra action for partial coverage")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)

    v = sub.add_parser("solve", help="plan on a dataset")
    v.add_argument("--mdp-data", required=True)
    v.add_argument("--method", choices=SOLVE_METHODS, required=True)
    v.add_argument("--delta", type=float, default=0.1)
    v.add_argument("--gamma", type=float, default=0.95)
    v.add_argument("--tol", type=float, default=1e-8)
    v.add_argument("--lcb-scale", type=float, default=1.0)
    v.add_argument("--radius-override", type=float, help=argparse.SUPPRESS)
    v.add_argument("--out", required=True)
    v.set_defaults(func=cmd_solve)

    e = sub.add_parser("evaluate", help="print the sub-optimality gap of a solution")
    e.add_argument("--mdp", required=True)
    e.add_argument("--policy", required=True)
    e.add_argument("--tol", type=float, default=1e-10)
    e.set_defaults(func=cmd_evaluate)

    w = sub.add_parser("sweep", help="run a dataset-size sweep and write CSV tables")
    w.add_argument("--config", required=True)
    w.add_argument("--out-dir", required=True)
    w.add_argument("--jobs", type=int, default=1)
    w.add_argument("--base-seed", type=int)
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except (UsageError, MdpValidationError, DatasetError, ValueError,
            FileNotFoundError, json.JSONDecodeError, KeyError, TypeError) as exc:
        print(f"robust-rl {args.command}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"robust-rl {args.command}: internal error: {exc!r}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
