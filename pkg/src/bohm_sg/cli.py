"""Command-line entry point: ``bohm-sg {trajectories,ensemble,verify-reduction,preset-list}``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace

from .config import PRESETS, ParseError, UnknownFigure, figure_preset, parse_config, with_outputs
from .ensemble import AmbiguousOutcome, run_ensemble, run_trajectories
from .full import FULL_MODEL_MAX_N
from .integrator import IntegrationConfig, StepFailure
from .output import IoError, render_svg, write_summary_json, write_trajectories_csv
from .params import ModelParams, SpinWeights, ValidationError, validate_params
from .verify import compare_reduction

SEED_ENV = "BOHM_SEED"


def _read_config(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def _seed(arg: int | None) -> int | None:
    if arg is not None:
        return arg
    env = os.environ.get(SEED_ENV)
    if env is None:
        return None
    try:
        return int(env)
    except ValueError:
        raise ParseError(f"{SEED_ENV}={env!r} is not an integer") from None


def cmd_trajectories(args) -> int:
    cfg = _read_config(args.config) if args.config else figure_preset(args.preset)
    cfg = with_outputs(cfg, csv_path=args.out_csv, svg_path=args.out_svg)
    seed = _seed(args.seed)
    if seed is not None:
        cfg = replace(cfg, ic=replace(cfg.ic, seed=seed))
    trajs = run_trajectories(cfg.params, cfg.ic, cfg.integration)
    out = cfg.outputs
    if out.csv_path or not out.any():
        write_trajectories_csv(trajs, out.csv_path or "-")
    if out.svg_path:
        render_svg(trajs, out.svg_path, include_pointers=not args.no_pointers, title=args.preset)
    return 0


def cmd_ensemble(args) -> int:
    cfg = _read_config(args.config)
    ic = cfg.ic
    seed = _seed(args.seed)
    if seed is not None:
        ic = replace(ic, seed=seed)
    if args.runs is not None:
        if ic.mode != "equilibrium":
            raise ValidationError("--runs needs ic.mode=equilibrium in the config")
        ic = replace(ic, count=args.runs)
    summary = run_ensemble(cfg.params, ic, cfg.integration, workers=args.workers)
    write_summary_json(summary, args.out_json or cfg.outputs.summary_path or "-")
    return 0


def cmd_verify(args) -> int:
    if not 1 <= args.n <= FULL_MODEL_MAX_N:
        raise ValidationError(f"--n must lie in [1, {FULL_MODEL_MAX_N}]")
    p = validate_params(
        ModelParams(
            v_prime=args.v_prime,
            V_prime=args.V_prime,
            eta=args.eta,
            n_pointer=args.n,
            spin=SpinWeights.from_polarization(args.sigma),
        )
    )
    seed = _seed(args.seed)
    cfg = IntegrationConfig.for_params(p, t_max=args.t_max, rel_tol=args.rel_tol, abs_tol=args.abs_tol)
    rep = compare_reduction(p, 0 if seed is None else seed, cfg)
    ok = rep.max_deviation <= args.tol
    print(f"n={rep.n_pointer} seed={rep.seed} rel_tol={cfg.rel_tol:g}")
    print(f"max |dQ'|      = {rep.max_dev_q:.3e}")
    print(f"max |dZhat1'|  = {rep.max_dev_zhat1:.3e}")
    print(f"max |dZhat2'|  = {rep.max_dev_zhat2:.3e}")
    print(f"{'PASS' if ok else 'FAIL'} (tol {args.tol:g}, {rep.seconds:.2f} s)")
    return 0 if ok else 1


def cmd_presets(args) -> int:
    print(f"{'id':<16} {'sigma':>6} {'V_prime':>8} {'N':>8}  {'zhat0':<14} caption")
    for name, pr in PRESETS.items():
        z = f"({pr.zhat0[0]:g}, {pr.zhat0[1]:g})"
        print(f"{name:<16} {pr.sigma:>6g} {pr.V_prime:>8g} {pr.n_pointer:>8d}  {z:<14} {pr.caption}")
    print("all presets: v_prime=10, eta=1, 41 Q'(0) values over [-1.5, 1.5]")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bohm-sg", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("trajectories", help="integrate a configuration or figure preset")
    src = tr.add_mutually_exclusive_group(required=True)
    src.add_argument("--config")
    src.add_argument("--preset", choices=sorted(PRESETS))
    tr.add_argument("--out-csv")
    tr.add_argument("--out-svg")
    tr.add_argument("--seed", type=int)
    tr.add_argument("--no-pointers", action="store_true", help="draw only the Q' panel")
    tr.set_defaults(func=cmd_trajectories)

    en = sub.add_parser("ensemble", help="Born-rule experiment over equilibrium draws")
    en.add_argument("--config", required=True)
    en.add_argument("--runs", type=int)
    en.add_argument("--seed", type=int)
    en.add_argument("--out-json")
    en.add_argument("--workers", type=int, default=1)
    en.set_defaults(func=cmd_ensemble)

    vr = sub.add_parser("verify-reduction", help="full vs reduced model from matched initial states")
    vr.add_argument("--n", type=int, required=True)
    vr.add_argument("--seed", type=int)
    vr.add_argument("--tol", type=float, default=1e-6)
    vr.add_argument("--sigma", type=float, default=0.0)
    vr.add_argument("--v-prime", dest="v_prime", type=float, default=10.0)
    vr.add_argument("--V-prime", dest="V_prime", type=float, default=10.0)
    vr.add_argument("--eta", type=float, default=1.0)
    vr.add_argument("--t-max", dest="t_max", type=float, default=1.0)
    vr.add_argument("--rel-tol", dest="rel_tol", type=float, default=1e-9)
    vr.add_argument("--abs-tol", dest="abs_tol", type=float, default=1e-12)
    vr.set_defaults(func=cmd_verify)

    pl = sub.add_parser("preset-list", help="list figure presets")
    pl.set_defaults(func=cmd_presets)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ParseError, ValidationError, UnknownFigure, IoError, StepFailure, AmbiguousOutcome) as exc:
        print(f"bohm-sg: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
