"""Command-line entry point: ``fadesched <command> ...``.

Exit status: 0 on success, 1 when validation fails, 2 on bad arguments or
configuration.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .asymptotics import (
    Moment,
    alpha_moment,
    theorem2_value,
    theorem3_value,
    theorem4_value,
)
from .error_exponent import exponent_exact_mc, exponent_theorem1
from .fading_channel import FadingParams
from .link_optimizer import (
    LinkOptimizerError,
    OptimalityInputs,
    integer_operating_point,
    solve_operating_point,
)
from .sim_harness import ConfigError, SweepConfig, load_config, run_sweep
from .validation import DEFAULT_SEED, validate

EXIT_OK, EXIT_FAILED, EXIT_BAD_CONFIG = 0, 1, 2


def _float_list(text):
    return [float(t) for t in text.split(",") if t.strip()]


def _int_list(text):
    out = []
    for t in text.split(","):
        t = t.strip()
        if not t:
            continue
        v = float(t)
        if not v.is_integer():
            raise argparse.ArgumentTypeError(f"not an integer: {t!r}")
        out.append(int(v))
    return out


def _rho_grid(text):
    """Either a comma list or ``start:stop:count``."""
    if ":" in text:
        start, stop, count = text.split(":")
        return list(np.linspace(float(start), float(stop), int(count)))
    return _float_list(text)


def _fmt(x):
    return "%.17g" % x


def cmd_exponent(args):
    params = FadingParams(args.alpha)
    rng = np.random.default_rng(args.seed)
    print("rho,value,std_error")
    for rho in args.rho_grid:
        if args.mode == "exact_mc":
            est = exponent_exact_mc(rho, args.u0, params, args.n, args.power, args.samples, rng)
        else:
            est = exponent_theorem1(rho, args.u0, params, args.n, args.power)
        print(f"{_fmt(rho)},{_fmt(est.value)},{_fmt(est.std_error)}")
    return EXIT_OK


def cmd_optimize(args):
    inputs = OptimalityInputs(args.u0, args.alpha, args.power)
    try:
        relaxed = solve_operating_point(inputs)
        rounded = integer_operating_point(inputs, relaxed) if args.alpha < 1 else relaxed
    except LinkOptimizerError as exc:
        print(f"no operating point: {exc}", file=sys.stderr)
        return EXIT_FAILED
    print("design,rate,length,rho,throughput")
    for name, d in (("relaxed", relaxed), ("integer", rounded)):
        print(f"{name},{_fmt(d.rate)},{_fmt(d.length)},{_fmt(d.rho)},{_fmt(d.throughput)}")
    return EXIT_OK


def _sweep_config(args):
    if args.config:
        inline = [args.k_list, args.trials, args.seed, args.strategies]
        if any(v is not None for v in inline):
            raise ConfigError("--config cannot be combined with inline sweep flags")
        return load_config(args.config)
    if args.k_list is None:
        raise ConfigError("either --config or --k-list is required")
    kw = {"k_values": tuple(args.k_list)}
    if args.trials is not None:
        kw["trials"] = args.trials
    if args.seed is not None:
        kw["seed"] = args.seed
    if args.strategies is not None:
        kw["strategies"] = tuple(s.strip() for s in args.strategies.split(",") if s.strip())
    if args.power is not None:
        kw["power"] = args.power
    if args.mode is not None:
        kw["exponent_mode"] = args.mode
    return SweepConfig(**kw)


def cmd_simulate(args):
    config = _sweep_config(args)
    result = run_sweep(config, workers=args.workers)
    csv_text = result.to_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_text)
        if args.json:
            with open(args.json, "w", encoding="utf-8") as fh:
                fh.write(result.to_json())
    else:
        sys.stdout.write(csv_text)
        if args.json:
            with open(args.json, "w", encoding="utf-8") as fh:
                fh.write(result.to_json())
    return EXIT_OK


def cmd_validate(args):
    report = validate(quick=not args.full, seed=args.seed)
    print(report.format())
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_laws(args):
    e_log = alpha_moment("uniform", Moment.E_LOG_INV)
    e_sqrt = alpha_moment("uniform", Moment.E_SQRT_LOG_INV)
    print("k,strategy_I,strategy_II,strategy_III")
    for k in args.k_list:
        if k < 16:
            raise ConfigError("laws need K >= 16")
        vals = (theorem2_value(k, args.power, e_log), theorem3_value(k, args.power, e_sqrt),
                theorem4_value(k, args.power))
        print(str(k) + "," + ",".join(_fmt(v) for v in vals))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fadesched",
                                     description="Multiuser scheduling over correlated fading.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exponent", help="error exponent E(rho) over a rho grid")
    p.add_argument("--u0", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--power", type=float, default=1.0)
    p.add_argument("--rho-grid", type=_rho_grid, default=_rho_grid("0:1:11"),
                   help="comma list or start:stop:count (default 0:1:11)")
    p.add_argument("--mode", choices=["theorem1", "exact_mc"], default="theorem1")
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_exponent)

    p = sub.add_parser("optimize", help="single-user optimal rate and codeword length")
    p.add_argument("--u0", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--power", type=float, default=1.0)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("simulate", help="Monte-Carlo sweep over K")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--k-list", type=_int_list)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--strategies", help="comma list of I, II, III, optimal-reference")
    p.add_argument("--power", type=float)
    p.add_argument("--mode", choices=["theorem1", "exact_mc"])
    p.add_argument("--workers", type=int, help="worker processes (default 1)")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--json", help="also write a JSON summary here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="run the oracle self-checks")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--quick", action="store_true", help="small sample sizes (default)")
    g.add_argument("--full", action="store_true", help="full sample sizes")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("laws", help="large-K throughput laws for uniform alpha")
    p.add_argument("--k-list", type=_int_list, required=True)
    p.add_argument("--power", type=float, default=1.0)
    p.set_defaults(func=cmd_laws)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG


if __name__ == "__main__":
    sys.exit(main())
