"""Command line interface.

Subcommands: ``simulate`` (Monte Carlo only), ``theory`` (analytical models
only), ``experiment`` (both plus an agreement report), ``design bounds`` /
``design weights`` (closed-form step bounds and fusion weights), and
``list-builtins``.

Exit codes: 0 success, 1 configuration or usage error, 2 agreement gap above
``--assert-gap``. The default worker count comes from the FCLMS_WORKERS
environment variable (1 when unset); ``--workers`` overrides it.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import __version__
from .design import (
    DesignInput,
    dlms_stability_bound,
    dnlms_stability_bound,
    optimal_weights_snr,
    optimal_weights_speed,
)
from .harness import (
    ConfigError,
    builtin_specs,
    default_horizon,
    default_workers,
    mc_mean_dev_norm,
    resolve_spec,
    run_experiment,
    steady_window,
    write_csv,
)
from .simulation import run_monte_carlo
from .theory import theory_trajectory

__all__ = ["main", "build_parser"]


class _Parser(argparse.ArgumentParser):
    # usage errors must exit 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _csv_floats(text):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}")


def _add_run_flags(p, with_runs=True):
    if with_runs:
        p.add_argument("--runs", type=int, default=None,
                       help="Monte Carlo runs (default: from the spec)")
    p.add_argument("--horizon", type=int, default=None,
                   help="samples to iterate (default: spec or derived)")
    p.add_argument("--seed", type=int, default=None,
                   help="master seed (default: from the spec)")
    p.add_argument("--out", default=None, metavar="PREFIX",
                   help="write <PREFIX>.csv")
    p.add_argument("--workers", type=int, default=None,
                   help="parallel workers (default: FCLMS_WORKERS or 1)")
    p.add_argument("--format", choices=("csv",), default="csv",
                   help="output file format")


def build_parser():
    parser = _Parser(prog="fclms",
                     description="Fusion-center diffusion LMS/NLMS: seeded "
                                 "Monte Carlo, analytical learning curves, "
                                 "and design formulas.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="Monte Carlo only")
    p.add_argument("spec", help="builtin name or spec file path")
    _add_run_flags(p)

    p = sub.add_parser("theory", help="analytical models only")
    p.add_argument("spec", help="builtin name or spec file path")
    p.add_argument("--model", choices=("general", "slow", "both"),
                   default=None, help="which model (default: from the spec)")
    _add_run_flags(p, with_runs=False)

    p = sub.add_parser("experiment",
                       help="theory + Monte Carlo + agreement report")
    p.add_argument("spec", help="builtin name or spec file path")
    p.add_argument("--model", choices=("general", "slow", "both"),
                   default=None)
    p.add_argument("--assert-gap", type=float, default=None, metavar="DB",
                   help="exit 2 if the steady-state gap exceeds DB")
    _add_run_flags(p)

    p = sub.add_parser("design", help="closed-form design formulas")
    dsub = p.add_subparsers(dest="design_command", required=True)

    b = dsub.add_parser("bounds", help="stability bound on the normalized step")
    b.add_argument("--M", type=int, required=True, help="number of nodes")
    b.add_argument("--N", type=int, required=True, help="filter taps")
    b.add_argument("--kurtosis", type=_csv_floats, required=True,
                   help="input kurtosis, one value or per-node list")
    g = b.add_mutually_exclusive_group(required=True)
    g.add_argument("--uniform-weights", action="store_true",
                   help="fusion weights 1/M")
    g.add_argument("--weights", type=_csv_floats,
                   help="per-node fusion weights, must sum to 1")
    b.add_argument("--normalized", action="store_true",
                   help="bound for the normalized algorithm")

    w = dsub.add_parser("weights", help="optimal fusion weights")
    w.add_argument("--objective", choices=("snr", "speed"), required=True)
    w.add_argument("--M", type=int, required=True)
    w.add_argument("--N", type=int, required=True)
    w.add_argument("--kurtosis", type=_csv_floats, required=True)
    w.add_argument("--snr", type=_csv_floats, default=None,
                   help="per-node input SNR (objective snr)")
    w.add_argument("--step", type=float, default=None,
                   help="common normalized step (objective snr)")
    w.add_argument("--normalized", action="store_true")

    sub.add_parser("list-builtins", help="list builtin experiment specs")
    return parser


def _expand(values, m, flag):
    if len(values) == 1:
        return tuple(values) * m
    if len(values) != m:
        raise ConfigError(f"{flag}: expected 1 or {m} values, got {len(values)}")
    return tuple(values)


def _spec_summary(spec, horizon, seed, runs=None):
    net = spec.network
    lines = [f"spec {spec.name}: {net.algorithm} ({net.strategy}), "
             f"{net.n_nodes} nodes, {net.filter_length} taps"]
    detail = f"horizon {horizon}, seed {seed}"
    if runs is not None:
        detail = f"runs {runs}, " + detail
    lines.append(detail)
    return lines


def _steady_db(values, window):
    return 10.0 * math.log10(max(float(np.mean(values[-window:])), 1e-300))


def _cmd_simulate(args):
    spec = resolve_spec(args.spec)
    runs = args.runs if args.runs is not None else spec.runs
    horizon = args.horizon if args.horizon is not None else spec.horizon
    if horizon is None:
        horizon = default_horizon(spec.network)
    seed = args.seed if args.seed is not None else spec.master_seed
    workers = args.workers if args.workers is not None else default_workers()

    mc = run_monte_carlo(spec.network, runs=runs, horizon=horizon,
                         master_seed=seed, workers=workers)
    window = steady_window(spec.network, horizon)
    for line in _spec_summary(spec, horizon, seed, runs):
        print(line)
    print(f"mc steady-state msd {_steady_db(mc.msd, window):.2f} dB "
          f"(window {window})")
    if mc.any_diverged:
        print(f"warning: {int(mc.diverged.sum())} of {runs} runs diverged")
    if args.out:
        path = f"{args.out}.csv"
        nans = np.full(horizon + 1, np.nan)
        write_csv(path, np.arange(horizon + 1), nans, mc.msd,
                  mc_mean_dev_norm(mc))
        print(f"wrote {path}")
    return 0


def _cmd_theory(args):
    spec = resolve_spec(args.spec)
    horizon = args.horizon if args.horizon is not None else spec.horizon
    if horizon is None:
        horizon = default_horizon(spec.network)
    model = args.model if args.model is not None else spec.theory_model
    models = ("general", "slow") if model == "both" else (model,)

    out = {m: theory_trajectory(spec.network, horizon, model=m)
           for m in models}
    window = steady_window(spec.network, horizon)
    for line in _spec_summary(spec, horizon, spec.master_seed):
        print(line)
    for m in models:
        msg = f"{m} model steady-state msd {_steady_db(out[m]['msd'], window):.2f} dB"
        if out[m]["diverged"]:
            msg += " (diverged, value at guard crossing)"
        print(msg)
    if args.out:
        path = f"{args.out}.csv"
        primary = out[models[0]]
        nans = np.full(horizon + 1, np.nan)
        write_csv(path, np.arange(horizon + 1), primary["msd"], nans,
                  primary["mean_dev_norm"])
        print(f"wrote {path}")
    return 0


def _cmd_experiment(args):
    spec = resolve_spec(args.spec)
    res = run_experiment(spec, runs=args.runs, horizon=args.horizon,
                         master_seed=args.seed, workers=args.workers,
                         out_prefix=args.out, theory_model=args.model)
    r = res.report
    seed = args.seed if args.seed is not None else spec.master_seed
    runs = args.runs if args.runs is not None else spec.runs
    for line in _spec_summary(spec, res.horizon, seed, runs):
        print(line)
    print(f"theory steady {r.theory_steady_db:.2f} dB, "
          f"mc steady {r.mc_steady_db:.2f} dB")
    print(f"steady-state gap {r.steady_state_gap_db:.3f} dB over final "
          f"{r.window} samples; transient max {r.max_transient_gap_db:.3f} dB "
          f"after burn-in {r.burn_in}")
    ripple = r.ripple_period_detected
    print(f"ripple period {ripple if ripple is not None else 'none detected'}")
    if r.diverged:
        which = "theory" if r.diverged_theory else "mc"
        if r.diverged_theory and r.diverged_mc:
            which = "theory and mc"
        print(f"warning: {which} diverged")
    if res.csv_path:
        print(f"wrote {res.csv_path}")
    if args.assert_gap is not None:
        gap = r.steady_state_gap_db
        if r.diverged or not math.isfinite(gap) or gap > args.assert_gap:
            print(f"gap assertion failed: {gap:.3f} dB > "
                  f"{args.assert_gap:.3f} dB", file=sys.stderr)
            return 2
        print(f"gap assertion passed: {gap:.3f} dB <= {args.assert_gap:.3f} dB")
    return 0


def _cmd_design_bounds(args):
    psi = _expand(args.kurtosis, args.M, "--kurtosis")
    weights = None if args.uniform_weights else _expand(args.weights, args.M,
                                                        "--weights")
    d = DesignInput(n_nodes=args.M, filter_length=args.N, kurtoses=psi,
                    weights=weights)
    bound = dnlms_stability_bound(d) if args.normalized \
        else dlms_stability_bound(d)
    print(f"{bound:.4g}")
    return 0


def _cmd_design_weights(args):
    psi = _expand(args.kurtosis, args.M, "--kurtosis")
    if args.objective == "snr":
        if args.snr is None or args.step is None:
            raise ConfigError("--objective snr needs --snr and --step")
        snrs = _expand(args.snr, args.M, "--snr")
        d = DesignInput(n_nodes=args.M, filter_length=args.N, kurtoses=psi,
                        snrs=snrs)
        algorithm = "dnlms" if args.normalized else "dlms"
        c, msd = optimal_weights_snr(d, args.step, algorithm=algorithm)
        print("weights " + ",".join(f"{v:.6g}" for v in c))
        print(f"predicted steady-state msd {10.0 * math.log10(msd):.2f} dB")
    else:
        d = DesignInput(n_nodes=args.M, filter_length=args.N, kurtoses=psi)
        c, load = optimal_weights_speed(d)
        print("weights " + ",".join(f"{v:.6g}" for v in c))
        print(f"kurtosis load {load:.6g}")
    return 0


def _cmd_list_builtins(args):
    for name, spec in sorted(builtin_specs().items()):
        net = spec.network
        print(f"{name:7s} {net.algorithm:5s} M={net.n_nodes} "
              f"N={net.filter_length} runs={spec.runs} "
              f"seed={spec.master_seed}  {spec.description}")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "theory": _cmd_theory,
    "experiment": _cmd_experiment,
    "list-builtins": _cmd_list_builtins,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "design":
        handler = _cmd_design_bounds if args.design_command == "bounds" \
            else _cmd_design_weights
    else:
        handler = _COMMANDS[args.command]
    try:
        return handler(args)
    except (ConfigError, ValueError) as exc:
        print(f"fclms: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
