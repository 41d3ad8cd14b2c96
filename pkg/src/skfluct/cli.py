"""Command-line front door: every experiment behind reproducible flags.

Subcommands: solve-q, exact, clusters, clt, stein, interp, bipartite,
diluted, report.  Flags can be preloaded from a key=value file via
--config (one pair per line, # comments); explicit flags override the file.
Exit codes: 0 success, 2 usage/validation error, 1 runtime error.
"""
from __future__ import annotations

import argparse
import sys

from . import __version__
from . import exact, harness
from . import fixed_point as fp
from .model import CompleteGraph, DisorderDistribution, ModelParams, edge_weights, sample_disorder
from .stats import format_g17

OUTPUT_SCHEMA = """\
output contract:
  <kind>_replicas.csv   header `replica_index,raw_value,centered_value`,
                        one row per replica, floats at 17 significant digits
  <kind>_summary.json   fields {config_echo, predicted:{mean,variance,regime},
                        empirical:{mean,variance,se_mean,se_var,ks,ks_scaled},
                        seed, version, details}; floats at 17 significant
                        digits, undefined values as null; files written
                        atomically and byte-identical for a fixed
                        (config, seed)
"""


class UsageError(ValueError):
    pass


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=16, help="number of spins")
    p.add_argument("--beta", type=float, default=0.4, help="inverse temperature")
    p.add_argument("--rho", type=float, default=1.0, help="field amplitude")
    p.add_argument("--alpha", type=float, default=0.25,
                   help="field decay exponent (h = rho * n**-alpha; inf means h = 0)")
    p.add_argument("--disorder", choices=["gaussian", "rademacher", "uniform"],
                   default="gaussian", help="coupling law")
    p.add_argument("--replicas", type=int, default=100, help="number of disorder replicas")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--m", type=int, default=3, help="cluster length cutoff")
    p.add_argument("--out", type=str, default=None, help="directory for CSV/JSON reports")
    p.add_argument("--threads", type=int, default=1, help="replica worker threads")
    p.add_argument("--config", type=str, default=None,
                   help="key=value defaults file; explicit flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skfluct",
        description="Spin-glass free-energy fluctuation laboratory",
        epilog=OUTPUT_SCHEMA,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"skfluct {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve-q", help="solve the overlap fixed point q")
    _add_common(sp)

    sp = sub.add_parser("exact", help="exact log Z and its decomposition for one sample")
    _add_common(sp)

    sp = sub.add_parser("clusters", help="cluster-variance experiment over replicas")
    _add_common(sp)

    sp = sub.add_parser("clt", help="free-energy limit-law experiment (exact log Z)")
    _add_common(sp)
    sp.add_argument("--beta0", type=float, default=fp.DEFAULT_BETA0,
                    help="super-critical temperature guard")

    sp = sub.add_parser("stein", help="exchangeable-pair linearity and normality checks")
    _add_common(sp)

    sp = sub.add_parser("interp", help="interpolated overlap concentration experiment")
    _add_common(sp)
    sp.add_argument("--s", type=float, default=0.1, help="exponent of the overlap moment bound")

    sp = sub.add_parser("bipartite", help="bipartite cluster experiment")
    _add_common(sp)
    sp.add_argument("--n1", type=int, default=15, help="first part size")
    sp.add_argument("--n2", type=int, default=15, help="second part size")

    sp = sub.add_parser("diluted", help="diluted cycle/path statistic experiment")
    _add_common(sp)
    sp.add_argument("--p", type=float, default=2.0, help="mean degree of the Bernoulli(p/n) graph")
    sp.add_argument("--kmax", type=int, default=8, help="cycle/path length cutoff")

    sp = sub.add_parser("report", help="re-render a saved JSON summary")
    sp.add_argument("--out", type=str, required=True, help="directory holding a *_summary.json")
    return parser


def _load_config_file(path: str) -> dict:
    values: dict[str, str] = {}
    try:
        with open(path) as handle:
            for lineno, line in enumerate(handle, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
                key, val = line.split("=", 1)
                values[key.strip().replace("-", "_")] = val.strip()
    except OSError as err:
        raise UsageError(f"cannot read config file {path}: {err}") from err
    return values


def _apply_config_defaults(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    # first parse to find --config, then re-parse with file values as defaults
    args = parser.parse_args(argv)
    path = getattr(args, "config", None)
    if not path:
        return args
    raw = _load_config_file(path)
    sub_actions = [a for a in parser._actions if isinstance(a, argparse._SubParsersAction)]
    subparser = sub_actions[0].choices[args.command]
    known = {}
    for action in subparser._actions:
        if action.dest in raw:
            value = raw[action.dest]
            known[action.dest] = action.type(value) if action.type else value
    unknown = set(raw) - set(known)
    if unknown:
        raise UsageError(f"unknown config keys for {args.command}: {sorted(unknown)}")
    subparser.set_defaults(**known)
    return parser.parse_args(argv)


def _print_kv(pairs) -> None:
    for key, val in pairs:
        if isinstance(val, float):
            val = format_g17(val)
        print(f"{key} = {val}")


def _cmd_solve_q(args) -> int:
    params = ModelParams(n=args.n, beta=args.beta, rho=args.rho, alpha=args.alpha)
    if not args.beta < 1.0:
        raise UsageError("solve-q requires beta < 1")
    res = fp.solve_q(args.beta, params.h)
    _print_kv([
        ("h", params.h),
        ("q", res.q),
        ("iterations", res.iterations),
        ("residual", res.residual),
        ("lower_bound", res.lower_bound),
        ("upper_bound", res.upper_bound),
    ])
    return 0


def _cmd_exact(args) -> int:
    if args.n > exact.MAX_EXACT_SPINS:
        raise UsageError(f"exact enumeration capped at n = {exact.MAX_EXACT_SPINS}")
    params = ModelParams(n=args.n, beta=args.beta, rho=args.rho, alpha=args.alpha)
    dist = DisorderDistribution.from_name(args.disorder)
    sample = sample_disorder(dist, CompleteGraph(args.n), harness.replica_rng(args.seed, 0))
    dec = exact.decompose(sample, params)
    summary = exact.gibbs_summary(sample, params)
    field = edge_weights(sample, params, dist)
    pairs = [
        ("h", params.h),
        ("log_z", dec.log_z),
        ("log_prefactor", dec.log_prefactor),
        ("log_zbar", dec.log_zbar),
        ("log_zhat", dec.log_zhat),
        ("overlap_mean", summary.overlap_mean),
        ("overlap_second", summary.overlap_second),
        ("betaN2", field.betaN2),
        ("rhoN4", field.rhoN4),
    ]
    if args.n <= exact.MAX_SUBSET_SPINS:
        pairs.append(("zhat_subset_sum", exact.zhat_subset_sum(sample, params)))
    _print_kv(pairs)
    return 0


def _experiment_config(args, kind: str) -> harness.ExperimentConfig:
    kwargs = dict(
        kind=kind, n=args.n, beta=args.beta, rho=args.rho, alpha=args.alpha,
        disorder=args.disorder, replicas=args.replicas, master_seed=args.seed,
        m=args.m, threads=args.threads, out_dir=args.out,
    )
    if kind == harness.KIND_BIPARTITE:
        kwargs.update(n1=args.n1, n2=args.n2)
    if kind == harness.KIND_DILUTED:
        kwargs.update(p=args.p, k_max=args.kmax)
    if kind == harness.KIND_INTERP:
        kwargs.update(s=args.s)
    if kind == harness.KIND_CLT:
        kwargs.update(beta0=args.beta0)
    return harness.ExperimentConfig(**kwargs)


def _run_and_report(cfg: harness.ExperimentConfig) -> int:
    result = harness.run_experiment(cfg)
    emp = result.empirical()
    _print_kv([
        ("kind", cfg.kind),
        ("replicas", cfg.replicas),
        ("regime", result.regime),
        ("predicted_mean", result.predicted_mean),
        ("predicted_variance", result.predicted_variance),
        ("empirical_mean", emp.mean),
        ("empirical_variance", emp.variance),
        ("se_mean", emp.se_mean),
        ("se_var", emp.se_var),
        ("ks", result.ks),
        ("elapsed_seconds", result.elapsed_seconds),
    ])
    if cfg.out_dir:
        csv_path, json_path = harness.emit_report(result, cfg.out_dir)
        print(f"wrote {csv_path}")
        print(f"wrote {json_path}")
    return 0


def _cmd_report(args) -> int:
    import glob
    import os

    matches = sorted(glob.glob(os.path.join(args.out, "*_summary.json")))
    if not matches:
        raise UsageError(f"no *_summary.json found under {args.out}")
    for path in matches:
        summary = harness.load_summary(path)
        print(f"# {path}")
        _print_kv([
            ("kind", summary["config_echo"]["kind"]),
            ("seed", summary["seed"]),
            ("version", summary["version"]),
            ("predicted_mean", summary["predicted"]["mean"]),
            ("predicted_variance", summary["predicted"]["variance"]),
            ("empirical_mean", summary["empirical"]["mean"]),
            ("empirical_variance", summary["empirical"]["variance"]),
            ("ks", summary["empirical"]["ks"]),
        ])
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config_defaults(parser, argv)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    try:
        if args.command == "solve-q":
            return _cmd_solve_q(args)
        if args.command == "exact":
            return _cmd_exact(args)
        if args.command == "report":
            return _cmd_report(args)
        kind = {
            "clusters": harness.KIND_CLUSTER_VAR,
            "clt": harness.KIND_CLT,
            "stein": harness.KIND_STEIN,
            "interp": harness.KIND_INTERP,
            "bipartite": harness.KIND_BIPARTITE,
            "diluted": harness.KIND_DILUTED,
        }[args.command]
        return _run_and_report(_experiment_config(args, kind))
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # runtime failures: I/O, budget, non-convergence
        print(f"runtime error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
