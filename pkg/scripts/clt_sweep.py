#!/usr/bin/env python3
"""Sweep system sizes and compare the empirical free-energy fluctuations
against the predicted limit law.

Example:
    python scripts/clt_sweep.py --sizes 10 14 18 --beta 0.4 --rho 0.5 \
        --alpha 0.5 --replicas 500 --seed 7 --out results/clt_sweep
"""
import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from skfluct import harness  # noqa: E402
from skfluct.stats import format_g17  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[10, 14, 18])
    parser.add_argument("--beta", type=float, default=0.4)
    parser.add_argument("--rho", type=float, default=0.5)
    parser.add_argument("--alpha", type=float, default=0.5)
    parser.add_argument("--disorder", default="gaussian")
    parser.add_argument("--replicas", type=int, default=500)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--out", default=None)
    args = parser.parse_args()

    print("n,emp_mean,emp_var,pred_mean,pred_var,ks")
    for n in args.sizes:
        cfg = harness.ExperimentConfig(
            kind="clt", n=n, beta=args.beta, rho=args.rho, alpha=args.alpha,
            disorder=args.disorder, replicas=args.replicas, master_seed=args.seed,
        )
        result = harness.run_experiment(cfg)
        emp = result.empirical()
        print(",".join([
            str(n),
            format_g17(emp.mean),
            format_g17(emp.variance),
            format_g17(result.predicted_mean),
            format_g17(result.predicted_variance),
            format_g17(result.ks),
        ]))
        if args.out:
            harness.emit_report(result, os.path.join(args.out, f"n{n}"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
