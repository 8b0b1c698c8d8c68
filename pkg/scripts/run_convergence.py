#!/usr/bin/env python3
"""Convergence-in-order curves for the direct series against the oracle.

Uses a two-component Gaussian mixture so the coefficients do not truncate
exactly and the decay of the truncation error is visible.

Usage: python scripts/run_convergence.py [--geometry line|polar] [--out DIR]
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from heatseries.cli import _atomic_write, _render_csv  # noqa: E402
from heatseries.experiments import StudyConfig, run_convergence  # noqa: E402
from heatseries.profiles import Gaussian, Mixture  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--geometry", choices=("line", "polar"), default="line")
    parser.add_argument("--tau", type=float, default=0.5)
    parser.add_argument("--out", default="out")
    args = parser.parse_args()
    os.makedirs(args.out, exist_ok=True)

    if args.geometry == "line":
        profile = Mixture(
            (
                Gaussian(width_a=0.9, center=-0.5),
                Gaussian(width_a=1.4, center=0.7, amplitude=0.7),
            )
        )
    else:
        profile = Mixture((Gaussian(width_a=0.9), Gaussian(width_a=1.3, amplitude=0.8)))
    config = StudyConfig(
        study_kind="convergence",
        geometry=args.geometry,
        profile=profile,
        tau=args.tau,
        n_range=(0, 2, 4, 6, 8, 12, 16, 20, 28, 40),
    )
    report = run_convergence(config)
    variants = sorted({r.variant for r in report.rows})
    print(f"convergence [{args.geometry}], tau = {args.tau}")
    print(f"{'N':>4}  " + "  ".join(f"{v:>10}" for v in variants))
    for n in config.n_range:
        errs = {r.variant: r.error_max for r in report.rows if r.n == n}
        print(f"{n:>4}  " + "  ".join(f"{errs[v]:>10.2e}" for v in variants))
    header = ["variant", "N", "beta", "delta", "error_l2", "error_max", "diverged", "status", "runtime_ms"]
    rows = [
        (r.variant, r.n, r.beta, r.delta, r.error_l2, r.error_max, r.diverged, r.status, r.runtime_ms)
        for r in report.rows
    ]
    path = os.path.join(args.out, f"convergence_{args.geometry}.csv")
    _atomic_write(path, _render_csv({"study": "convergence"}, header, rows))
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
