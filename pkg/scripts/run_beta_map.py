#!/usr/bin/env python3
"""Stability map of the conditionally convergent B variants over the shift.

Sweeps beta for a profile that is wide relative to the horizon, so the
divergence-flag boundary is visible in the output.

Usage: python scripts/run_beta_map.py [--geometry line|polar] [--out DIR]
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import numpy as np  # noqa: E402

from heatseries.cli import _atomic_write, _render_csv  # noqa: E402
from heatseries.experiments import StudyConfig, run_beta_map  # noqa: E402
from heatseries.profiles import Gaussian  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--geometry", choices=("line", "polar"), default="line")
    parser.add_argument("--width", type=float, default=4.0, help="profile width a")
    parser.add_argument("--tau", type=float, default=0.3)
    parser.add_argument("--out", default="out")
    args = parser.parse_args()
    os.makedirs(args.out, exist_ok=True)

    variant = "CD-B" if args.geometry == "line" else "PD-B"
    betas = tuple(np.round(np.arange(0.4, 3.61, 0.2), 10))
    config = StudyConfig(
        study_kind="beta_map",
        geometry=args.geometry,
        profile=Gaussian(width_a=args.width),
        tau=args.tau,
        n_range=(40,),
        beta_range=betas,
        variants=(variant,),
    )
    report = run_beta_map(config)
    # the shifted-scale series converges iff |a - tau - beta| < 2 tau + beta
    boundary = (args.width - 3.0 * args.tau) / 2.0
    print(f"{variant}, a = {args.width}, tau = {args.tau}; predicted boundary beta = {boundary:.3f}")
    print(f"{'beta':>6} {'rel max err':>12}  flagged")
    for row in report.rows:
        print(f"{row.beta:>6.2f} {row.error_max:>12.3e}  {row.diverged}")
    header = ["variant", "N", "beta", "delta", "error_l2", "error_max", "diverged", "status", "runtime_ms"]
    rows = [
        (r.variant, r.n, r.beta, r.delta, r.error_l2, r.error_max, r.diverged, r.status, r.runtime_ms)
        for r in report.rows
    ]
    path = os.path.join(args.out, f"beta_map_{args.geometry}.csv")
    _atomic_write(path, _render_csv({"study": "beta_map"}, header, rows))
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
