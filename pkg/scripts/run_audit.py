#!/usr/bin/env python3
"""Run the constants audit in both modes and print the certification table.

Usage: python scripts/run_audit.py [--out DIR]
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from heatseries.cli import _atomic_write, _render_csv  # noqa: E402
from heatseries.experiments import StudyConfig, expected_audit_statuses, run_audit  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out", help="report directory")
    args = parser.parse_args()
    os.makedirs(args.out, exist_ok=True)

    overall_ok = True
    for mode in ("oracle_validated", "paper_literal"):
        report = run_audit(StudyConfig(study_kind="audit", constants_mode=mode))
        expected = expected_audit_statuses(mode)
        print(f"\n=== constants audit [{mode}] ===")
        print(f"{'variant':<8} {'N=0':>10} {'N=1':>10} {'N=2':>10} {'full':>10}  status  expected")
        by_variant = {}
        for row in report.rows:
            by_variant.setdefault(row.variant, {})[row.n] = row
        for variant, rows in sorted(by_variant.items()):
            ns = sorted(rows)
            errs = " ".join(f"{rows[n].error_max:>10.2e}" for n in ns)
            status = rows[ns[0]].status
            marker = "" if status == expected[variant] else "  <-- UNEXPECTED"
            overall_ok = overall_ok and status == expected[variant]
            print(f"{variant:<8} {errs}  {status:<6}  {expected[variant]}{marker}")
        ratios = report.metadata.get("literal_value_ratios")
        if ratios and mode == "paper_literal":
            print("published/validated value ratios at the matched configuration:")
            for variant, ratio in sorted(ratios.items()):
                print(f"  {variant}: {ratio:.12g}")
        header = ["variant", "N", "beta", "error", "status"]
        rows = [(r.variant, r.n, r.beta, r.error_max, r.status) for r in report.rows]
        path = os.path.join(args.out, f"audit_{mode}.csv")
        _atomic_write(path, _render_csv({"study": "audit", "constants_mode": mode}, header, rows))
        print(f"wrote {path}")
    print("\naudit", "OK" if overall_ok else "MISMATCH")
    return 0 if overall_ok else 1


if __name__ == "__main__":
    sys.exit(main())
