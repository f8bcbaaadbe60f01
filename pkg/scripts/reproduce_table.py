#!/usr/bin/env python3
"""Regenerate one reference table and compare against the embedded targets.

Examples:
    python3 scripts/reproduce_table.py --table IV --output out/table_iv.json
    python3 scripts/reproduce_table.py --table V --extended --time-cap 3600
"""
import argparse
import sys

from bellkit.report import ReportSpec, run_report


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--table", required=True, choices=("I", "II", "III", "IV", "V"))
    ap.add_argument("--output", default=None)
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--k-range", default=None,
                    help="comma-separated K values to include")
    ap.add_argument("--restarts", type=int, default=None)
    ap.add_argument("--time-cap", type=float, default=None)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--extended", action="store_true")
    args = ap.parse_args()

    output = args.output or f"out/table_{args.table.lower()}.{args.format}"
    k_range = None
    if args.k_range is not None:
        k_range = tuple(int(k) for k in args.k_range.split(",")) if args.k_range else ()
    spec = ReportSpec(
        table=args.table,
        output_path=output,
        format=args.format,
        k_range=k_range,
        restarts=args.restarts,
        time_cap=args.time_cap,
        seed=args.seed,
        threads=args.threads,
        extended=args.extended,
    )
    outcome = run_report(spec)
    for row in outcome.rows:
        print(
            f"{row['id']:>10}  value={row['value']}  target={row['target_value']}"
            f"  visibility={row['visibility']}  status={row['status']}"
        )
    print(f"wrote {outcome.path} (exit {outcome.exit_code})")
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
