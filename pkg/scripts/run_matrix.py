"""Run the four attack/countermeasure scenarios and print the summary table.

    python scripts/run_matrix.py --rounds 10000 --seed 42
"""
import argparse
import sys

from blindqkd.cli import emit_report
from blindqkd.harness import SCENARIOS, ProtocolParams, run_session


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rounds", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--format", default="table", choices=("table", "csv", "json"))
    args = ap.parse_args()

    # same seed for every scenario, so Alice/Bob draw identical secrets in each
    reports = [run_session(ProtocolParams(scenario=sc, rounds=args.rounds, seed=args.seed)) for sc in SCENARIOS]
    sys.stdout.write(emit_report(reports, args.format, matrix=True).decode())


if __name__ == "__main__":
    main()
