"""Spread of the sampled QBER over seeds for the b-guessing scenarios.

With a 20% key sample the sampled QBER has standard deviation
sqrt(0.25 * 0.75 / (0.2 * rounds)); this script shows how often a session
lands outside a given band around 1/4.

    python scripts/seed_sweep.py --seeds 200 --rounds 10000 --band 0.015
"""
import argparse
import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from blindqkd.harness import ProtocolParams, run_session


def one(args):
    scenario, rounds, seed = args
    r = run_session(ProtocolParams(scenario=scenario, rounds=rounds, seed=seed))
    return r.qber_sampled, r.eve_b_rate, r.agreement_rate


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--scenario", default="impersonation")
    ap.add_argument("--rounds", type=int, default=10_000)
    ap.add_argument("--seeds", type=int, default=50)
    ap.add_argument("--band", type=float, default=0.015)
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args()

    jobs = [(args.scenario, args.rounds, s) for s in range(args.seeds)]
    with ProcessPoolExecutor(args.workers) as ex:
        res = np.array(list(ex.map(one, jobs)))
    qber, eve_b, agree = res.T
    sigma = math.sqrt(0.25 * 0.75 / math.ceil(0.2 * args.rounds))
    print(f"scenario={args.scenario} rounds={args.rounds} seeds={args.seeds}")
    print(f"sampled qber: mean={qber.mean():.4f} sd={qber.std(ddof=1):.4f} (binomial sd {sigma:.4f})")
    print(f"outside 0.25±{args.band}: {np.mean(np.abs(qber - 0.25) > args.band):.3f}")
    print(f"full-key mismatch: mean={1 - agree.mean():.4f} sd={agree.std(ddof=1):.4f}")
    print(f"eve_b_rate: mean={eve_b.mean():.4f} sd={eve_b.std(ddof=1):.4f}")


if __name__ == "__main__":
    main()
