"""Replicated scan-vs-EWMA detection study.

    python3 scripts/detection_study.py --seeds 10
    python3 scripts/detection_study.py --seeds 5 --S 7 --lookback none --scale log
"""
import argparse
import time

import numpy as np

from mlrss.study import run_replicate


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--first-seed", type=int, default=0)
    ap.add_argument("--family", default="gaussian")
    ap.add_argument("--S", type=int, default=12)
    ap.add_argument("--lookback", default="support", help="'support', 'none' or a number of days")
    ap.add_argument("--scale", choices=["linear", "log"], default="linear")
    ap.add_argument("--no-remediation", action="store_true")
    ap.add_argument("--rate", type=float, default=1.0, help="false alarms per 100 null days")
    args = ap.parse_args()

    lookback = {"support": "support", "none": None}.get(args.lookback)
    if lookback is None and args.lookback != "none":
        lookback = int(args.lookback)
    t0 = time.perf_counter()
    results = []
    for seed in range(args.first_seed, args.first_seed + args.seeds):
        r = run_replicate(seed, family=args.family, S=args.S, max_lookback=lookback, rate_per_100=args.rate,
                          score_scale=args.scale, remediation=not args.no_remediation)
        print(r.line(), flush=True)
        results.append(r)
    m = [r.mlrss.mean_delay for r in results]
    e = [r.ewma.mean_delay for r in results]
    print(f"\nseeds passing both claims: {sum(r.ok for r in results)}/{len(results)}")
    print(f"mean delay: scan {np.nanmean(m):.2f}, ewma {np.nanmean(e):.2f}; "
          f"scan misses {sum(r.mlrss.missed for r in results)}, ewma misses {sum(r.ewma.missed for r in results)}")
    print(f"elapsed {time.perf_counter() - t0:.0f}s")


if __name__ == "__main__":
    main()
