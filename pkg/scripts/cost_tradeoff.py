"""Runtime against sample size for the linear and quadratic tests, with log-log slopes."""
import argparse

import numpy as np

from kmmd.cli import run_benchmark


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", type=int, default=1)
    ap.add_argument("--sizes", default="500,1000,2000,4000")
    ap.add_argument("--methods", default="linear,biased-bound,hoeffding,bootstrap")
    ap.add_argument("--replicates", type=int, default=3)
    ap.add_argument("--shift", type=float, default=0.5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    methods = args.methods.split(",")
    rows = run_benchmark("mean-shift", [args.d], sizes, methods, args.replicates, args.seed, args.shift)
    print(f"{'method':<14}{'m':>7}{'ms':>12}{'reject':>8}")
    for r in rows:
        print(f"{r['method']:<14}{r['m']:>7}{r['mean_runtime_ms']:>12.3f}{r['reject_rate']:>8.2f}")
    for meth in methods:
        t = [r["mean_runtime_ms"] for r in rows if r["method"] == meth]
        print(f"slope {meth}: {np.polyfit(np.log(sizes), np.log(t), 1)[0]:.2f}")


if __name__ == "__main__":
    main()
