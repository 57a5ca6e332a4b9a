"""Split a six-attribute table in half and recover the column correspondence."""
import argparse

import numpy as np

from kmmd.data import attribute_table
from kmmd.matching import columns, cost_matrix, hungarian, split_half


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--rows", type=int, default=400)
    ap.add_argument("--replicates", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    correct = 0
    for r, child in enumerate(np.random.SeedSequence(args.seed).spawn(args.replicates)):
        A, B = split_half(attribute_table(args.rows, np.random.default_rng(child)))
        C = cost_matrix(columns(A), columns(B))
        ok = hungarian(C).perm == tuple(range(C.shape[0]))
        correct += ok
        if r == 0:
            np.set_printoptions(precision=4, suppress=True)
            print("cost matrix of the first replicate (MMD^2_u, floored at 0):")
            print(C)
    print(f"correct assignments: {correct}/{args.replicates}")


if __name__ == "__main__":
    main()
