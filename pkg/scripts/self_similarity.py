"""Self-similarity and cross-similarity of seeded random fields."""

import argparse

import numpy as np

from mrsim.matching import compare
from mrsim.mrs import build_mrs
from mrsim.synthetic import random_smooth


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seeds", type=int, default=6)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--dims", type=int, nargs="+", default=[8, 8])
    args = p.parse_args()
    mrss = [build_mrs(random_smooth(tuple(args.dims), seed=s), args.levels) for s in range(args.seeds)]
    table = np.array([[compare(a, b).phi_bar for b in mrss] for a in mrss])
    np.set_printoptions(precision=4, suppress=True)
    print(table)
    print(f"diagonal max |1 - phi_bar| = {np.abs(np.diag(table) - 1).max():.2e}")
    print(f"max asymmetry = {np.abs(table - table.T).max():.4f}")


if __name__ == "__main__":
    main()
