"""Tabulate the empirical normalization c(n, s) over a grid of orders."""

import argparse

import numpy as np

from fraccomm import singular


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dim", type=int, default=1, choices=(1, 2))
    ap.add_argument("--count", type=int, default=20)
    args = ap.parse_args()
    orders = np.concatenate([[0.02, 0.05], np.linspace(0.1, 1.9, args.count), [1.95, 1.98]])
    print("s        c(n,s)")
    for s in orders:
        print(f"{s:6.3f}  {singular.constant_c(args.dim, float(s)): .10f}")


if __name__ == "__main__":
    main()
