"""Fit log(weighted commutator constant) against log [w]_{A_p} for power weights."""

import argparse

import numpy as np

from fraccomm import norms, verify
from fraccomm.grid import TruncatedLine, default_family, make_domain, sample_family


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, default=1024)
    ap.add_argument("--s", type=float, default=0.6)
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--exponents", default="0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")
    args = ap.parse_args()
    dom = make_domain(1, TruncatedLine(20.0), args.N)
    funcs = [sample_family(f, dom) for f in default_family()]
    weights = [norms.make_power_weight(float(a), dom) for a in args.exponents.split(",")]
    fit = verify.lerner_fit(weights, verify.LebesgueIndices(args.p, args.p),
                            verify.FractionalIndices(args.s, args.s), funcs)
    print("side  weight          [w]_Ap     constant")
    for side, label, A, C in fit.table:
        print(f"{side:4d}  {label:14s} {A:9.5f}  {C:10.6f}")
    print(f"beta1 = {fit.beta1:.4f} (R^2 {fit.r2_1:.3f}), bound {fit.bound1:g}")
    print(f"beta2 = {fit.beta2:.4f} (R^2 {fit.r2_2:.3f}), bound {fit.bound2:g}")
    print(f"A_2 constants strictly increasing: {bool(np.all(np.diff([t[2] for t in fit.table if t[0] == 1]) > 0))}")


if __name__ == "__main__":
    main()
