"""Commutator ratios at r = 0.4 (p1 = p2 = 0.8, s1 = s2 = 0.9) across resolutions."""

import argparse

from fraccomm import verify


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--resolutions", default="256,512,1024,2048")
    args = ap.parse_args()
    res = tuple(int(x) for x in args.resolutions.split(","))
    pt = verify.SweepPoint(s1=0.9, s2=0.9, p1=0.8, p2=0.8)
    rep = verify.sweep(verify.SweepConfig("commutator", points=(pt,), resolutions=res))
    for N in res:
        rows = [r for r in rep.rows if r.N == N]
        worst = max(rows, key=lambda r: r.ratio)
        print(f"N={N:5d}  max ratio {worst.ratio:.6f}  ({worst.pair})")
    s = rep.summary()[0]
    print(f"resolution change {s['resolution_change']:.2%}  flags {s['flags']}")


if __name__ == "__main__":
    main()
