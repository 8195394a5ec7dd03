"""Run every named check and every default sweep, writing reports to a directory."""

import argparse
import json
import time
from pathlib import Path

from fraccomm import verify


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("suite_out"))
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    checks, reports = verify.default_suite(seed=args.seed, workers=args.workers)
    for c in checks:
        (args.out / f"check_{c.name}.json").write_text(
            json.dumps({"check": c.name, "passed": c.passed, "details": c.details}, indent=2, sort_keys=True) + "\n")
        print(f"{c.name:24s} {'PASS' if c.passed else 'FAIL'}")
    for name, rep in reports.items():
        (args.out / f"sweep_{name}.csv").write_text(rep.to_csv(), newline="")
        (args.out / f"sweep_{name}.json").write_text(rep.to_json() + "\n")
        print(f"{name:24s} max ratio {rep.max_ratio():.6g}")
    print(f"done in {time.perf_counter() - t0:.1f}s -> {args.out}")
    return 0 if all(c.passed for c in checks) else 1


if __name__ == "__main__":
    raise SystemExit(main())
