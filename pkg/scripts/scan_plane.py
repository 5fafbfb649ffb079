"""Write the region/constant table over a grid of (a, b) to CSV."""

import argparse
import sys

from cknlab.experiments import scan_csv, scan_plane


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dim", type=int, default=3)
    ap.add_argument("--lo", type=float, default=-2.0)
    ap.add_argument("--hi", type=float, default=3.0)
    ap.add_argument("--step", type=float, default=0.25)
    ap.add_argument("--verify-every", type=int, default=10)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()
    rows = scan_plane(args.dim, (args.lo, args.hi), (args.lo, args.hi), args.step, args.verify_every)
    text = scan_csv(rows)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    bad = [r for r in rows if r.note]
    print(f"{len(rows)} rows, {sum(r.verified is not None for r in rows)} verified, {len(bad)} failures",
          file=sys.stderr)


if __name__ == "__main__":
    main()
