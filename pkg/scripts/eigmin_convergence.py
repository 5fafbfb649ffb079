"""Convergence of the discrete minimum quotient in h, and its window dependence on a = b+1."""

import argparse

from cknlab import eigmin
from cknlab.params import Params


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nodes", type=int, default=3999, help="interior nodes on the finest rung")
    ap.add_argument("--rungs", type=int, default=4)
    args = ap.parse_args()

    for p in (Params(3, 0, 0), Params(3, 2, 0), Params(3, 3, 1), Params(3, 0, 1)):
        lo, hi = eigmin.default_window(p)
        table = eigmin.converge_study(p, eigmin.h_ladder(lo, hi, args.nodes, args.rungs))
        ref = eigmin.reference_value(p)
        print(f"N={p.N} a={p.a:g} b={p.b:g}  window=({lo:.2f}, {hi:.2f})  reference={ref:g}")
        for h, _, lam in table.rows:
            print(f"  h={h:.5f}  lambda={lam:.12f}  lambda-ref={lam - ref:+.3e}")
        print(f"  order={table.order:.4f}  richardson={table.limit:.12f}")

    p = Params(3, 1, 0)
    print("line a=b+1 at N=3, b=0 (pencil value approximates 1/4), h=0.01")
    for half in (2.5, 5.0, 10.0, 20.0, 40.0):
        d = eigmin.Discretization(-half, half, int(round(2 * half / 0.01)) - 1)
        lam = eigmin.min_quotient(p, d, check_quotient=False).lambda_min
        print(f"  window=±{half:<5g} lambda={lam:.8f}  lambda-1/4={lam - 0.25:.3e}")


if __name__ == "__main__":
    main()
