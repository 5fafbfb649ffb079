"""Log-cutoff rates on a = b+1 and the density study for one point per region."""

import argparse
import json

from cknlab import experiments as ex
from cknlab.params import Params


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--json", action="store_true", help="dump full reports as JSON")
    args = ap.parse_args()

    hardy = ex.hardy_rate_study(Params(3, 1, 0))
    density = {label: ex.density_decay_study(p) for label, p in
               (("A1", Params(3, 0, 0)), ("A2", Params(3, 3, 1)),
                ("B1", Params(3, 2, 0)), ("B2", Params(3, 0, 1)), ("A1, N=2b+2", Params(3, 0, 0.5)))}
    if args.json:
        print(json.dumps({"hardy": hardy.to_dict(), "density": {k: v.to_dict() for k, v in density.items()}},
                         sort_keys=True, indent=1))
        return

    print("eps          L        G-Q/4        Q            E~^2-1/4")
    for row in hardy.table:
        print(f"{row['eps']:.3e}  {row['log_inv_eps']:7.4f}  {row['remainder']:.6e}  "
              f"{row['Q']:.6e}  {row['gap']:.6e}")
    for name, fit in (("remainder", hardy.fit_remainder), ("denominator", hardy.fit_denominator),
                      ("gap", hardy.fit_gap)):
        print(f"  {name:12s} exponent {fit.exponent:+.5f}  r2 {fit.r_squared:.6f}")
    print()
    for label, rep in density.items():
        f = rep.fit_cross
        print(f"{label:11s} case {rep.case}: cross ~ L^{f.exponent:+.3f} e^(-{rep.annulus_rate:g} L)  "
              f"r2 {f.r_squared:.5f}  norm monotone {rep.norm_monotone}")


if __name__ == "__main__":
    main()
