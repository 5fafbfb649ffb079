"""Branch-bound audit, identity suite and invariance suite with recorded seeds."""

import argparse
import json

from cknlab import experiments as ex
from cknlab.params import Params


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    out = {
        "audit": {f"{p.N},{p.a:g},{p.b:g}": ex.branch_bound_audit(p, args.trials, args.seed).to_dict()
                  for p in (Params(3, 0, 0), Params(3, 2, 0), Params(3, 1, 0), Params(4, 1, 1))},
        "identities": ex.identity_suite(2 * args.trials, args.seed).to_dict(),
        "invariance": ex.invariance_suite(seed=args.seed).to_dict(),
    }
    print(json.dumps(out, sort_keys=True, indent=1))


if __name__ == "__main__":
    main()
