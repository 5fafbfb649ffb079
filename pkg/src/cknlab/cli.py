"""Command-line front end.

Every subcommand builds a report dict and hands it to :func:`emit`, which
renders an aligned table, a single JSON object, or CSV.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, is_dataclass
from typing import Sequence

from . import eigmin, experiments
from .errors import CKNError
from .params import Params, branch_constants, classify
from .quadrature import QuadratureConfig

SCHEMA_VERSION = 1
FORMATS = ("table", "json", "csv")

REGION_TEXT = {
    "A1": "A1 (b+1-a > 0, b <= (N-2)/2)",
    "A2": "A2 (b+1-a < 0, b >= (N-2)/2)",
    "B1": "B1 (b+1-a < 0, b <= (N-2)/2)",
    "B2": "B2 (b+1-a > 0, b >= (N-2)/2)",
    "C": "C (degenerate line a=b+1)",
}


class VerificationFailed(Exception):
    def __init__(self, report, message):
        super().__init__(message)
        self.report = report


# ---------------------------------------------------------------- parsing helpers


def _range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None
    if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
        raise argparse.ArgumentTypeError(f"need finite lo < hi, got {text!r}")
    return lo, hi


def _eps_list(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if len(vals) < 5 or any(not 0 < v < 0.3 for v in vals):
        raise argparse.ArgumentTypeError("need at least five values in (0, 0.3)")
    return vals


def _positive(kind):
    def parse(text):
        v = kind(text)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v
    return parse


# ---------------------------------------------------------------- rendering


def _jsonable(obj):
    if is_dataclass(obj):
        return _jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if hasattr(obj, "item"):
        return obj.item()
    return obj


def _fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return str(v)
    if isinstance(v, float):
        return f"{v:.9g}"
    return str(v)


def _table(rows: list[dict]) -> str:
    if not rows:
        return ""
    cols = list(rows[0])
    cells = [[_fmt(r.get(c)) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(cols, widths))]
    lines += ["  ".join(x.rjust(w) for x, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        wr = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        wr.writeheader()
        for r in rows:
            wr.writerow({k: ("" if v is None else repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def emit(report: dict, fmt: str, sink, pretty: bool = False) -> None:
    """Write ``report`` to ``sink``.

    ``report`` carries ``command``, ``rows`` (the tabular view), optional
    ``text`` (a headline for table output), optional ``csv`` (pre-rendered
    CSV) and the full ``data``.
    """
    if fmt == "json":
        body = {"schema_version": SCHEMA_VERSION, "command": report["command"]}
        body.update(_jsonable(report["data"]))
        kw = {"indent": 2} if pretty else {"separators": (",", ":")}
        sink.write(json.dumps(body, sort_keys=True, **kw) + "\n")
    elif fmt == "csv":
        sink.write(report.get("csv") or _csv(report["rows"]))
    else:
        if report.get("text"):
            sink.write(report["text"] + "\n")
        sink.write(_table(report["rows"]))


# ---------------------------------------------------------------- commands


def _params(ns) -> Params:
    return Params(ns.dim, ns.a, ns.b)


def _cfg(ns) -> QuadratureConfig:
    return QuadratureConfig(target_rel_tol=ns.tol)


def cmd_classify(ns):
    p = _params(ns)
    r = classify(p)
    c = branch_constants(p).c_sharp
    data = {"N": p.N, "a": p.a, "b": p.b, "region": r.canonical, "c_sharp": c,
            "memberships": {k: getattr(r, f"in_{k}") for k in ("A1", "A2", "B1", "B2")} | {"C": r.on_C}}
    text = f"{REGION_TEXT[r.canonical]}, c_sharp={_fmt(c)}"
    return {"command": "classify", "text": text,
            "rows": [{"N": p.N, "a": p.a, "b": p.b, "region": r.canonical, "c_sharp": c}], "data": data}


def cmd_constant(ns):
    p = _params(ns)
    bc = branch_constants(p)
    row = {"N": p.N, "a": p.a, "b": p.b, "region": classify(p).canonical,
           "c_A": bc.c_A, "c_B": bc.c_B, "c_sharp": bc.c_sharp, "T": bc.T}
    return {"command": "constant", "rows": [row], "data": row}


def cmd_verify(ns):
    rep = experiments.verify_extremizer(_params(ns), _cfg(ns), ns.family)
    row = asdict(rep)
    out = {"command": "verify", "rows": [row], "data": row}
    if not rep.ok:
        raise VerificationFailed(out, f"gap {rep.gap:.3e} exceeds tolerance {rep.tol:.3e}")
    return out


def cmd_scan(ns):
    rows = experiments.scan_plane(ns.dim, ns.a_range, ns.b_range, ns.step, ns.verify_every, _cfg(ns))
    dicts = [asdict(r) for r in rows]
    table_rows = [{k: d[k] for k in experiments.SCAN_HEADER} for d in dicts]
    failures = [d for d in dicts if d["note"]]
    out = {"command": "scan", "rows": table_rows, "csv": experiments.scan_csv(rows),
           "data": {"N": ns.dim, "rows": dicts, "failures": len(failures)}}
    if failures:
        raise VerificationFailed(out, f"{len(failures)} verification failure(s) in scan")
    return out


def cmd_minimize(ns):
    p = _params(ns)
    if ns.window is not None:
        lo, hi = ns.window
    elif p.on_line_c:
        lo, hi = -10.0, 10.0
    else:
        lo, hi = eigmin.default_window(p)
    cells = ns.nodes + 1
    cells -= cells % (1 << (ns.ladder - 1))
    ladder = eigmin.h_ladder(lo, hi, cells - 1, ns.ladder)
    table = eigmin.converge_study(p, ladder)
    ref = eigmin.reference_value(p)
    rows = [{"h": h, "s_min": w[0], "s_max": w[1], "lambda": lam, "lambda_minus_ref": lam - ref}
            for h, w, lam in table.rows]
    data = table.to_dict() | {"N": p.N, "a": p.a, "b": p.b, "reference": ref,
                              "finest": table.results[-1].to_dict()}
    text = (f"reference={_fmt(ref)} richardson_limit={_fmt(table.limit)} order={_fmt(table.order)}"
            + ("  (pencil value approximates c_sharp^2 on line C)" if p.on_line_c else ""))
    return {"command": "minimize", "text": text, "rows": rows, "data": data}


def cmd_hardy_rate(ns):
    p = Params(ns.dim, ns.b + 1.0, ns.b)
    rep = experiments.hardy_rate_study(p, ns.eps_list or experiments.DEFAULT_EPS, _cfg(ns))
    fits = {"remainder": rep.fit_remainder, "denominator": rep.fit_denominator, "gap": rep.fit_gap}
    text = "  ".join(f"{k}: exponent={_fmt(f.exponent)} r2={_fmt(f.r_squared)}" for k, f in fits.items())
    return {"command": "hardy-rate", "text": text, "rows": rep.table, "data": rep.to_dict()}


def cmd_density(ns):
    rep = experiments.density_decay_study(_params(ns), ns.eps_list or experiments.DEFAULT_EPS, _cfg(ns))
    f = rep.fit_cross
    text = (f"region {rep.region} (case {rep.case}): cross term ~ L^{_fmt(f.exponent)} "
            f"e^(-{_fmt(rep.annulus_rate)} L), r2={_fmt(f.r_squared)}, norm monotone={rep.norm_monotone}")
    return {"command": "density", "text": text, "rows": rep.table, "data": rep.to_dict()}


def cmd_identity(ns):
    rep = experiments.identity_suite(ns.trials, ns.seed, _cfg(ns))
    row = {"trials": rep.trials, "seed": rep.seed, "expand_square": rep.max_expand_defect,
           "ibp": rep.max_ibp_defect, "hardy_remainder": rep.max_hardy_defect, "ok": rep.ok}
    text = f"max relative identity defect {_fmt(max(rep.max_expand_defect, rep.max_ibp_defect, rep.max_hardy_defect))}"
    out = {"command": "identity-check", "text": text, "rows": [row], "data": rep.to_dict()}
    if not rep.ok:
        raise VerificationFailed(out, "identity defect exceeds tolerance")
    return out


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="table", help="output format (default: table)")
    common.add_argument("--output", "-o", metavar="PATH", help="write to PATH instead of standard output")
    common.add_argument("--pretty", action="store_true", help="indent JSON output")
    common.add_argument("--tol", type=_positive(float), default=1e-12, help="quadrature target relative tolerance")
    common.add_argument("--json-config", metavar="PATH", help="reserved; not supported in this version")

    point = argparse.ArgumentParser(add_help=False)
    point.add_argument("--dim", type=int, required=True, help="dimension N >= 1")
    point.add_argument("--a", type=float, required=True, help="weight exponent a")
    point.add_argument("--b", type=float, required=True, help="weight exponent b")

    ap = argparse.ArgumentParser(
        prog="cknlab",
        description="Sharp constants, extremizers and identity checks for weighted L2 CKN inequalities.",
    )
    sub = ap.add_subparsers(dest="command", metavar="COMMAND", required=True)

    sub.add_parser("classify", parents=[common, point],
                   help="region of (a, b) in the parameter plane and its sharp constant")
    sub.add_parser("constant", parents=[common, point],
                   help="branch constants c_A, c_B, the sharp constant and the difference T")
    v = sub.add_parser("verify", parents=[common, point],
                       help="quotient of the closed-form extremizer against the sharp constant")
    v.add_argument("--family", choices=("A", "B"), help="extremizer family (default: canonical region)")

    s = sub.add_parser("scan", parents=[common],
                       help="region labels and sharp constants over a grid in the (a, b) plane")
    s.add_argument("--dim", type=int, required=True, help="dimension N >= 1")
    s.add_argument("--a-range", type=_range, required=True, metavar="LO:HI")
    s.add_argument("--b-range", type=_range, required=True, metavar="LO:HI")
    s.add_argument("--step", type=_positive(float), required=True)
    s.add_argument("--verify-every", type=int, default=0, metavar="K",
                   help="verify the extremizer on every K-th row off the line a=b+1")

    m = sub.add_parser("minimize", parents=[common, point],
                       help="sharp constant recovered as the smallest eigenvalue of a discretized quotient")
    m.add_argument("--window", type=_range, metavar="LO:HI", help="log-radius window (default: extremizer window)")
    m.add_argument("--nodes", type=_positive(int), default=1999, metavar="M", help="interior nodes on the finest grid")
    m.add_argument("--ladder", type=int, default=3, choices=range(3, 7), metavar="R", help="number of rungs (3-6)")

    h = sub.add_parser("hardy-rate", parents=[common],
                       help="rates of the log-cutoff minimizing sequence for the Hardy constant on a=b+1")
    h.add_argument("--dim", type=int, required=True, help="dimension N >= 1")
    h.add_argument("--b", type=float, required=True, help="weight exponent b (a = b+1)")
    h.add_argument("--eps-list", type=_eps_list, metavar="E1,E2,...")

    d = sub.add_parser("density", parents=[common, point],
                       help="decay of the extremizer's cutoff approximation error and cutoff-gradient term")
    d.add_argument("--eps-list", type=_eps_list, metavar="E1,E2,...")

    i = sub.add_parser("identity-check", parents=[common],
                       help="expand-the-square, integration-by-parts and Hardy remainder identities")
    i.add_argument("--trials", type=_positive(int), default=200)
    i.add_argument("--seed", type=int, default=0)
    return ap


COMMANDS = {
    "classify": cmd_classify,
    "constant": cmd_constant,
    "verify": cmd_verify,
    "scan": cmd_scan,
    "minimize": cmd_minimize,
    "hardy-rate": cmd_hardy_rate,
    "density": cmd_density,
    "identity-check": cmd_identity,
}


RANGE_FLAGS = ("--a-range", "--b-range", "--window")


def _join_ranges(argv: Sequence[str]) -> list[str]:
    # argparse reads "-2:3" as an option; glue range values to their flag
    out, it = [], iter(argv)
    for tok in it:
        if tok in RANGE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def run(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    argv = _join_ranges(sys.argv[1:] if argv is None else argv)
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    if ns.json_config is not None:
        print("error: --json-config is reserved and not supported yet", file=sys.stderr)
        return 2

    code = 0
    try:
        report = COMMANDS[ns.command](ns)
    except VerificationFailed as exc:
        report, code = exc.report, 1
        print(f"verification failed: {exc}", file=sys.stderr)
    except (CKNError, ValueError, OverflowError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2

    try:
        if ns.output:
            with open(ns.output, "w", newline="") as fh:
                emit(report, ns.format, fh, ns.pretty)
        else:
            emit(report, ns.format, sys.stdout, ns.pretty)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
