"""Verification workflows: extremizer sharpness, plane scans, rate studies, audits."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import functionals as fn
from .errors import CKNError, InvalidSpec, NotOnLineC
from .params import Params, branch_constants, classify, sharp_constant
from .profiles import (
    Bump,
    CircleTrig,
    Constant,
    CutoffSpec,
    Profile,
    Radial,
    SpherePoly,
    grid_from_profile,
    make_extremizer,
    make_hardy_sequence,
    truncate_profile,
)
from .quadrature import QuadratureConfig, integrate_radial, sphere_area

__all__ = [
    "ScanRow",
    "RateFit",
    "ExtremizerReport",
    "verify_extremizer",
    "scan_plane",
    "scan_csv",
    "fit_rate",
    "hardy_rate_study",
    "density_decay_study",
    "branch_bound_audit",
    "random_bump",
    "identity_suite",
    "invariance_suite",
    "DEFAULT_EPS",
    "DENSITY_CASES",
]

DEFAULT_EPS = tuple(10.0 ** (-2.0 - 0.5 * k) for k in range(9))
DENSITY_CASES = {"A1": 1, "A2": 2, "B1": 3, "B2": 4}
SCAN_HEADER = ["a", "b", "region", "c_A", "c_B", "c_sharp", "verified", "gap"]


# ---------------------------------------------------------------- extremizers


@dataclass
class ExtremizerReport:
    N: int
    a: float
    b: float
    region: str
    family: str
    t: float
    E_tilde: float
    c_sharp: float
    gap: float
    err: float
    tol: float
    ok: bool


def verify_extremizer(
    p: Params, cfg: QuadratureConfig | None = None, family: str | None = None
) -> ExtremizerReport:
    """Quotient of the closed-form extremizer against the sharp constant.

    Succeeds when the gap is within 100 times the propagated quadrature error.
    """
    region = classify(p)
    if region.on_C:
        raise InvalidSpec("no extremizer on the line a = b+1")
    u = make_extremizer(p, family)
    w = fn.weighted_integrals(u, p, cfg, "PGM")
    E = math.sqrt(w.P * w.G) / w.M
    err = E * (0.5 * w.errors["P"] / w.P + 0.5 * w.errors["G"] / w.G + w.errors["M"] / w.M)
    c = sharp_constant(p)
    gap = abs(E - c)
    tol = 100.0 * err
    return ExtremizerReport(
        p.N, p.a, p.b, region.canonical, u.radial.family, u.radial.t, E, c, gap, err, tol, gap <= tol
    )


# ---------------------------------------------------------------- plane scan


@dataclass
class ScanRow:
    a: float
    b: float
    region: str
    c_A: float
    c_B: float
    c_sharp: float
    verified: float | None = None
    gap: float | None = None
    note: str = ""


def _axis(lo: float, hi: float, step: float) -> list[float]:
    if step <= 0:
        raise ValueError("step must be positive")
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
        raise ValueError("range must be finite with lo <= hi")
    n = int(math.floor((hi - lo) / step + 1e-9))
    return [lo + i * step for i in range(n + 1)]


def scan_plane(
    N: int,
    a_range: tuple[float, float],
    b_range: tuple[float, float],
    step: float,
    verify_every: int = 0,
    cfg: QuadratureConfig | None = None,
) -> list[ScanRow]:
    """Region and constants on a grid of (a, b); optionally verify every k-th off-line row."""
    rows = []
    off_line = 0
    for a in _axis(*a_range, step):
        for b in _axis(*b_range, step):
            p = Params(N, a, b)
            bc = branch_constants(p)
            row = ScanRow(a, b, classify(p).canonical, bc.c_A, bc.c_B, bc.c_sharp)
            if row.region != "C":
                off_line += 1
                if verify_every and (off_line - 1) % verify_every == 0:
                    try:
                        rep = verify_extremizer(p, cfg)
                        row.verified, row.gap = rep.E_tilde, rep.gap
                        if not rep.ok:
                            row.note = f"gap {rep.gap:.3e} exceeds tolerance {rep.tol:.3e}"
                    except (CKNError, OverflowError) as exc:
                        row.note = f"{type(exc).__name__}: {exc}"
            rows.append(row)
    return rows


def scan_csv(rows: Iterable[ScanRow]) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(SCAN_HEADER)
    for r in rows:
        wr.writerow([
            repr(r.a), repr(r.b), r.region, repr(r.c_A), repr(r.c_B), repr(r.c_sharp),
            "" if r.verified is None else repr(r.verified),
            "" if r.gap is None else repr(r.gap),
        ])
    return buf.getvalue()


# ---------------------------------------------------------------- rate fits


@dataclass
class RateFit:
    exponent: float
    amplitude: float
    r_squared: float
    points: list[tuple[float, float]]
    model: str = "value ~ amplitude * log(1/eps)^exponent"


def fit_rate(
    eps: Sequence[float],
    values: Sequence[float],
    *,
    exp_rate: float = 0.0,
    downweight: int = 3,
    weight: float = 0.25,
) -> RateFit:
    """Weighted log-log fit of ``values ≈ A L^γ e^{-κ L}`` with ``L = log(1/ε)``.

    ``κ = exp_rate`` is fixed, not fitted.  The ``downweight`` largest-ε points
    (pre-asymptotic) get weight ``weight``.
    """
    eps = np.asarray(eps, dtype=float)
    vals = np.asarray(values, dtype=float)
    if len(eps) < 5:
        raise ValueError("a rate fit needs at least five points")
    if np.any(vals <= 0):
        raise ValueError("rate fits need positive values")
    L = np.log(1.0 / eps)
    x = np.log(L)
    y = np.log(vals) + exp_rate * L
    w = np.ones_like(x)
    w[np.argsort(-eps)[:downweight]] = weight
    slope, intercept = np.polyfit(x, y, 1, w=np.sqrt(w))
    resid = y - (slope * x + intercept)
    ybar = np.average(y, weights=w)
    ss_tot = float(np.sum(w * (y - ybar) ** 2))
    r2 = 1.0 - float(np.sum(w * resid**2)) / ss_tot if ss_tot > 0 else 1.0
    model = "value ~ amplitude * log(1/eps)^exponent"
    if exp_rate:
        model += f" * exp(-{exp_rate:g} log(1/eps))"
    return RateFit(
        float(slope), float(math.exp(intercept)), r2,
        [(float(e), float(v)) for e, v in zip(eps, vals)], model,
    )


@dataclass
class HardyRateReport:
    N: int
    b: float
    c_tilde: float
    table: list[dict]
    fit_remainder: RateFit
    fit_denominator: RateFit
    fit_gap: RateFit
    decreasing: bool = True

    def to_dict(self) -> dict:
        return asdict(self)


def hardy_rate_study(
    p: Params, eps_list: Sequence[float] = DEFAULT_EPS, cfg: QuadratureConfig | None = None
) -> HardyRateReport:
    """Remainder ``G - C̃²Q``, denominator ``Q`` and ``Ẽ² - C̃²`` along the log-cutoff sequence."""
    if not p.on_line_c:
        raise NotOnLineC("the Hardy rate study needs a = b+1")
    eps_list = sorted(eps_list, reverse=True)
    c = sharp_constant(p)
    table = []
    for eps in eps_list:
        u = make_hardy_sequence(CutoffSpec(eps), p)
        w = fn.weighted_integrals(u, p, cfg, "PGMQ")
        lhs, rhs = fn.hardy_remainder(u, p, cfg)
        E = math.sqrt(w.P * w.G) / w.M
        table.append({
            "eps": eps,
            "log_inv_eps": math.log(1.0 / eps),
            "remainder": lhs,
            "remainder_ground_state": rhs,
            "Q": w.Q,
            "E_tilde": E,
            "gap": E * E - c * c,
        })
    col = lambda k: [row[k] for row in table]  # noqa: E731
    E = col("E_tilde")
    decreasing = all(e2 < e1 for e1, e2 in zip(E, E[1:])) and E[-1] > c
    return HardyRateReport(
        p.N, p.b, c, table,
        fit_rate(eps_list, col("remainder")),
        fit_rate(eps_list, col("Q")),
        fit_rate(eps_list, col("gap")),
        decreasing,
    )


# ---------------------------------------------------------------- density


@dataclass(frozen=True)
class _Complement(Radial):
    """``(1 - η_ε) f``."""

    base: Radial
    cutoff: CutoffSpec

    @property
    def kinks(self):
        return tuple(sorted(set(self.cutoff.kinks) | set(self.base.kinks)))

    def value(self, r):
        r = np.asarray(r, dtype=float)
        return (1.0 - self.cutoff.eta(r)) * self.base.value(r)

    def deriv(self, r):
        r = np.asarray(r, dtype=float)
        return (1.0 - self.cutoff.eta(r)) * self.base.deriv(r) - self.cutoff.deta(r) * self.base.value(r)


@dataclass
class DensityReport:
    N: int
    a: float
    b: float
    region: str
    case: int
    annulus_rate: float
    table: list[dict]
    fit_cross: RateFit
    cross_bound_ok: bool
    norm_monotone: bool

    def to_dict(self) -> dict:
        return asdict(self)


def density_decay_study(
    p: Params, eps_list: Sequence[float] = DEFAULT_EPS, cfg: QuadratureConfig | None = None
) -> DensityReport:
    """Distance from the extremizer to its cutoff approximants, and the cutoff-gradient term.

    The gradient term ``∫ |f η_ε'|² r^{N-1-2b} dr`` is split over the inner
    annulus ``[ε², ε]`` and the outer one ``[1/ε, 1/ε²]``.  On the annulus where
    the extremizer behaves like a power, the integral evaluates to about
    ``ω e^{-κL}/(κ L²)`` with ``κ = |N - 2b - 2|`` (``ω/L`` when ``κ = 0``); the
    fit divides out ``e^{-κL}`` and reports the remaining power of ``L``.
    """
    region = classify(p)
    if region.on_C:
        raise InvalidSpec("no extremizer on the line a = b+1")
    u = make_extremizer(p)
    sf = fn.sphere_factor(u, p.N)
    weight = p.N - 1 - 2 * p.b
    eps_list = sorted(eps_list, reverse=True)
    table = []
    for eps in eps_list:
        c = CutoffSpec(eps)
        rest = Profile(_Complement(u.radial, c), u.angular)
        w = fn.weighted_integrals(rest, p, cfg, "PG")
        parts = {}
        for name, (lo, hi) in (("inner", c.kinks[:2]), ("outer", c.kinks[2:])):
            sub = QuadratureConfig(
                s_min=math.log(lo), s_max=math.log(hi),
                target_rel_tol=(cfg or QuadratureConfig()).target_rel_tol,
            )
            res = integrate_radial(lambda r: (u.value(r) * c.deta(r)) ** 2, weight, sub)
            parts[name] = sf * res.value
        table.append({
            "eps": eps,
            "log_inv_eps": c.log_inv,
            "norm_P": math.sqrt(w.P),
            "norm_G": math.sqrt(w.G),
            "norm": math.sqrt(w.P + w.G),
            "cross_inner": parts["inner"],
            "cross_outer": parts["outer"],
            "cross": parts["inner"] + parts["outer"],
        })
    kappa = abs(p.beta)
    cross = [row["cross"] for row in table]
    fit = fit_rate(eps_list, cross, exp_rate=kappa)
    # the cutoff-gradient term is bounded by a multiple of (log 1/ε)^{-1}
    scaled = [row["cross"] * row["log_inv_eps"] for row in table]
    decreasing = all(c2 < c1 for c1, c2 in zip(cross, cross[1:]))
    bound_ok = decreasing and scaled[-1] <= 1.05 * max(scaled[:3])
    norms = [row["norm"] for row in table]
    monotone = all(n2 < n1 for n1, n2 in zip(norms, norms[1:]))
    return DensityReport(
        p.N, p.a, p.b, region.canonical, DENSITY_CASES[region.canonical], kappa,
        table, fit, bound_ok, monotone,
    )


# ---------------------------------------------------------------- random bumps and audits


def random_bump(rng: np.random.Generator, grid: bool = False) -> Profile:
    """Smooth bump on a random log-radius sub-window; optionally resampled onto a grid."""
    center = rng.uniform(-2.0, 2.0)
    half = rng.uniform(0.3, 2.5)
    amp = rng.uniform(0.5, 2.0)
    u = Profile(Bump(center, half, amp))
    if grid:
        u = grid_from_profile(u, center - half, center + half, int(rng.integers(48, 128)))
    return u


@dataclass
class AuditReport:
    N: int
    a: float
    b: float
    seed: int
    trials: int
    c_A: float
    c_B: float
    branch_min: float
    branch_max: float
    min_quotient: float
    extremizer_quotient: float | None
    truncated_quotients: list[tuple[float, float]]
    violations_A: int
    violations_B: int
    below_max: int

    def to_dict(self) -> dict:
        return asdict(self)


def branch_bound_audit(
    p: Params, trials: int = 100, seed: int = 0, cfg: QuadratureConfig | None = None
) -> AuditReport:
    """Check both expand-the-square lower bounds on random bumps.

    The smallest quotient observed, and the extremizer's quotient, sit at the
    larger of the two branch constants; the smaller one is never sharp off the
    line and the shared boundary.
    """
    if trials < 10:
        raise ValueError("the audit needs at least 10 trials")
    rng = np.random.default_rng(seed)
    bc = branch_constants(p)
    hi = max(bc.c_A, bc.c_B)
    min_q = math.inf
    viol_A = viol_B = below = 0
    for k in range(trials):
        u = random_bump(rng, grid=bool(k % 2))
        w = fn.weighted_integrals(u, p, cfg, "PGM")
        pg, m2 = w.P * w.G, w.M**2
        slack = 1e-9 * pg
        viol_A += pg < bc.c_A**2 * m2 - slack
        viol_B += pg < bc.c_B**2 * m2 - slack
        q = math.sqrt(pg) / w.M
        below += q < hi - 1e-9 * hi
        min_q = min(min_q, q)
    ext_q = None
    truncated = []
    if not p.on_line_c:
        ext = make_extremizer(p)
        ext_q = fn.rayleigh_tilde(ext, p, cfg)
        for eps in (1e-1, 1e-2, 1e-3, 1e-4):
            truncated.append((eps, fn.rayleigh_tilde(truncate_profile(ext, CutoffSpec(eps)), p, cfg)))
        min_q = min(min_q, ext_q)
    else:
        for eps in (1e-2, 1e-4, 1e-6):
            truncated.append((eps, fn.rayleigh_tilde(make_hardy_sequence(CutoffSpec(eps), p), p, cfg)))
    return AuditReport(
        p.N, p.a, p.b, seed, trials, bc.c_A, bc.c_B, min(bc.c_A, bc.c_B), hi,
        min_q, ext_q, truncated, int(viol_A), int(viol_B), int(below),
    )


@dataclass
class IdentityReport:
    trials: int
    seed: int
    max_expand_defect: float
    max_ibp_defect: float
    max_hardy_defect: float
    tolerances: dict = field(default_factory=lambda: {"expand": 1e-9, "ibp": 1e-10, "hardy": 1e-9})

    @property
    def ok(self) -> bool:
        t = self.tolerances
        return (
            self.max_expand_defect <= t["expand"]
            and self.max_ibp_defect <= t["ibp"]
            and self.max_hardy_defect <= t["hardy"]
        )

    def to_dict(self) -> dict:
        out = asdict(self)
        out["ok"] = self.ok
        return out


def identity_suite(trials: int = 200, seed: int = 0, cfg: QuadratureConfig | None = None) -> IdentityReport:
    """Expand-the-square, integration-by-parts and Hardy-remainder identities on random bumps.

    Defects are relative: to the direct square, to the natural scale
    ``max(1, |N-d-1|/2) ∫ u² |x|^{-d-1}`` of the by-parts identity, and to the
    ground-state form of the Hardy remainder.
    """
    rng = np.random.default_rng(seed)
    e_exp = e_ibp = e_hardy = 0.0
    for k in range(trials):
        u = random_bump(rng, grid=bool(k % 2))
        N = int(rng.integers(1, 6))
        p = Params(N, float(rng.uniform(-2, 3)), float(rng.uniform(-2, 3)))
        esp = fn.ExpandSquareParams(float(rng.uniform(-3, 3)), float(rng.uniform(-3, 3)))
        direct, _ = fn.expand_square_direct(u, p, esp, cfg)
        ident = fn.expand_square_identity(fn.weighted_integrals(u, p, cfg), p, esp)
        e_exp = max(e_exp, abs(direct - ident) / abs(direct))

        d = float(rng.uniform(-3, 5))
        lhs, rhs = fn.ibp_check(u, p, d, cfg)
        scale = abs(rhs) / (0.5 * abs(N - d - 1)) if N - d - 1 else None
        if scale is None:
            mass = integrate_radial(lambda r: u.value(r) ** 2, N - 2 - d, cfg, kinks=u.kinks, support=u.support)
            scale = sphere_area(N) * mass.value
        scale *= max(1.0, 0.5 * abs(N - d - 1))
        e_ibp = max(e_ibp, abs(lhs - rhs) / scale)

        b = float(rng.uniform(-2, 3))
        q = Params(N, b + 1.0, b)
        lhs, rhs = fn.hardy_remainder(u, q, cfg)
        e_hardy = max(e_hardy, abs(lhs - rhs) / abs(rhs))
    return IdentityReport(trials, seed, e_exp, e_ibp, e_hardy)


@dataclass
class InvarianceReport:
    dilation_defect: float
    angular_defect: float
    full_vs_radial: list[tuple[int, float, float]]

    def to_dict(self) -> dict:
        return asdict(self)


INVARIANCE_CASES = {
    2: (Params(2, -1.0, -0.5), CircleTrig(1.0, cos=(0.5,))),
    3: (Params(3, 0.0, 0.0), SpherePoly((((0, 0, 0), 1.0), ((0, 0, 1), 0.5), ((1, 1, 0), 0.3)))),
}


def invariance_suite(cfg: QuadratureConfig | None = None, seed: int = 0) -> InvarianceReport:
    """Dilation invariance of Ẽ; cancellation of the angular factor; Ẽ < E for non-constant D."""
    rng = np.random.default_rng(seed)
    dil = 0.0
    subjects = [(p, make_extremizer(p)) for p in (Params(3, 0, 0), Params(3, 2, 0), Params(5, 0.5, 1.5))]
    subjects += [(Params(3, 0.25, -0.5), random_bump(rng)), (Params(2, 1.0, 0.5), random_bump(rng, grid=True))]
    for p, u in subjects:
        base = fn.rayleigh_tilde(u, p, cfg)
        for lam in (0.5, 2.0, 7.0):
            dil = max(dil, abs(fn.rayleigh_tilde(u.dilate(lam), p, cfg) - base) / base)
    ang = 0.0
    gaps = []
    for N, (p, D) in INVARIANCE_CASES.items():
        f = make_extremizer(p)
        Df = f.with_angular(D)
        Et, Et_D = fn.rayleigh_tilde(f, p, cfg), fn.rayleigh_tilde(Df, p, cfg)
        ang = max(ang, abs(Et_D - Et) / Et)
        E_full = fn.rayleigh_full(Df, p, cfg)
        gaps.append((N, E_full, Et_D))
        bump = random_bump(rng)
        ang = max(ang, abs(fn.rayleigh_tilde(bump.with_angular(D), p, cfg) - fn.rayleigh_tilde(bump, p, cfg))
                  / fn.rayleigh_tilde(bump, p, cfg))
    return InvarianceReport(dil, ang, gaps)
