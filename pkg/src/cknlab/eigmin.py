"""Variational recovery of the sharp constant from a log-radial discretization.

With ``r = e^s`` and ``u(r) = w(s)`` the four energies become

    P = ω ∫ e^{(N-2a)s} w²,   G = ω ∫ e^{(N-2b-2)s} w'²,
    M = ω ∫ e^{(N-a-b-1)s} w², Q = ω ∫ e^{(N-2b-2)s} w².

Off the line a = b + 1 we minimize ``(P + G) / (2M)`` instead of ``sqrt(PG)/M``.
Shifting ``w`` in ``s`` multiplies P by ``e^{(N-2a)δ}`` and G by
``e^{(N-2b-2)δ}``; the exponents differ when ``a != b + 1``, so every trial
function has a shift with ``P = G``, where AM-GM is an equality.  Hence both
quotients share one infimum, and the linear one is the smallest eigenvalue of
the pencil ``((A_P + A_G)/2, A_M)``.  On the line the pencil is ``(A_G, A_Q)``
and its infimum is ``C̃²``.

Discretization: Dirichlet ends, nodal (lumped) masses, midpoint-weighted
first differences for ``w'``.  Stiffness is kept in edge form
``Σ e_j (w_{j+1} - w_j)²`` so the pivots of ``K - σM`` follow the
cancellation-free recurrence ``δ_i = c_i - σ m_i + e_i δ_{i-1}/(e_i + δ_{i-1})``;
plain tridiagonal elimination loses about ``max(e)/min(m)`` in relative accuracy,
which on wide windows is 1e9 or worse.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import FactorizationFailure, NoConvergence
from .params import Params, sharp_constant
from .profiles import Grid, Profile, make_extremizer
from .quadrature import QuadratureConfig, auto_window, sphere_area

__all__ = [
    "Discretization",
    "QuadraticForms",
    "EigenResult",
    "ConvergenceTable",
    "assemble",
    "sturm_count",
    "min_quotient",
    "converge_study",
    "default_window",
    "h_ladder",
]


@dataclass(frozen=True)
class Discretization:
    s_min: float
    s_max: float
    n: int

    def __post_init__(self):
        if self.n < 16:
            raise ValueError("need at least 16 interior nodes")
        if not self.s_min < self.s_max:
            raise ValueError("s_min must be < s_max")

    @property
    def h(self) -> float:
        return (self.s_max - self.s_min) / (self.n + 1)

    @property
    def nodes(self) -> np.ndarray:
        return self.s_min + self.h * np.arange(1, self.n + 1)

    @property
    def midpoints(self) -> np.ndarray:
        return self.s_min + self.h * (np.arange(self.n + 1) + 0.5)

    def shifted(self, delta: float) -> "Discretization":
        return Discretization(self.s_min + delta, self.s_max + delta, self.n)


@dataclass(frozen=True)
class QuadraticForms:
    """Diagonal forms ``P, M, Q`` and the edge weights of the stiffness form ``G``."""

    P: np.ndarray
    M: np.ndarray
    Q: np.ndarray
    G_edges: np.ndarray

    def G_tridiagonal(self) -> tuple[np.ndarray, np.ndarray]:
        e = self.G_edges
        return e[:-1] + e[1:], -e[1:-1]

    def dense(self, name: str) -> np.ndarray:
        if name == "G":
            d, off = self.G_tridiagonal()
            return np.diag(d) + np.diag(off, 1) + np.diag(off, -1)
        return np.diag(getattr(self, name))


def assemble(p: Params, d: Discretization) -> QuadraticForms:
    omega = sphere_area(p.N)
    s, sm, h = d.nodes, d.midpoints, d.h
    return QuadraticForms(
        P=omega * h * np.exp((p.N - 2 * p.a) * s),
        M=omega * h * np.exp((p.N - p.a - p.b - 1) * s),
        Q=omega * h * np.exp((p.N - 2 * p.b - 2) * s),
        G_edges=omega / h * np.exp((p.N - 2 * p.b - 2) * sm),
    )


def _pencil(p: Params, forms: QuadraticForms):
    """(diagonal part c, edge weights e, mass m) of the pencil being minimized."""
    if p.on_line_c:
        return np.zeros_like(forms.Q), forms.G_edges, forms.Q, "hardy"
    return 0.5 * forms.P, 0.5 * forms.G_edges, forms.M, "main"


def sturm_count(c, e, m, sigma: float) -> int:
    """Number of pencil eigenvalues strictly below ``sigma``."""
    n = len(c)
    cs = (c - sigma * m).tolist()
    el = e.tolist()
    count = 0
    delta = cs[0] + el[0]
    for i in range(n):
        if i:
            ep = el[i]
            denom = ep + delta
            if denom == 0.0:
                denom = 1e-300
            delta = cs[i] + ep * delta / denom
        if el[i + 1] + delta < 0.0:
            count += 1
    return count


def _apply(c, e, x):
    """``K x`` in edge form."""
    xp = np.concatenate([[0.0], x, [0.0]])
    flux = e * (xp[1:] - xp[:-1])
    return c * x + flux[:-1] - flux[1:]


def _energy(c, e, x):
    xp = np.concatenate([[0.0], x, [0.0]])
    return float(np.dot(c, x * x) + np.dot(e, np.diff(xp) ** 2))


def _magnitude(c, e, m, lam, x):
    """``(|K||x| + λ M|x|)_i``: scale for a componentwise backward error."""
    xp = np.abs(np.concatenate([[0.0], x, [0.0]]))
    tiny = np.finfo(float).tiny
    return np.abs(c) * xp[1:-1] + e[:-1] * (xp[:-2] + xp[1:-1]) + e[1:] * (xp[1:-1] + xp[2:]) + lam * m * xp[1:-1] + tiny


def _solve(c, e, m, sigma, rhs):
    n = len(c)
    cs = c - sigma * m
    d = np.empty(n)
    delta = cs[0] + e[0]
    for i in range(n):
        if i:
            delta = cs[i] + e[i] * delta / (e[i] + delta)
        d[i] = e[i + 1] + delta
    if np.any(d <= 0) or not np.all(np.isfinite(d)):
        raise FactorizationFailure("shifted pencil is not positive definite")
    z = np.empty(n)
    z[0] = rhs[0]
    for i in range(1, n):
        z[i] = rhs[i] + e[i] * z[i - 1] / d[i - 1]
    x = np.empty(n)
    x[-1] = z[-1] / d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = (z[i] + e[i + 1] * x[i + 1]) / d[i]
    return x


@dataclass
class EigenResult:
    lambda_min: float
    vector: np.ndarray
    iterations: int
    residual: float
    quotient_check: float
    branch: str
    discretization: Discretization
    bisection_steps: int = 0

    def profile(self) -> Profile:
        d = self.discretization
        s = np.linspace(d.s_min, d.s_max, d.n + 2)
        return Profile(Grid(s, np.concatenate([[0.0], self.vector, [0.0]])))

    def to_dict(self) -> dict:
        d = self.discretization
        return {
            "lambda": self.lambda_min,
            "residual": self.residual,
            "iterations": self.iterations,
            "bisection_steps": self.bisection_steps,
            "quotient_check": self.quotient_check,
            "branch": self.branch,
            "grid": {"s_min": d.s_min, "s_max": d.s_max, "n": d.n, "h": d.h},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def vector_to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["s", "w"])
            for s, v in zip(self.discretization.nodes, self.vector):
                wr.writerow([repr(float(s)), repr(float(v))])


def min_quotient(
    p: Params,
    d: Discretization,
    *,
    residual_tol: float = 1e-10,
    max_iter: int = 50,
    check_quotient: bool = True,
    cfg: QuadratureConfig | None = None,
) -> EigenResult:
    """Smallest pencil eigenvalue by Sturm bisection, polished by inverse iteration.

    ``lambda_min`` approximates ``C̃`` off the line a = b + 1 and ``C̃²`` on it.
    ``residual`` is the componentwise backward error
    ``max_i |Kx - λMx|_i / (|K||x| + λM|x|)_i``; a norm-wise residual is
    swamped by rounding in tails where the stiffness weights are huge.
    """
    forms = assemble(p, d)
    c, e, m, branch = _pencil(p, forms)

    # bracket [lo, hi] with count(lo) = 0 <= 1 <= count(hi)
    lo = 0.0
    trial = np.sin(np.pi * np.arange(1, d.n + 1) / (d.n + 1))
    hi = _energy(c, e, trial) / float(np.dot(m, trial * trial))
    steps = 0
    while sturm_count(c, e, m, hi) < 1:
        hi *= 2.0
        steps += 1
        if steps > 200:
            raise NoConvergence("could not bracket the smallest eigenvalue")
    while hi - lo > 1e-10 * hi:
        mid = 0.5 * (lo + hi)
        if sturm_count(c, e, m, mid) >= 1:
            hi = mid
        else:
            lo = mid
        steps += 1

    x = np.ones(d.n)
    lam = hi
    residual = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        x = _solve(c, e, m, lo, m * x)
        x /= math.sqrt(float(np.dot(m, x * x)))
        lam = _energy(c, e, x)
        r = _apply(c, e, x) - lam * m * x
        residual = float(np.max(np.abs(r) / _magnitude(c, e, m, lam, x)))
        if residual <= residual_tol:
            break
    else:
        raise NoConvergence(f"inverse iteration residual {residual:.3e} after {max_iter} steps")
    if x[np.argmax(np.abs(x))] < 0:
        x = -x

    result = EigenResult(lam, x, it, residual, math.nan, branch, d, steps)
    if check_quotient:
        from .functionals import rayleigh_tilde

        cfg = cfg or QuadratureConfig(panels=1, nodes_per_panel=8, target_rel_tol=1e-10)
        result.quotient_check = rayleigh_tilde(result.profile(), p, cfg)
    return result


def default_window(p: Params, pad: float = 0.0) -> tuple[float, float]:
    """Log-radius window carrying the extremizer's P, G and M integrands."""
    if p.on_line_c:
        raise ValueError("no extremizer on the line a = b+1; give the window explicitly")
    u = make_extremizer(p)
    N, a, b = p.N, p.a, p.b
    wins = [
        auto_window(lambda r: u.value(r) ** 2, N - 1 - 2 * a),
        auto_window(lambda r: u.deriv(r) ** 2, N - 1 - 2 * b),
        auto_window(lambda r: u.value(r) ** 2, N - 2 - a - b),
    ]
    return min(w[0] for w in wins) - pad, max(w[1] for w in wins) + pad


def h_ladder(s_min: float, s_max: float, n_finest: int, rungs: int = 3) -> list[Discretization]:
    """Discretizations with ``h`` halving toward ``n_finest`` interior nodes (coarse first)."""
    cells = n_finest + 1
    if cells % (1 << (rungs - 1)):
        raise ValueError("n_finest + 1 must be divisible by 2**(rungs-1)")
    return [Discretization(s_min, s_max, cells // (1 << k) - 1) for k in range(rungs - 1, -1, -1)]


@dataclass
class ConvergenceTable:
    rows: list[tuple[float, tuple[float, float], float]]
    limit: float
    order: float
    results: list[EigenResult] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "rows": [{"h": h, "window": list(w), "lambda": lam} for h, w, lam in self.rows],
            "richardson_limit": self.limit,
            "order": self.order,
        }


def converge_study(p: Params, ladder: Sequence[Discretization], **kwargs) -> ConvergenceTable:
    """Solve on every rung; estimate the order in ``h`` and a Richardson limit.

    Order and limit use the last three rungs and assume a constant refinement
    ratio between them.  When the rungs differ in window rather than in ``h``,
    the order is reported as NaN.
    """
    if len(ladder) < 3:
        raise ValueError("a convergence study needs at least three rungs")
    results = [min_quotient(p, d, **kwargs) for d in ladder]
    rows = [(d.h, (d.s_min, d.s_max), r.lambda_min) for d, r in zip(ladder, results)]
    (h1, _, l1), (h2, _, l2), (h3, _, l3) = rows[-3:]
    order = math.nan
    limit = l3
    if h1 > h2 > h3 and abs(l2 - l3) > 0:
        ratio = h1 / h2
        q = (l1 - l2) / (l2 - l3)
        if q > 0:
            order = math.log(q) / math.log(ratio)
            limit = l3 + (l3 - l2) / (ratio**order - 1.0)
    return ConvergenceTable(rows, limit, order, results)


def extremizer_quotient_on_grid(p: Params, d: Discretization) -> float:
    """Discrete pencil quotient of the sampled closed-form extremizer."""
    forms = assemble(p, d)
    c, e, m, _ = _pencil(p, forms)
    x = make_extremizer(p).value(np.exp(d.nodes))
    return _energy(c, e, x) / float(np.dot(m, x * x))


def reference_value(p: Params) -> float:
    """Continuum value the pencil approximates: ``C̃`` off the line, ``C̃²`` on it."""
    c = sharp_constant(p)
    return c * c if p.on_line_c else c
