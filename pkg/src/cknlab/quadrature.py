"""Radial and spherical quadrature.

Radial integrals ``∫_0^∞ r^p f(r) dr`` are computed after the substitution
``r = e^s``, which turns every integrand in scope (powers times exponentials
of powers) into a smooth function of ``s`` with exponential tails.  The
transformed integral ``∫ e^{(p+1)s} f(e^s) ds`` is handled by composite
Gauss-Legendre panels whose boundaries are pinned to the profile's kinks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DivergenceDetected, NonFinite, PeakNotFound, UnsupportedAngular

__all__ = [
    "QuadratureConfig",
    "IntegralResult",
    "integrate_radial",
    "auto_window",
    "sphere_area",
    "sphere_nodes",
    "integrate_sphere",
    "integrate_sphere_gradient",
]

SCAN_LIMIT = 60.0
SCAN_CAP = 200.0
SCAN_STEP = 0.05
DECAY_THRESHOLD = 1e-18
WINDOW_PAD = 2.0
MAX_NODES = 1 << 22
ROUNDOFF = 8 * np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureConfig:
    """Quadrature controls.  ``s_min``/``s_max`` of ``None`` selects the window automatically."""

    s_min: float | None = None
    s_max: float | None = None
    panels: int = 4
    nodes_per_panel: int = 16
    target_rel_tol: float = 1e-12
    max_refinements: int = 20

    def __post_init__(self):
        if self.panels < 1:
            raise ValueError("panels must be >= 1")
        if not 4 <= self.nodes_per_panel <= 64:
            raise ValueError("nodes_per_panel must be in [4, 64]")
        if self.max_refinements < 1:
            raise ValueError("max_refinements must be >= 1")
        if self.target_rel_tol <= 0:
            raise ValueError("target_rel_tol must be positive")
        if (self.s_min is None) != (self.s_max is None):
            raise ValueError("give both s_min and s_max, or neither")
        if self.s_min is not None and not self.s_min < self.s_max:
            raise ValueError("s_min must be < s_max")


@dataclass(frozen=True)
class IntegralResult:
    value: float
    abs_error_estimate: float
    refinements_used: int
    window: tuple[float, float]
    abs_integral: float = 0.0


@lru_cache(maxsize=None)
def _gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _transformed(f: Callable, p_exponent: float, s: np.ndarray) -> np.ndarray:
    """``e^{(p+1)s} f(e^s)`` evaluated without overflowing the power factor."""
    r = np.exp(s)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore", under="ignore"):
        fv = np.asarray(f(r), dtype=float)
        if fv.shape != s.shape:
            fv = np.broadcast_to(fv, s.shape).astype(float)
        if not np.all(np.isfinite(fv)):
            bad = s[~np.isfinite(fv)]
            raise NonFinite(f"integrand not finite at s={bad[0]:.6g}")
        logmag = (p_exponent + 1.0) * s + np.log(np.abs(fv))
        g = np.sign(fv) * np.exp(logmag)
    g[fv == 0.0] = 0.0
    if not np.all(np.isfinite(g)):
        raise NonFinite("integrand overflowed after the power weight was applied")
    return g


def _scan(f: Callable, p_exponent: float, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    n = int(round((hi - lo) / SCAN_STEP)) + 1
    s = np.linspace(lo, hi, n)
    return s, np.abs(_transformed(f, p_exponent, s))


def auto_window(
    f: Callable,
    p_exponent: float,
    support: tuple[float, float] | None = None,
) -> tuple[float, float]:
    """Log-radius window that carries all but ~1e-18 of the integrand's peak.

    A known compact support is returned exactly (in log radius).
    """
    if support is not None:
        return math.log(support[0]), math.log(support[1])
    s, g = _scan(f, p_exponent, -SCAN_LIMIT, SCAN_LIMIT)
    peak = g.max()
    if peak == 0.0:
        return -SCAN_LIMIT, SCAN_LIMIT
    left_open = g[0] > DECAY_THRESHOLD * peak
    right_open = g[-1] > DECAY_THRESHOLD * peak
    if left_open and right_open and g[0] > g[1] and g[-1] > g[-2]:
        raise PeakNotFound("integrand grows toward both ends of the coarse scan")

    # widen once toward the cap on any side that has not decayed yet
    if left_open or right_open:
        lo = -SCAN_CAP if left_open else -SCAN_LIMIT
        hi = SCAN_CAP if right_open else SCAN_LIMIT
        s, g = _scan(f, p_exponent, lo, hi)
        peak = g.max()
        if g[0] > DECAY_THRESHOLD * peak or g[-1] > DECAY_THRESHOLD * peak:
            side = "left" if g[0] > DECAY_THRESHOLD * peak else "right"
            raise DivergenceDetected(
                f"integrand has not decayed on the {side} at |s| = {SCAN_CAP:g}"
            )
    above = np.nonzero(g > DECAY_THRESHOLD * peak)[0]
    return float(s[above[0]] - WINDOW_PAD), float(s[above[-1]] + WINDOW_PAD)


def _breakpoints(s_min: float, s_max: float, kinks: Iterable[float]) -> np.ndarray:
    pts = [s_min, s_max]
    for k in kinks:
        if k > 0:
            sk = math.log(k)
            if s_min < sk < s_max:
                pts.append(sk)
    return np.unique(np.asarray(pts, dtype=float))


def _composite(f, p_exponent, edges: np.ndarray, per_segment: int, x, w):
    # panels: every segment between consecutive edges split into equal parts
    a = edges[:-1]
    h = (edges[1:] - a) / per_segment
    starts = (a[:, None] + h[:, None] * np.arange(per_segment)[None, :]).ravel()
    widths = np.repeat(h, per_segment)
    half = 0.5 * widths
    nodes = (starts + half)[:, None] + half[:, None] * x[None, :]
    g = _transformed(f, p_exponent, nodes.ravel()).reshape(nodes.shape)
    panel_sums = (g * w[None, :]).sum(axis=1) * half
    panel_abs = (np.abs(g) * w[None, :]).sum(axis=1) * half
    return float(np.sum(panel_sums)), float(np.sum(panel_abs))


def integrate_radial(
    f: Callable,
    p_exponent: float,
    cfg: QuadratureConfig | None = None,
    *,
    kinks: Sequence[float] = (),
    support: tuple[float, float] | None = None,
) -> IntegralResult:
    """Integrate ``r**p_exponent * f(r)`` over ``(0, ∞)``.

    Panel counts double until two successive values differ by at most
    ``target_rel_tol`` times the integral of the absolute integrand; that last
    difference, floored at the summation roundoff, is the reported error estimate.
    """
    cfg = cfg or QuadratureConfig()
    if cfg.s_min is not None:
        s_min, s_max = cfg.s_min, cfg.s_max
        if support is not None:
            s_min = max(s_min, math.log(support[0]))
            s_max = min(s_max, math.log(support[1]))
    else:
        s_min, s_max = auto_window(f, p_exponent, support)
    if not s_min < s_max:
        return IntegralResult(0.0, 0.0, 0, (s_min, s_max))
    edges = _breakpoints(s_min, s_max, kinks)
    x, w = _gauss_legendre(cfg.nodes_per_panel)

    per = cfg.panels
    diff = math.inf
    level = 0
    prev, _ = _composite(f, p_exponent, edges, per, x, w)
    for level in range(1, cfg.max_refinements + 1):
        per *= 2
        if (len(edges) - 1) * per * cfg.nodes_per_panel > MAX_NODES:
            break
        val, absval = _composite(f, p_exponent, edges, per, x, w)
        diff = abs(val - prev)
        if diff <= cfg.target_rel_tol * absval:
            # floor at the rounding level of the panel sums
            err = max(diff, ROUNDOFF * absval)
            return IntegralResult(val, err, level, (s_min, s_max), absval)
        prev = val
    raise DivergenceDetected(
        f"no convergence after {level} refinements (last change {diff:.3e})"
    )


def sphere_area(N: int) -> float:
    """Surface measure of the unit sphere ``S^{N-1}`` (2 for the two-point sphere)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if N == 1:
        return 2.0
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


@lru_cache(maxsize=None)
def _sphere_rule(N: int, n_theta: int, n_phi: int):
    if N == 1:
        pts = np.array([[-1.0], [1.0]])
        wts = np.array([1.0, 1.0])
    elif N == 2:
        th = 2.0 * np.pi * np.arange(n_phi) / n_phi
        pts = np.column_stack([np.cos(th), np.sin(th)])
        wts = np.full(n_phi, 2.0 * np.pi / n_phi)
    elif N == 3:
        ct, wt = np.polynomial.legendre.leggauss(n_theta)
        ph = 2.0 * np.pi * np.arange(n_phi) / n_phi
        CT, PH = np.meshgrid(ct, ph, indexing="ij")
        ST = np.sqrt(1.0 - CT**2)
        pts = np.column_stack([(ST * np.cos(PH)).ravel(), (ST * np.sin(PH)).ravel(), CT.ravel()])
        wts = (wt[:, None] * np.full(n_phi, 2.0 * np.pi / n_phi)[None, :]).ravel()
    else:
        raise UnsupportedAngular(f"no sphere quadrature for N={N}")
    return pts, wts


def sphere_nodes(N: int, degree: int = 8) -> tuple[np.ndarray, np.ndarray]:
    """Nodes (unit vectors, shape ``(m, N)``) and weights exact for polynomials up to ``degree``."""
    n_phi = max(64, 2 * degree + 8)
    n_theta = max(32, degree + 4)
    return _sphere_rule(N, n_theta, n_phi)


def integrate_sphere(D, power: int, N: int) -> float:
    """``∫_{S^{N-1}} D^power dσ`` for a supported angular factor."""
    if power not in (1, 2):
        raise ValueError("power must be 1 or 2")
    if D.is_constant:
        return D.constant_value**power * sphere_area(N)
    if not D.supports(N):
        raise UnsupportedAngular(f"{type(D).__name__} is not defined on S^{N - 1}")
    pts, wts = sphere_nodes(N, power * D.degree)
    return float(np.dot(wts, D.evaluate(pts) ** power))


def integrate_sphere_gradient(D, N: int) -> float:
    """``∫_{S^{N-1}} |∇_σ D|^2 dσ`` (tangential gradient)."""
    if D.is_constant:
        return 0.0
    if not D.supports(N):
        raise UnsupportedAngular(f"{type(D).__name__} is not defined on S^{N - 1}")
    pts, wts = sphere_nodes(N, 2 * D.degree)
    return float(np.dot(wts, D.grad_sq(pts)))
