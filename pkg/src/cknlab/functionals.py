"""Weighted energies, Rayleigh quotients and the expand-the-square identities.

For ``u = f(r) D(σ)`` every integral over R^N factors into a sphere integral of
``D²`` times a radial integral:

    P = ∫ |u|² |x|^{-2a}              -> r^{N-1-2a} f²
    G = ∫ |x·∇u|² |x|^{-2b-2}         -> r^{N-1-2b} f'²
    M = ∫ |u|² |x|^{-(a+b+1)}         -> r^{N-2-a-b} f²
    Q = ∫ |u|² |x|^{-2(b+1)}          -> r^{N-3-2b} f²
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DivergenceDetected,
    NonPositiveSample,
    NotOnLineC,
    UnsupportedProfile,
    ZeroDenominator,
)
from .params import Params, sharp_constant
from .profiles import Profile
from .quadrature import (
    QuadratureConfig,
    integrate_radial,
    integrate_sphere,
    integrate_sphere_gradient,
)

__all__ = [
    "WeightedIntegrals",
    "ExpandSquareParams",
    "ELResidual",
    "sphere_factor",
    "weighted_integrals",
    "rayleigh_tilde",
    "rayleigh_full",
    "expand_square_direct",
    "expand_square_identity",
    "ibp_check",
    "hardy_remainder",
    "el_residual",
    "norm_Htilde",
]

EL_CONVENTION = "u'/u = t r^(b-a) [+ (2(b+1)-N)/r on the sN branch]"


@dataclass(frozen=True)
class WeightedIntegrals:
    P: float
    G: float
    M: float
    Q: float
    err: float
    errors: dict


@dataclass(frozen=True)
class ExpandSquareParams:
    t: float
    s: float


@dataclass(frozen=True)
class ELResidual:
    max_abs: float
    max_rel: float
    convention: str = EL_CONVENTION


def sphere_factor(u: Profile, N: int) -> float:
    """``∫_{S^{N-1}} D² dσ``."""
    return integrate_sphere(u.angular, 2, N)


def _radial(u: Profile, integrand, p_exponent: float, cfg, component: str):
    try:
        return integrate_radial(integrand, p_exponent, cfg, kinks=u.kinks, support=u.support)
    except DivergenceDetected as exc:
        raise DivergenceDetected(str(exc), component=component) from exc


def _radial_pieces(u: Profile, p: Params, cfg, components: str):
    N, a, b = p.N, p.a, p.b
    f2 = lambda r: u.value(r) ** 2  # noqa: E731
    df2 = lambda r: u.deriv(r) ** 2  # noqa: E731
    table = {
        "P": (f2, N - 1 - 2 * a),
        "G": (df2, N - 1 - 2 * b),
        "M": (f2, N - 2 - a - b),
        "Q": (f2, N - 3 - 2 * b),
    }
    return {c: _radial(u, *table[c], cfg, c) for c in components}


def weighted_integrals(
    u: Profile, p: Params, cfg: QuadratureConfig | None = None, components: str = "PGMQ"
) -> WeightedIntegrals:
    """The four weighted energies of ``u``.  Components not requested are NaN."""
    sf = sphere_factor(u, p.N)
    pieces = _radial_pieces(u, p, cfg, components)
    vals = {c: math.nan for c in "PGMQ"}
    errs = {}
    for c, res in pieces.items():
        vals[c] = sf * res.value
        errs[c] = sf * res.abs_error_estimate
    return WeightedIntegrals(**vals, err=max(errs.values(), default=0.0), errors=errs)


def rayleigh_tilde(u: Profile, p: Params, cfg: QuadratureConfig | None = None) -> float:
    """``sqrt(P G) / M``: radial-derivative quotient."""
    w = weighted_integrals(u, p, cfg, "PGM")
    return _quotient(w.P, w.G, w.M)


def _quotient(P, G, M):
    if M == 0:
        raise ZeroDenominator("the M integral vanishes (u = 0)")
    return math.sqrt(P * G) / M


def rayleigh_full(u: Profile, p: Params, cfg: QuadratureConfig | None = None) -> float:
    """Full-gradient quotient ``sqrt(P ∫|∇u|²|x|^{-2b}) / M``.

    ``|∇u|² = f'² D² + r^{-2} f² |∇_σ D|²``; for constant ``D`` the second term is
    absent and the value coincides with :func:`rayleigh_tilde`.
    """
    w = weighted_integrals(u, p, cfg, "PGM")
    grad_sphere = integrate_sphere_gradient(u.angular, p.N)
    G_full = w.G
    if grad_sphere != 0.0:
        q = _radial(u, lambda r: u.value(r) ** 2, p.N - 3 - 2 * p.b, cfg, "Q")
        G_full = w.G + grad_sphere * q.value
    return _quotient(w.P, G_full, w.M)


def _require_compact(u: Profile):
    if not u.is_compact:
        raise UnsupportedProfile(
            "identity checks need a profile compactly supported away from 0 and infinity"
        )


def expand_square_direct(
    u: Profile, p: Params, esp: ExpandSquareParams, cfg: QuadratureConfig | None = None
) -> tuple[float, float]:
    """``∫ (r^{-b} f' + t r^{-a} f + s r^{-b-1} f)² r^{N-1} dr`` times the sphere factor.

    Returns ``(value, abs_error)``.
    """
    _require_compact(u)
    a, b, t, s = p.a, p.b, esp.t, esp.s

    def integrand(r):
        f = u.value(r)
        return (r**-b * u.deriv(r) + t * r**-a * f + s * r ** (-b - 1) * f) ** 2

    res = _radial(u, integrand, p.N - 1, cfg, "S")
    sf = sphere_factor(u, p.N)
    return sf * res.value, sf * res.abs_error_estimate


def expand_square_identity(w: WeightedIntegrals, p: Params, esp: ExpandSquareParams) -> float:
    """The expanded square after integrating the cross terms by parts."""
    N, a, b, t, s = p.N, p.a, p.b, esp.t, esp.s
    out = w.G + t * t * w.P + t * (2 * s - (N - a - b - 1)) * w.M
    coef_q = s * (s - (N - 2 * b - 2))
    if coef_q != 0.0:
        out += coef_q * w.Q
    return out


def ibp_check(
    u: Profile, p: Params, d: float, cfg: QuadratureConfig | None = None
) -> tuple[float, float]:
    """Both sides of ``∫ u (x·∇u) |x|^{-d-1} = -(N-d-1)/2 ∫ u² |x|^{-d-1}``."""
    _require_compact(u)
    sf = sphere_factor(u, p.N)
    lhs = _radial(u, lambda r: u.value(r) * u.deriv(r), p.N - 1 - d, cfg, "lhs")
    mass = _radial(u, lambda r: u.value(r) ** 2, p.N - 2 - d, cfg, "rhs")
    return sf * lhs.value, -0.5 * (p.N - d - 1) * sf * mass.value


def hardy_remainder(
    u: Profile, p: Params, cfg: QuadratureConfig | None = None
) -> tuple[float, float]:
    """``G - C̃² Q`` and the ground-state form ``∫ |∂_r(u r^{β/2})|² r dr`` (β = N-2b-2)."""
    if not p.on_line_c:
        raise NotOnLineC("the Hardy remainder identity needs a = b+1")
    _require_compact(u)
    c = sharp_constant(p)
    w = weighted_integrals(u, p, cfg, "GQ")
    half = p.beta / 2.0

    def ground(r):
        rh = r**half
        return (u.deriv(r) * rh + half * u.value(r) * rh / r) ** 2

    res = _radial(u, ground, 1.0, cfg, "remainder")
    sf = sphere_factor(u, p.N)
    return w.G - c * c * w.Q, sf * res.value


def el_residual(u: Profile, p: Params, t: float, branch: str = "s0", samples=100) -> ELResidual:
    """Residual of the first-order Euler-Lagrange equation at sampled radii.

    ``samples`` is either a count (log-spaced radii in [1e-2, 1e2]) or an array
    of radii.
    """
    if branch not in ("s0", "sN"):
        raise ValueError("branch must be 's0' or 'sN'")
    r = np.logspace(-2, 2, samples) if np.isscalar(samples) else np.asarray(samples, dtype=float)
    f = u.value(r)
    if np.any(f <= 0):
        raise NonPositiveSample("profile must be positive at every sampled radius")
    ratio = u.deriv(r) / f
    drive = t * r ** (p.b - p.a)
    res = ratio - drive
    scale = np.abs(ratio) + np.abs(drive)
    if branch == "sN":
        res = res + p.beta / r
        scale = scale + abs(p.beta) / r
    rel = np.abs(res) / np.where(scale > 0, scale, 1.0)
    return ELResidual(float(np.max(np.abs(res))), float(np.max(rel)))


def norm_Htilde(u: Profile, p: Params, cfg: QuadratureConfig | None = None) -> float:
    """``sqrt(G + P)``; divergence of either part propagates."""
    w = weighted_integrals(u, p, cfg, "PG")
    return math.sqrt(w.G + w.P)
