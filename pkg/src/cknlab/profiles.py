"""Trial functions ``u(x) = f(|x|) D(x/|x|)``.

Every radial part exposes ``value(r)``, ``deriv(r)`` (the a.e. radial
derivative), the radii where it has kinks, and its support when compact.
Quadrature pins panel boundaries to those kinks.

Extremizers follow the sign convention
``u = D exp(t r^k / k)`` with ``k = b + 1 - a`` (times ``r^{2(b+1)-N}`` for the
B family), so that ``u'/u = t r^{b-a}``.  The first-order equation derived by
expanding the square is written with ``-t`` in place of ``t``; the two
conventions differ only by that relabeling.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TextIO

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InvalidSpec
from .params import Params, classify

__all__ = [
    "Constant",
    "CircleTrig",
    "SpherePoly",
    "CutoffSpec",
    "ExtremizerSpec",
    "Radial",
    "ExtremizerRadial",
    "Power",
    "PowerCutoff",
    "Truncated",
    "Grid",
    "Bump",
    "Dilated",
    "Profile",
    "default_t",
    "validity_check",
    "eval_extremizer",
    "make_extremizer",
    "make_cutoff_eta",
    "make_hardy_sequence",
    "truncate_profile",
    "envelope_check",
    "grid_from_profile",
    "write_grid_csv",
    "read_grid_csv",
]

LOG_LIMIT = 700.0
EPS_MAX = 0.3


# ---------------------------------------------------------------- angular factors


@dataclass(frozen=True)
class Constant:
    c: float = 1.0

    def __post_init__(self):
        if self.c == 0:
            raise InvalidSpec("angular factor must not vanish identically")

    is_constant = True
    degree = 0

    @property
    def constant_value(self) -> float:
        return self.c

    def supports(self, N: int) -> bool:
        return True

    def evaluate(self, pts: np.ndarray) -> np.ndarray:
        return np.full(len(pts), float(self.c))

    def grad_sq(self, pts: np.ndarray) -> np.ndarray:
        return np.zeros(len(pts))


@dataclass(frozen=True)
class CircleTrig:
    """``c0 + Σ_k cos_k cos(kθ) + sin_k sin(kθ)`` on the unit circle (N = 2)."""

    c0: float = 0.0
    cos: tuple[float, ...] = ()
    sin: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "cos", tuple(float(x) for x in self.cos))
        object.__setattr__(self, "sin", tuple(float(x) for x in self.sin))
        if self.c0 == 0 and not any(self.cos) and not any(self.sin):
            raise InvalidSpec("angular factor must not vanish identically")

    @property
    def is_constant(self) -> bool:
        return not any(self.cos) and not any(self.sin)

    @property
    def constant_value(self) -> float:
        return self.c0

    @property
    def degree(self) -> int:
        return max(len(self.cos), len(self.sin))

    def supports(self, N: int) -> bool:
        return N == 2

    def _theta(self, pts):
        return np.arctan2(pts[:, 1], pts[:, 0])

    def evaluate(self, pts: np.ndarray) -> np.ndarray:
        th = self._theta(pts)
        out = np.full(th.shape, self.c0)
        for k, c in enumerate(self.cos, start=1):
            out += c * np.cos(k * th)
        for k, c in enumerate(self.sin, start=1):
            out += c * np.sin(k * th)
        return out

    def grad_sq(self, pts: np.ndarray) -> np.ndarray:
        th = self._theta(pts)
        d = np.zeros(th.shape)
        for k, c in enumerate(self.cos, start=1):
            d -= k * c * np.sin(k * th)
        for k, c in enumerate(self.sin, start=1):
            d += k * c * np.cos(k * th)
        return d**2


@dataclass(frozen=True)
class SpherePoly:
    """Polynomial ``Σ c x^i y^j z^k`` restricted to the unit sphere S² (N = 3).

    ``terms`` is a tuple of ``((i, j, k), c)`` pairs.
    """

    terms: tuple = ((0, 0, 0), 1.0),

    def __post_init__(self):
        terms = tuple((tuple(int(e) for e in mono), float(c)) for mono, c in self.terms)
        if not any(c for _, c in terms):
            raise InvalidSpec("angular factor must not vanish identically")
        object.__setattr__(self, "terms", terms)

    @property
    def is_constant(self) -> bool:
        return all(mono == (0, 0, 0) or c == 0 for mono, c in self.terms)

    @property
    def constant_value(self) -> float:
        return sum(c for mono, c in self.terms if mono == (0, 0, 0))

    @property
    def degree(self) -> int:
        return max(sum(mono) for mono, _ in self.terms)

    def supports(self, N: int) -> bool:
        return N == 3

    def evaluate(self, pts: np.ndarray) -> np.ndarray:
        x, y, z = pts.T
        out = np.zeros(len(pts))
        for (i, j, k), c in self.terms:
            out += c * x**i * y**j * z**k
        return out

    def grad_sq(self, pts: np.ndarray) -> np.ndarray:
        x, y, z = pts.T
        g = np.zeros((len(pts), 3))
        for (i, j, k), c in self.terms:
            if i:
                g[:, 0] += c * i * x ** (i - 1) * y**j * z**k
            if j:
                g[:, 1] += c * j * x**i * y ** (j - 1) * z**k
            if k:
                g[:, 2] += c * k * x**i * y**j * z ** (k - 1)
        radial = np.einsum("ij,ij->i", g, pts)
        tang = g - radial[:, None] * pts
        return np.einsum("ij,ij->i", tang, tang)


# ---------------------------------------------------------------- cutoff


@dataclass(frozen=True)
class CutoffSpec:
    """Logarithmic cutoff η_ε: 1 on [ε, 1/ε], log ramps down to 0 at ε² and 1/ε².

    The smoothing kernel that would mollify η_ε has support radius ε²/2; it is
    not applied, the Lipschitz cutoff is used directly.
    """

    eps: float

    def __post_init__(self):
        if not 0.0 < self.eps < EPS_MAX:
            raise InvalidSpec(f"cutoff eps must lie in (0, {EPS_MAX}), got {self.eps}")

    @property
    def log_inv(self) -> float:
        return math.log(1.0 / self.eps)

    @property
    def mollifier_radius(self) -> float:
        return self.eps**2 / 2.0

    @property
    def kinks(self) -> tuple[float, ...]:
        e = self.eps
        return (e * e, e, 1.0 / e, 1.0 / (e * e))

    @property
    def support(self) -> tuple[float, float]:
        e = self.eps
        return (e * e, 1.0 / (e * e))

    def eta(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        L = self.log_inv
        lr = np.log(np.where(r > 0, r, 1.0))
        e1, e2, e3, e4 = self.kinks
        out = np.zeros(r.shape)
        inner = (r >= e1) & (r < e2)
        outer = (r > e3) & (r <= e4)
        out[(r >= e2) & (r <= e3)] = 1.0
        out[inner] = (lr[inner] + 2.0 * L) / L
        out[outer] = (2.0 * L - lr[outer]) / L
        return np.clip(out, 0.0, 1.0)

    def deta(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        L = self.log_inv
        e1, e2, e3, e4 = self.kinks
        out = np.zeros(r.shape)
        inner = (r > e1) & (r < e2)
        outer = (r > e3) & (r < e4)
        out[inner] = 1.0 / (L * r[inner])
        out[outer] = -1.0 / (L * r[outer])
        return out


# ---------------------------------------------------------------- radial parts


class Radial:
    kinks: tuple[float, ...] = ()
    support: tuple[float, float] | None = None

    def value(self, r) -> np.ndarray:
        raise NotImplementedError

    def deriv(self, r) -> np.ndarray:
        raise NotImplementedError


def default_t(family: str, p: Params) -> float:
    """Unit-size rate with the region-appropriate sign (``-sign(b + 1 - a)``)."""
    return -1.0 if p.k > 0 else 1.0


@dataclass(frozen=True)
class ExtremizerSpec:
    family: str
    t: float | None = None
    angular: object = field(default_factory=Constant)

    def __post_init__(self):
        if self.family not in ("A", "B"):
            raise InvalidSpec(f"family must be 'A' or 'B', got {self.family!r}")

    def resolved_t(self, p: Params) -> float:
        return default_t(self.family, p) if self.t is None else float(self.t)


def validity_check(spec: ExtremizerSpec, p: Params) -> tuple[bool, str]:
    if p.on_line_c:
        return False, "a = b+1 excluded"
    t = spec.resolved_t(p)
    if t == 0:
        return False, "t must be nonzero"
    reg = classify(p)
    if spec.family == "A":
        if reg.in_A1:
            return (t < 0, "ok" if t < 0 else "t must be negative in A1")
        if reg.in_A2:
            return (t > 0, "ok" if t > 0 else "t must be positive in A2")
        return False, "family A requires (a, b) in A1 or A2"
    if reg.in_B1:
        return (t > 0, "ok" if t > 0 else "t must be positive in B1")
    if reg.in_B2:
        return (t < 0, "ok" if t < 0 else "t must be negative in B2")
    return False, "family B requires (a, b) in B1 or B2"


@dataclass(frozen=True)
class ExtremizerRadial(Radial):
    family: str
    t: float
    params: Params
    underflow: str = "zero"

    @property
    def power(self) -> float:
        p = self.params
        return 0.0 if self.family == "A" else 2.0 * (p.b + 1.0) - p.N

    def log_value(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        k = self.params.k
        with np.errstate(over="ignore"):
            return self.power * np.log(r) + self.t * r**k / k

    def value(self, r) -> np.ndarray:
        lu = self.log_value(r)
        if np.any(lu > LOG_LIMIT):
            raise OverflowError("extremizer exceeds exp(700) in the requested radii")
        if self.underflow == "raise" and np.any(lu < -LOG_LIMIT):
            raise OverflowError("extremizer underflows below exp(-700)")
        return np.where(lu < -LOG_LIMIT, 0.0, np.exp(np.maximum(lu, -LOG_LIMIT)))

    def deriv(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        p = self.params
        with np.errstate(over="ignore"):
            rate = self.power / r + self.t * r ** (p.b - p.a)
        u = self.value(r)
        return np.where(u == 0.0, 0.0, u * rate)


@dataclass(frozen=True)
class Power(Radial):
    """``c r^kappa`` on all of (0, ∞)."""

    kappa: float
    c: float = 1.0

    def value(self, r):
        return self.c * np.asarray(r, dtype=float) ** self.kappa

    def deriv(self, r):
        r = np.asarray(r, dtype=float)
        if self.kappa == 0:
            return np.zeros(r.shape)
        return self.c * self.kappa * r ** (self.kappa - 1.0)


@dataclass(frozen=True)
class PowerCutoff(Radial):
    kappa: float
    cutoff: CutoffSpec

    @property
    def kinks(self):
        return self.cutoff.kinks

    @property
    def support(self):
        return self.cutoff.support

    def value(self, r):
        r = np.asarray(r, dtype=float)
        return r**self.kappa * self.cutoff.eta(r)

    def deriv(self, r):
        r = np.asarray(r, dtype=float)
        rk = r**self.kappa
        return rk * self.cutoff.deta(r) + self.kappa * rk / r * self.cutoff.eta(r)


@dataclass(frozen=True)
class Truncated(Radial):
    base: Radial
    cutoff: CutoffSpec

    @property
    def kinks(self):
        return tuple(sorted(set(self.cutoff.kinks) | set(self.base.kinks)))

    @property
    def support(self):
        lo, hi = self.cutoff.support
        if self.base.support is not None:
            lo, hi = max(lo, self.base.support[0]), min(hi, self.base.support[1])
        return (lo, hi)

    def value(self, r):
        r = np.asarray(r, dtype=float)
        eta = self.cutoff.eta(r)
        out = np.zeros(r.shape)
        live = eta > 0
        out[live] = eta[live] * self.base.value(r[live])
        return out

    def deriv(self, r):
        r = np.asarray(r, dtype=float)
        eta = self.cutoff.eta(r)
        deta = self.cutoff.deta(r)
        out = np.zeros(r.shape)
        live = (eta > 0) | (deta != 0)
        rl = r[live]
        out[live] = eta[live] * self.base.deriv(rl) + deta[live] * self.base.value(rl)
        return out


class Grid(Radial):
    """Values on a uniform log-radius grid, clamped cubic spline in ``s = log r``.

    Both end values must be zero; outside the grid the profile is zero, so the
    zero extension is C¹.
    """

    def __init__(self, s_nodes, values):
        s = np.asarray(s_nodes, dtype=float)
        v = np.asarray(values, dtype=float)
        if s.ndim != 1 or s.shape != v.shape or len(s) < 3:
            raise InvalidSpec("grid needs matching 1-D node and value arrays (>= 3 nodes)")
        h = np.diff(s)
        if np.any(h <= 0) or np.ptp(h) > 1e-9 * abs(h[0]) * len(h):
            raise InvalidSpec("grid nodes must be uniform and increasing")
        if v[0] != 0.0 or v[-1] != 0.0:
            raise InvalidSpec("grid profile must vanish at both endpoints")
        self.s = s
        self.values = v
        self._spline = CubicSpline(s, v, bc_type="clamped")
        self._dspline = self._spline.derivative()

    def __repr__(self):
        return f"Grid(n={len(self.s)}, s=[{self.s[0]:.4g}, {self.s[-1]:.4g}])"

    @property
    def h(self) -> float:
        return (self.s[-1] - self.s[0]) / (len(self.s) - 1)

    @property
    def kinks(self):
        return tuple(np.exp(self.s))

    @property
    def support(self):
        return (math.exp(self.s[0]), math.exp(self.s[-1]))

    def _in(self, s):
        return (s >= self.s[0]) & (s <= self.s[-1])

    def value(self, r):
        s = np.log(np.asarray(r, dtype=float))
        out = np.zeros(s.shape)
        m = self._in(s)
        out[m] = self._spline(s[m])
        # exact reproduction at nodes
        idx = np.rint((s[m] - self.s[0]) / self.h).astype(int)
        idx = np.clip(idx, 0, len(self.s) - 1)
        hit = np.abs(self.s[idx] - s[m]) <= 1e-14 * max(1.0, abs(self.s[0]), abs(self.s[-1]))
        vals = out[m]
        vals[hit] = self.values[idx[hit]]
        out[m] = vals
        return out

    def deriv(self, r):
        r = np.asarray(r, dtype=float)
        s = np.log(r)
        out = np.zeros(s.shape)
        m = self._in(s)
        out[m] = self._dspline(s[m]) / r[m]
        return out

    def shifted(self, delta: float) -> "Grid":
        return Grid(self.s + delta, self.values)


@dataclass(frozen=True)
class Bump(Radial):
    """Smooth bump ``A exp(-1 / (1 - z²))`` with ``z = (log r - center) / half_width``."""

    center: float
    half_width: float
    amplitude: float = 1.0

    def __post_init__(self):
        if self.half_width <= 0:
            raise InvalidSpec("bump half_width must be positive")

    @property
    def support(self):
        return (math.exp(self.center - self.half_width), math.exp(self.center + self.half_width))

    def _z(self, r):
        return (np.log(np.asarray(r, dtype=float)) - self.center) / self.half_width

    def value(self, r):
        z = self._z(r)
        out = np.zeros(z.shape)
        m = np.abs(z) < 1
        out[m] = self.amplitude * np.exp(-1.0 / (1.0 - z[m] ** 2))
        return out

    def deriv(self, r):
        r = np.asarray(r, dtype=float)
        z = self._z(r)
        out = np.zeros(z.shape)
        m = np.abs(z) < 1
        zm = z[m]
        w = self.amplitude * np.exp(-1.0 / (1.0 - zm**2))
        dw_ds = w * (-2.0 * zm / (1.0 - zm**2) ** 2) / self.half_width
        out[m] = dw_ds / r[m]
        return out


@dataclass(frozen=True)
class Dilated(Radial):
    """``f(lam r)``."""

    base: Radial
    lam: float

    @property
    def kinks(self):
        return tuple(k / self.lam for k in self.base.kinks)

    @property
    def support(self):
        if self.base.support is None:
            return None
        return (self.base.support[0] / self.lam, self.base.support[1] / self.lam)

    def value(self, r):
        return self.base.value(self.lam * np.asarray(r, dtype=float))

    def deriv(self, r):
        return self.lam * self.base.deriv(self.lam * np.asarray(r, dtype=float))


@dataclass(frozen=True)
class Profile:
    radial: Radial
    angular: object = field(default_factory=Constant)

    @property
    def kinks(self):
        return self.radial.kinks

    @property
    def support(self):
        return self.radial.support

    @property
    def is_compact(self) -> bool:
        return self.radial.support is not None

    def value(self, r):
        return self.radial.value(r)

    def deriv(self, r):
        return self.radial.deriv(r)

    def dilate(self, lam: float) -> "Profile":
        """``x ↦ u(lam x)``; grids are shifted in log radius instead of wrapped."""
        if lam <= 0:
            raise ValueError("dilation factor must be positive")
        if isinstance(self.radial, Grid):
            return Profile(self.radial.shifted(-math.log(lam)), self.angular)
        return Profile(Dilated(self.radial, lam), self.angular)

    def with_angular(self, D) -> "Profile":
        return Profile(self.radial, D)


# ---------------------------------------------------------------- constructors


def eval_extremizer(spec: ExtremizerSpec, p: Params, r):
    """Radial value and radial derivative of the closed-form extremizer at ``r``."""
    ok, reason = validity_check(spec, p)
    if not ok:
        raise InvalidSpec(reason)
    rad = ExtremizerRadial(spec.family, spec.resolved_t(p), p)
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise InvalidSpec("radius must be positive")
    return rad.value(r), rad.deriv(r)


def make_extremizer(p: Params, family: str | None = None, t: float | None = None, angular=None) -> Profile:
    """Closed-form extremizer of the region containing ``p`` (A side preferred on shared boundaries)."""
    if family is None:
        family = "A" if classify(p).in_A else "B"
    spec = ExtremizerSpec(family, t, angular if angular is not None else Constant())
    ok, reason = validity_check(spec, p)
    if not ok:
        raise InvalidSpec(reason)
    return Profile(ExtremizerRadial(family, spec.resolved_t(p), p), spec.angular)


def make_cutoff_eta(c: CutoffSpec) -> Profile:
    return Profile(PowerCutoff(0.0, c))


def make_hardy_sequence(c: CutoffSpec, p: Params) -> Profile:
    """``r^{-(N-2b-2)/2} η_ε(r)``, the minimizing sequence on the line a = b + 1."""
    if not p.on_line_c:
        raise InvalidSpec("the Hardy minimizing sequence needs a = b+1")
    return Profile(PowerCutoff(-p.beta / 2.0, c))


def truncate_profile(u: Profile, c: CutoffSpec) -> Profile:
    return Profile(Truncated(u.radial, c), u.angular)


def envelope_check(u: Profile, p: Params, samples: int = 64) -> bool:
    """Whether ``|f(r)| <= r^{m} exp(-C r^{b+1-a})`` for some ``C`` on a log grid.

    ``m`` is 0 in the A regions and ``2(b+1) - N`` in the B regions.  The
    angular factor appears on both sides and drops out.
    """
    if p.on_line_c:
        raise InvalidSpec("the envelope space is undefined on the line a = b+1")
    if samples < 16:
        raise ValueError("samples must be >= 16")
    r = np.logspace(-6, 6, samples)
    with np.errstate(divide="ignore"):
        lf = np.log(np.abs(u.value(r)))
    m = 0.0 if classify(p).in_A else 2.0 * (p.b + 1.0) - p.N
    rk = r**p.k
    for C in np.logspace(-6, 6, 241):
        lenv = m * np.log(r) - C * rk
        if np.all(lf <= lenv + 1e-12 * np.maximum(1.0, np.abs(lenv))):
            return True
    return False


# ---------------------------------------------------------------- grid I/O


def grid_from_profile(u: Profile, s_min: float, s_max: float, n: int) -> Profile:
    """Sample ``u`` at ``n`` interior nodes of a uniform log grid with zero ends."""
    s = np.linspace(s_min, s_max, n + 2)
    v = np.asarray(u.value(np.exp(s)), dtype=float).copy()
    v[0] = v[-1] = 0.0
    return Profile(Grid(s, v), u.angular)


def write_grid_csv(profile: Profile, sink: str | Path | TextIO, params: Params | None = None) -> None:
    g = profile.radial
    if not isinstance(g, Grid):
        raise InvalidSpec("only grid profiles serialize to CSV")
    header = {
        "params": None if params is None else {"N": params.N, "a": params.a, "b": params.b},
        "grid": {"s_min": float(g.s[0]), "s_max": float(g.s[-1]), "nodes": int(len(g.s))},
    }
    buf = io.StringIO()
    buf.write(json.dumps(header, sort_keys=True) + "\n")
    buf.write("s,value\n")
    for s, v in zip(g.s, g.values):
        buf.write(f"{float(s)!r},{float(v)!r}\n")
    if isinstance(sink, (str, Path)):
        Path(sink).write_text(buf.getvalue())
    else:
        sink.write(buf.getvalue())


def read_grid_csv(source: str | Path | TextIO) -> tuple[Profile, dict]:
    text = Path(source).read_text() if isinstance(source, (str, Path)) else source.read()
    lines = text.splitlines()
    header = json.loads(lines[0])
    if lines[1].strip() != "s,value":
        raise InvalidSpec("expected 's,value' column header on line 2")
    rows = [tuple(map(float, ln.split(","))) for ln in lines[2:] if ln.strip()]
    s, v = map(np.asarray, zip(*rows))
    return Profile(Grid(s, v)), header
