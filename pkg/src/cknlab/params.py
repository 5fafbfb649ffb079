"""Parameter algebra for the weighted L² CKN family.

A point of the theory is a dimension ``N`` and two real exponents ``(a, b)``.
The plane of exponents splits into four regions and the line ``a = b + 1``:

    A1 = {b + 1 - a > 0, b <= (N-2)/2}      A2 = {b + 1 - a < 0, b >= (N-2)/2}
    B1 = {b + 1 - a < 0, b <= (N-2)/2}      B2 = {b + 1 - a > 0, b >= (N-2)/2}
    C  = {a = b + 1}

Comparisons are exact; no tolerance is applied when classifying.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "Params",
    "RegionInfo",
    "BranchConstants",
    "classify",
    "branch_constants",
    "sharp_constant",
]


@dataclass(frozen=True)
class Params:
    N: int
    a: float
    b: float

    def __post_init__(self):
        if isinstance(self.N, bool) or not isinstance(self.N, int):
            if isinstance(self.N, float) and self.N.is_integer():
                object.__setattr__(self, "N", int(self.N))
            else:
                raise ValueError(f"dimension N must be an integer, got {self.N!r}")
        if self.N < 1:
            raise ValueError(f"dimension N must be >= 1, got {self.N}")
        for name in ("a", "b"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, v)

    @property
    def k(self) -> float:
        """Exponent ``b + 1 - a`` of the extremizers' stretched exponential."""
        return self.b + 1.0 - self.a

    @property
    def beta(self) -> float:
        """``N - 2b - 2``, the Hardy exponent on the degenerate line."""
        return self.N - 2.0 * self.b - 2.0

    @property
    def on_line_c(self) -> bool:
        return self.a == self.b + 1.0


@dataclass(frozen=True)
class RegionInfo:
    in_A1: bool
    in_A2: bool
    in_B1: bool
    in_B2: bool
    on_C: bool
    canonical: str

    @property
    def in_A(self) -> bool:
        return self.in_A1 or self.in_A2

    @property
    def in_B(self) -> bool:
        return self.in_B1 or self.in_B2


@dataclass(frozen=True)
class BranchConstants:
    c_A: float
    c_B: float
    T: float
    c_sharp: float


def classify(p: Params) -> RegionInfo:
    half = (p.N - 2) / 2.0
    shifted = p.b + 1.0
    on_C = p.a == shifted
    pos = p.a < shifted  # b + 1 - a > 0
    neg = p.a > shifted  # b + 1 - a < 0
    below = p.b <= half
    above = p.b >= half
    in_A1 = pos and below
    in_A2 = neg and above
    in_B1 = neg and below
    in_B2 = pos and above
    if on_C:
        canonical = "C"
    elif in_A1:
        canonical = "A1"
    elif in_A2:
        canonical = "A2"
    elif in_B1:
        canonical = "B1"
    else:
        canonical = "B2"
    return RegionInfo(in_A1, in_A2, in_B1, in_B2, on_C, canonical)


def branch_constants(p: Params) -> BranchConstants:
    """Both expand-the-square constants, the discriminator and the sharp value.

    ``T = (b - a + 1)(N - 2 - 2b)`` equals ``c_A**2 - c_B**2``; the sharp value is
    the region-wise constant, which coincides with ``max(c_A, c_B)``.
    """
    c_A = abs(p.N - (p.a + p.b + 1.0)) / 2.0
    c_B = abs(p.N - (3.0 * p.b - p.a + 3.0)) / 2.0
    T = (p.b - p.a + 1.0) * (p.N - 2.0 - 2.0 * p.b)
    region = classify(p)
    if region.on_C:
        c_sharp = abs(p.N - 2.0 * (p.b + 1.0)) / 2.0
    elif region.in_A:
        c_sharp = c_A
    else:
        c_sharp = c_B
    return BranchConstants(c_A=c_A, c_B=c_B, T=T, c_sharp=c_sharp)


def sharp_constant(p: Params) -> float:
    return branch_constants(p).c_sharp
