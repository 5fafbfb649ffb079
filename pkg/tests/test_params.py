import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cknlab.params import Params, branch_constants, classify, sharp_constant

exponents = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
dims = st.integers(1, 8)


def test_region_labels(region_point):
    label, p = region_point
    assert classify(p).canonical == label


@pytest.mark.parametrize(
    "N,a,b,region,c_A,c_B,c_sharp",
    [
        (3, 0, 0, "A1", 1.0, 0.0, 1.0),
        (3, 2, 0, "B1", 0.0, 1.0, 1.0),
        (3, 3, 1, "A2", 1.0, 0.0, 1.0),
        (3, 0, 1, "B2", 0.5, 1.5, 1.5),
        (3, 1, 0, "C", 0.5, 0.5, 0.5),
        (2, -1, -0.5, "A1", 1.25, 0.25, 1.25),
        (5, 0.3, -1, "B1", 2.35, 2.65, 2.65),
    ],
)
def test_constant_table(N, a, b, region, c_A, c_B, c_sharp):
    # values worked by hand from |N-(a+b+1)|/2 and |N-(3b-a+3)|/2
    p = Params(N, a, b)
    bc = branch_constants(p)
    assert classify(p).canonical == region
    assert bc.c_A == pytest.approx(c_A, abs=1e-15)
    assert bc.c_B == pytest.approx(c_B, abs=1e-15)
    assert bc.c_sharp == pytest.approx(c_sharp, abs=1e-15)


def test_boundary_prefers_A_and_constants_agree():
    p = Params(4, 1.0, 1.0)  # b = (N-2)/2 with b+1-a > 0: A1 and B2 both hold
    r = classify(p)
    assert r.in_A1 and r.in_B2 and r.canonical == "A1"
    bc = branch_constants(p)
    assert bc.c_A == bc.c_B == 0.5 and bc.T == 0.0


def test_validation():
    with pytest.raises(ValueError):
        Params(0, 0, 0)
    with pytest.raises(ValueError):
        Params(2.5, 0, 0)
    with pytest.raises(ValueError):
        Params(3, math.nan, 0)
    assert Params(3.0, 0, 0).N == 3


@settings(max_examples=10_000, deadline=None)
@given(dims, exponents, exponents)
def test_difference_of_squares(N, a, b):
    bc = branch_constants(Params(N, a, b))
    scale = max(1.0, bc.c_A**2, bc.c_B**2)
    assert abs(bc.c_A**2 - bc.c_B**2 - bc.T) <= 1e-12 * scale


@settings(max_examples=2000, deadline=None)
@given(dims, exponents, exponents)
def test_sharp_is_max_of_branches(N, a, b):
    p = Params(N, a, b)
    bc = branch_constants(p)
    assert bc.c_sharp == pytest.approx(max(bc.c_A, bc.c_B), rel=1e-12, abs=1e-12)
    if not classify(p).on_C:
        # T is nonnegative on the A side, nonpositive on the B side
        r = classify(p)
        if r.in_A and not r.in_B:
            assert bc.T >= 0
        if r.in_B and not r.in_A:
            assert bc.T <= 0


@settings(max_examples=1000, deadline=None)
@given(dims, exponents)
def test_line_c(N, b):
    p = Params(N, b + 1.0, b)
    bc = branch_constants(p)
    assert classify(p).on_C
    exact = abs(N - 2 * (b + 1)) / 2
    assert sharp_constant(p) == exact
    assert bc.c_A == pytest.approx(exact, rel=1e-14, abs=1e-14)
    assert bc.c_B == pytest.approx(exact, rel=1e-14, abs=1e-14)


@settings(max_examples=1000, deadline=None)
@given(dims, exponents, exponents)
def test_exactly_one_canonical_label(N, a, b):
    r = classify(Params(N, a, b))
    flags = [r.in_A1, r.in_A2, r.in_B1, r.in_B2]
    if r.on_C:
        assert not any(flags)
    else:
        assert 1 <= sum(flags) <= 2
        assert getattr(r, f"in_{r.canonical}")
