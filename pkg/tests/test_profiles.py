import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cknlab.errors import InvalidSpec
from cknlab.params import Params
from cknlab.profiles import (
    Bump,
    CutoffSpec,
    ExtremizerSpec,
    Profile,
    envelope_check,
    eval_extremizer,
    grid_from_profile,
    make_cutoff_eta,
    make_extremizer,
    make_hardy_sequence,
    read_grid_csv,
    truncate_profile,
    validity_check,
    write_grid_csv,
)


def test_extremizer_closed_forms():
    r = np.array([0.5, 1.0, 2.0])
    # A1 at (3,0,0): e^{-r}; B1 at (3,2,0): r^{-1} e^{-1/r}
    f, df = eval_extremizer(ExtremizerSpec("A"), Params(3, 0, 0), r)
    np.testing.assert_allclose(f, np.exp(-r), rtol=1e-15)
    np.testing.assert_allclose(df, -np.exp(-r), rtol=1e-15)
    f, df = eval_extremizer(ExtremizerSpec("B"), Params(3, 2, 0), r)
    np.testing.assert_allclose(f, np.exp(-1 / r) / r, rtol=1e-15)
    np.testing.assert_allclose(df, np.exp(-1 / r) * (1 / r**3 - 1 / r**2), rtol=1e-14)


@pytest.mark.parametrize(
    "family,N,a,b,t,ok,reason",
    [
        ("A", 3, 0, 0, None, True, "ok"),
        ("A", 3, 0, 0, 1.0, False, "t must be negative in A1"),
        ("A", 3, 3, 1, -1.0, False, "t must be positive in A2"),
        ("B", 3, 2, 0, -1.0, False, "t must be positive in B1"),
        ("B", 3, 0, 1, 1.0, False, "t must be negative in B2"),
        ("A", 3, 2, 0, None, False, "family A requires (a, b) in A1 or A2"),
        ("A", 3, 1, 0, None, False, "a = b+1 excluded"),
    ],
)
def test_validity(family, N, a, b, t, ok, reason):
    assert validity_check(ExtremizerSpec(family, t), Params(N, a, b)) == (ok, reason)


def test_boundary_has_both_families():
    p = Params(4, 1.0, 1.0)
    assert validity_check(ExtremizerSpec("A"), p)[0]
    assert validity_check(ExtremizerSpec("B"), p)[0]


def test_cutoff_values():
    c = CutoffSpec(0.1)
    r = np.array([0.005, 0.01, 0.05, 0.1, 1.0, 10.0, 15.0, 100.0, 200.0])
    expect = [0, 0, math.log(5) / math.log(10), 1, 1, 1, math.log(100 / 15) / math.log(10), 0, 0]
    np.testing.assert_allclose(c.eta(r), expect, atol=1e-15)
    # η is continuous across every kink
    for k in c.kinks:
        assert abs(c.eta(k * (1 + 1e-12)) - c.eta(k * (1 - 1e-12))) < 1e-11
    assert c.deta(0.05) == pytest.approx(1 / (math.log(10) * 0.05))
    assert c.deta(15.0) == pytest.approx(-1 / (math.log(10) * 15.0))


def test_truncated_extremizer_outer_ramp():
    u = truncate_profile(make_extremizer(Params(3, 0, 0)), CutoffSpec(0.1))
    assert u.value(15.0) == pytest.approx(math.exp(-15) * math.log(100 / 15) / math.log(10), rel=1e-14)
    assert u.support == pytest.approx((1e-2, 1e2))


@pytest.mark.parametrize("eps", [0.0, 0.3, -0.1])
def test_cutoff_rejects(eps):
    with pytest.raises(InvalidSpec):
        CutoffSpec(eps)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-6, 0.29), st.floats(-20, 20))
def test_derivative_matches_finite_difference(eps, s):
    c = CutoffSpec(eps)
    u = make_hardy_sequence(c, Params(3, 1.0, 0.0))
    r = math.exp(s)
    if any(abs(math.log(r / k)) < 1e-5 for k in c.kinks):
        return
    h = 1e-7 * r
    fd = (u.value(r + h) - u.value(r - h)) / (2 * h)
    assert float(u.deriv(r)) == pytest.approx(float(fd), rel=1e-5, abs=1e-9 * max(1.0, abs(float(u.value(r))) / r))


def test_eta_profile_is_constant_on_plateau():
    u = make_cutoff_eta(CutoffSpec(0.01))
    np.testing.assert_array_equal(u.value(np.array([0.01, 1.0, 100.0])), 1.0)


def test_envelope(region_point):
    label, p = region_point
    if label == "C":
        with pytest.raises(InvalidSpec):
            envelope_check(make_extremizer(Params(3, 0, 0)), p)
        return
    u = make_extremizer(p)
    assert envelope_check(u, p)
    # doubling the profile breaks |f| <= r^m e^{-C r^k} near where the envelope saturates
    grow = Profile(Bump(0.0, 30.0, 1e6))
    assert not envelope_check(grow, p)


def test_bump_smooth_and_compact():
    b = Profile(Bump(0.5, 1.0, 2.0))
    lo, hi = b.support
    assert lo == pytest.approx(math.exp(-0.5)) and hi == pytest.approx(math.exp(1.5))
    assert b.value(lo) == 0 and b.value(hi) == 0
    assert b.value(math.exp(0.5)) == pytest.approx(2 * math.exp(-1))
    r = math.exp(0.9)
    assert b.deriv(r) == pytest.approx((b.value(r * (1 + 1e-7)) - b.value(r * (1 - 1e-7))) / (2e-7 * r), rel=1e-6)


def test_dilation_composes():
    u = make_extremizer(Params(3, 0, 0))
    v = u.dilate(2.0)
    assert v.value(1.5) == pytest.approx(u.value(3.0), rel=1e-15)
    assert v.deriv(1.5) == pytest.approx(2 * u.deriv(3.0), rel=1e-15)


def test_grid_roundtrip():
    u = make_extremizer(Params(3, 0, 0))
    g = grid_from_profile(u, -5.0, 3.0, 200)
    buf = io.StringIO()
    write_grid_csv(g, buf, Params(3, 0, 0))
    buf.seek(0)
    back, header = read_grid_csv(buf)
    assert header["params"] == {"N": 3, "a": 0.0, "b": 0.0}
    np.testing.assert_array_equal(back.radial.values, g.radial.values)
    s = g.radial.s[1:-1]
    np.testing.assert_allclose(back.value(np.exp(s)), u.value(np.exp(s)), rtol=1e-15)


def test_grid_interpolates_smooth_profile():
    u = Profile(Bump(0.0, 2.0))
    g = grid_from_profile(u, -2.0, 2.0, 400)
    s = g.radial.s
    mid = np.exp(0.5 * (s[:-1] + s[1:]))
    np.testing.assert_allclose(g.value(mid), u.value(mid), atol=1e-6)
    np.testing.assert_allclose(g.deriv(mid), u.deriv(mid), atol=1e-4)


def test_hardy_sequence_off_line():
    with pytest.raises(InvalidSpec):
        make_hardy_sequence(CutoffSpec(0.1), Params(3, 0, 0))
