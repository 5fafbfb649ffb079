import csv
import io
import math

import numpy as np
import pytest

from cknlab import experiments as ex
from cknlab.errors import InvalidSpec, NotOnLineC
from cknlab.params import Params, classify


def test_verify_reports():
    rep = ex.verify_extremizer(Params(3, 0, 0))
    assert rep.ok and rep.region == "A1" and rep.family == "A"
    assert rep.gap < 1e-10 and rep.gap <= rep.tol
    rep = ex.verify_extremizer(Params(3, 2, 0))
    assert rep.ok and rep.family == "B" and rep.E_tilde == pytest.approx(1.0, abs=1e-12)
    for fam in ("A", "B"):
        assert ex.verify_extremizer(Params(4, 1, 1), family=fam).E_tilde == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(InvalidSpec):
        ex.verify_extremizer(Params(3, 1, 0))


def test_scan_grid_and_csv():
    rows = ex.scan_plane(3, (-2, 3), (-2, 3), 0.25, verify_every=50)
    assert len(rows) == 441
    row = {(r.a, r.b): r for r in rows}
    assert row[(0.0, 0.0)].c_sharp == 1.0
    c = row[(1.0, 0.0)]
    assert c.region == "C" and c.c_sharp == 0.5 and c.verified is None
    verified = [r for r in rows if r.verified is not None]
    assert len(verified) == math.ceil(sum(r.region != "C" for r in rows) / 50)
    assert all(r.gap < 1e-9 for r in verified) and not any(r.note for r in rows)
    text = ex.scan_csv(rows)
    assert text.splitlines()[0] == "a,b,region,c_A,c_B,c_sharp,verified,gap"
    parsed = list(csv.DictReader(io.StringIO(text)))
    assert len(parsed) == 441 and parsed[0]["region"] == classify(Params(3, -2, -2)).canonical


def test_scan_is_order_independent():
    fwd = ex.scan_plane(3, (-1, 1), (-1, 1), 0.5)
    labels = {(r.a, r.b): r.region for r in fwd}
    for r in reversed(fwd):
        assert classify(Params(3, r.a, r.b)).canonical == labels[(r.a, r.b)]


def test_scan_rejects_bad_step():
    with pytest.raises(ValueError):
        ex.scan_plane(3, (0, 1), (0, 1), 0.0)


def test_fit_rate_recovers_power_law():
    eps = np.array(ex.DEFAULT_EPS)
    L = np.log(1 / eps)
    fit = ex.fit_rate(eps, 3.0 * L**-1.5)
    assert fit.exponent == pytest.approx(-1.5, abs=1e-12)
    assert fit.amplitude == pytest.approx(3.0, rel=1e-12)
    assert fit.r_squared == pytest.approx(1.0)
    fit = ex.fit_rate(eps, 2.0 * L**-2 * np.exp(-0.7 * L), exp_rate=0.7)
    assert fit.exponent == pytest.approx(-2.0, abs=1e-12)
    with pytest.raises(ValueError):
        ex.fit_rate(eps[:4], L[:4])


def test_hardy_rates_exact():
    rep = ex.hardy_rate_study(Params(3, 1, 0))
    assert rep.fit_remainder.exponent == pytest.approx(-1.0, abs=1e-9)
    assert rep.fit_denominator.exponent == pytest.approx(1.0, abs=1e-9)
    assert rep.fit_gap.exponent == pytest.approx(-2.0, abs=1e-6)
    # Ẽ² - C̃² = 3 / (4 L²) for this sequence
    for row in rep.table:
        assert row["gap"] == pytest.approx(0.75 / row["log_inv_eps"] ** 2, rel=1e-9)
    assert rep.decreasing
    with pytest.raises(NotOnLineC):
        ex.hardy_rate_study(Params(3, 0, 0))


@pytest.mark.parametrize("label,p", [("A1", Params(3, 0, 0)), ("A2", Params(3, 3, 1)),
                                     ("B1", Params(3, 2, 0)), ("B2", Params(3, 0, 1))])
def test_density_cases(label, p):
    rep = ex.density_decay_study(p)
    assert rep.region == label and rep.case == ex.DENSITY_CASES[label]
    assert rep.norm_monotone and rep.cross_bound_ok
    assert rep.fit_cross.r_squared >= 0.99
    assert rep.fit_cross.exponent == pytest.approx(-2.0, abs=0.05)


def test_density_flat_weight_case():
    # N = 2b + 2: no exponential factor, the cutoff-gradient term is ~ ω / L
    rep = ex.density_decay_study(Params(3, 0, 0.5))
    assert rep.annulus_rate == 0.0 and rep.cross_bound_ok
    assert rep.fit_cross.exponent == pytest.approx(-1.0, abs=0.01)
    L = rep.table[-1]["log_inv_eps"]
    assert rep.table[-1]["cross"] == pytest.approx(4 * math.pi / L, rel=0.02)


def test_density_cross_term_asymptotics():
    # near the origin e^{-r} ≈ 1, so the inner cross term is ω (e^{-L} - e^{-2L}) / L²
    rep = ex.density_decay_study(Params(3, 0, 0), eps_list=[1e-4, 1e-5, 1e-6, 1e-7, 1e-8])
    for row in rep.table:
        L = row["log_inv_eps"]
        assert row["cross_inner"] == pytest.approx(4 * math.pi * (math.exp(-L) - math.exp(-2 * L)) / L**2, rel=1e-3)


def test_branch_audit():
    rep = ex.branch_bound_audit(Params(3, 0, 0), trials=40, seed=3)
    assert rep.violations_A == rep.violations_B == rep.below_max == 0
    assert rep.branch_min == 0.0 and rep.branch_max == 1.0
    assert rep.min_quotient >= 1 - 1e-9
    assert rep.extremizer_quotient == pytest.approx(1.0, abs=1e-12)
    assert all(q > 1.0 for _, q in rep.truncated_quotients)
    line = ex.branch_bound_audit(Params(3, 1, 0), trials=10)
    assert line.c_A == line.c_B == line.branch_min == line.branch_max
    with pytest.raises(ValueError):
        ex.branch_bound_audit(Params(3, 0, 0), trials=5)


def test_audit_is_deterministic():
    a = ex.branch_bound_audit(Params(3, 2, 0), trials=12, seed=9)
    b = ex.branch_bound_audit(Params(3, 2, 0), trials=12, seed=9)
    assert a.to_dict() == b.to_dict()


def test_identity_suite_small():
    rep = ex.identity_suite(trials=30, seed=5)
    assert rep.ok and rep.trials == 30


def test_invariance_suite():
    rep = ex.invariance_suite()
    assert rep.dilation_defect < 1e-10 and rep.angular_defect < 1e-9
    assert all(full > tilde for _, full, tilde in rep.full_vs_radial)
