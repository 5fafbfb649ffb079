import math

import numpy as np
import pytest
from scipy import linalg

from cknlab import eigmin
from cknlab.errors import FactorizationFailure
from cknlab.params import Params


def _dense_pencil(p, d):
    forms = eigmin.assemble(p, d)
    c, e, m, _ = eigmin._pencil(p, forms)
    K = np.diag(c + e[:-1] + e[1:]) - np.diag(e[1:-1], 1) - np.diag(e[1:-1], -1)
    return K, np.diag(m), (c, e, m)


@pytest.mark.parametrize("p", [Params(3, 0, 0), Params(3, 2, 0), Params(3, 1, 0)])
def test_sturm_count_matches_dense(p):
    d = eigmin.Discretization(-3.0, 2.0, 40)
    K, Mm, (c, e, m) = _dense_pencil(p, d)
    vals = linalg.eigh(K, Mm, eigvals_only=True)
    for sigma in np.concatenate([vals[:6] * (1 - 1e-9), vals[:6] * (1 + 1e-9), [0.5 * vals[0]]]):
        assert eigmin.sturm_count(c, e, m, sigma) == int(np.sum(vals < sigma))


def test_solve_matches_dense():
    p = Params(3, 0, 0)
    d = eigmin.Discretization(-6.0, 3.0, 60)
    K, Mm, (c, e, m) = _dense_pencil(p, d)
    sigma = 0.4 * linalg.eigh(K, Mm, eigvals_only=True)[0]
    rhs = np.random.default_rng(1).standard_normal(d.n)
    x = eigmin._solve(c, e, m, sigma, rhs)
    np.testing.assert_allclose(x, np.linalg.solve(K - sigma * Mm, rhs), rtol=1e-10)
    with pytest.raises(FactorizationFailure):
        eigmin._solve(c, e, m, 1.0e6, rhs)


def test_min_quotient_matches_dense():
    p = Params(3, 0, 0)
    d = eigmin.Discretization(-5.0, 2.0, 199)
    K, Mm, _ = _dense_pencil(p, d)
    ref = linalg.eigh(K, Mm, eigvals_only=True, subset_by_index=(0, 0))[0]
    res = eigmin.min_quotient(p, d, check_quotient=False)
    assert res.lambda_min == pytest.approx(ref, rel=1e-10)
    assert res.residual <= 1e-10 and res.branch == "main"
    assert np.all(res.vector > 0)


def test_extremizer_sample_bounds_minimum():
    p = Params(3, 2, 0)
    d = eigmin.Discretization(*eigmin.default_window(p), 399)
    lam = eigmin.min_quotient(p, d, check_quotient=False).lambda_min
    assert lam <= eigmin.extremizer_quotient_on_grid(p, d)


@pytest.mark.parametrize("p", [Params(3, 0, 0), Params(3, 2, 0), Params(3, 3, 1), Params(3, 0, 1)])
def test_second_order_from_below(p):
    lo, hi = eigmin.default_window(p)
    table = eigmin.converge_study(p, eigmin.h_ladder(lo, hi, 799))
    lams = [row[2] for row in table.rows]
    c = eigmin.reference_value(p)
    assert lams[0] < lams[1] < lams[2] < c
    assert table.order == pytest.approx(2.0, abs=0.05)
    assert table.limit == pytest.approx(c, abs=1e-5)
    assert all(r.residual <= 1e-10 for r in table.results)


def test_quotient_check_recovers_constant():
    p = Params(3, 0, 0)
    d = eigmin.Discretization(*eigmin.default_window(p), 999)
    res = eigmin.min_quotient(p, d)
    # the interpolated eigenvector is an admissible trial function
    assert res.quotient_check >= 1.0 - 1e-9
    assert res.quotient_check == pytest.approx(1.0, abs=1e-6)


def test_line_c_decreases_with_window():
    p = Params(3, 1, 0)
    h = 0.02
    lams = []
    for half in (5.0, 10.0, 20.0):
        n = int(round(2 * half / h)) - 1
        res = eigmin.min_quotient(p, eigmin.Discretization(-half, half, n), check_quotient=False)
        assert res.branch == "hardy"
        lams.append(res.lambda_min)
    assert lams[0] > lams[1] > lams[2] > 0.25
    # exact Dirichlet ground state: 1/4 + (π/2·half)²/... approaches 1/4 like half^{-2}
    assert lams[2] - 0.25 == pytest.approx((math.pi / 40.0) ** 2, rel=0.02)


def test_ladder_validation():
    with pytest.raises(ValueError):
        eigmin.h_ladder(0.0, 1.0, 100)
    rungs = eigmin.h_ladder(0.0, 1.0, 99)
    assert [r.n for r in rungs] == [24, 49, 99]
    with pytest.raises(ValueError):
        eigmin.Discretization(0.0, 1.0, 4)


def test_result_serializes(tmp_path):
    p = Params(3, 0, 0)
    res = eigmin.min_quotient(p, eigmin.Discretization(-10, 5, 63), check_quotient=False)
    out = res.to_dict()
    assert out["grid"]["n"] == 63 and out["branch"] == "main"
    path = tmp_path / "w.csv"
    res.vector_to_csv(path)
    assert path.read_text().splitlines()[0] == "s,w"
