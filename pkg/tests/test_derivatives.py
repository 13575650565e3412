import math

import numpy as np
import pytest

from normgeo.derivatives import (max_set, rho, rho_closed, rho_closed_rows, rho_numeric,
                                 rho_sign_conditions, support_mask)
from normgeo.errors import DomainError
from normgeo.spaces import lp, norm, prodmax, sphere_sample, sum1

INF = math.inf
FAMILIES = [lp(1, 4), lp(2, 4), lp(3, 4), lp(INF, 4), sum1(lp(1, 2), lp(INF, 2)),
            prodmax(lp(1, 2), lp(2, 2))]


def _pair(r):
    return r.rho_plus, r.rho_minus


def test_numeric_examples():
    assert _pair(rho_numeric(lp(2, 2), [1, 0], [0, 1])) == pytest.approx((0, 0), abs=1e-9)
    assert _pair(rho_numeric(lp(INF, 2), [1, 1], [1, -1])) == pytest.approx((1, -1), abs=1e-12)
    assert _pair(rho_numeric(lp(1, 3), [1, -2, 0], [1, 1, -3])) == pytest.approx((3, -3), abs=1e-12)


def test_closed_examples():
    assert _pair(rho_closed(lp(2, 2), [3, 4], [1, 0])) == pytest.approx((0.6, 0.6), abs=1e-15)
    assert _pair(rho_closed(lp(INF, 2), [2, 1], [0, 5])) == (0, 0)
    sp = sum1(lp(1, 2), lp(1, 1))
    assert _pair(rho_closed(sp, [1, 1, -1], [1, -1, 2])) == (-2, -2)


def test_closed_method_tag_and_trace():
    r = rho_numeric(lp(1, 3), [1, -2, 0], [1, 1, -3])
    assert r.method == "numeric" and len(r.step_trace) >= 2
    assert rho_closed(lp(1, 3), [1, -2, 0], [1, 1, -3]).method == "closed"


def test_zero_base_point():
    r = rho(lp(3, 2), [0, 0], [3, 4])
    assert _pair(r) == pytest.approx((norm(lp(3, 2), [3, 4]), -norm(lp(3, 2), [3, 4])), rel=1e-9)
    with pytest.raises(DomainError):
        rho_closed(lp(2, 2), [0, 0], [1, 0])


def test_sign_condition_examples():
    sc = rho_sign_conditions(lp(1, 3), [1, 0, 0], [0, 2, -1])
    assert (sc.plus_nonneg, sc.minus_nonpos) == (True, True)
    sc = rho_sign_conditions(lp(INF, 2), [1, 1], [-1, 0])
    assert (sc.plus_nonneg, sc.minus_nonpos) == (True, True)
    sc = rho_sign_conditions(lp(3, 2), [1, 1], [1, -1])
    assert (sc.plus_nonneg, sc.minus_nonpos) == (True, True)
    sc = rho_sign_conditions(lp(2, 2), [1, 0], [1, 0])
    assert (sc.plus_nonneg, sc.minus_nonpos) == (True, False)


def test_max_set_and_support_tolerances():
    assert max_set(np.array([1.0, -1.0 + 1e-13, 0.5])).tolist() == [True, True, False]
    assert support_mask(np.array([1.0, 1e-13, -2.0])).tolist() == [True, False, True]


@pytest.mark.parametrize("space", FAMILIES, ids=str)
def test_closed_agrees_with_numeric(space):
    rng = np.random.default_rng(11)
    X = sphere_sample(space, rng, 300)
    Y = sphere_sample(space, rng, 300) * 1.7
    for x, y in zip(X, Y):
        c, n = rho_closed(space, x, y), rho_numeric(space, x, y)
        assert abs(c.rho_plus - n.rho_plus) <= 1e-8
        assert abs(c.rho_minus - n.rho_minus) <= 1e-8


@pytest.mark.parametrize("space", FAMILIES, ids=str)
def test_order_bound_and_scaling(space):
    rng = np.random.default_rng(5)
    for x, y, w in zip(sphere_sample(space, rng, 200), sphere_sample(space, rng, 200),
                       sphere_sample(space, rng, 200)):
        r = rho(space, x, y)
        ny = norm(space, y)
        assert r.rho_minus <= r.rho_plus + 1e-9
        assert abs(r.rho_plus) <= ny + 1e-9 and abs(r.rho_minus) <= ny + 1e-9
        for a in (2.0, 0.5, -1.0, -3.0):
            # degree one in the direction, degree zero in the base point
            s = rho(space, x, a * y)
            want = (a * r.rho_plus, a * r.rho_minus) if a > 0 else (a * r.rho_minus, a * r.rho_plus)
            assert _pair(s) == pytest.approx(want, abs=1e-9)
            s = rho(space, a * x, y)
            want = _pair(r) if a > 0 else (-r.rho_minus, -r.rho_plus)
            assert _pair(s) == pytest.approx(want, abs=1e-9)
        # 1-Lipschitz in the direction for unit x
        y2 = y + 0.1 * w
        s = rho(space, x, y2)
        d = norm(space, y - y2)
        assert abs(s.rho_plus - r.rho_plus) <= d + 1e-9
        assert abs(s.rho_minus - r.rho_minus) <= d + 1e-9
        # shift identity along x
        t = rho(space, x, y + 0.7 * x)
        assert _pair(t) == pytest.approx((r.rho_plus + 0.7, r.rho_minus + 0.7), abs=1e-12)


def test_smooth_lp_derivatives_coincide():
    rng = np.random.default_rng(2)
    for p in (1.3, 2, 3, 6):
        sp = lp(p, 3)
        for x, y in zip(sphere_sample(sp, rng, 100), sphere_sample(sp, rng, 100)):
            r = rho_closed(sp, x, y)
            assert r.rho_plus == r.rho_minus
            n = rho_numeric(sp, x, y)
            assert abs(n.rho_plus - n.rho_minus) <= 1e-9


def test_rows_match_single_calls():
    rng = np.random.default_rng(4)
    for sp in FAMILIES:
        x = sphere_sample(sp, rng, 1)[0]
        Y = rng.standard_normal((20, sp.dim))
        rp, rm = rho_closed_rows(sp, x, Y)
        for i, y in enumerate(Y):
            r = rho_closed(sp, x, y)
            assert (rp[i], rm[i]) == (r.rho_plus, r.rho_minus)


def test_json_shape():
    out = rho_numeric(lp(INF, 2), [1, 1], [1, -1]).to_json()
    assert set(out) == {"rho_plus", "rho_minus", "method", "step_trace"}
