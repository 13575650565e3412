import json
import math

import numpy as np
import pytest

from normgeo.bilinear import (BilinearOp, approx_certificate, attainment_certificate, attainment_set,
                              is_operator_approx_birkhoff, is_operator_birkhoff, is_operator_smooth,
                              norming_sequence_conditions, operator_approx_batch,
                              operator_birkhoff_batch, operator_norm, parse_operator)
from normgeo.errors import InputError
from normgeo.spaces import dual_norm, lp, norm

INF = math.inf
L2, LI = lp(2, 2), lp(INF, 2)


def _diag(S=L2):
    c = np.zeros((2, 2, 2))
    c[0, 0, 0] = c[1, 1, 1] = 1
    return BilinearOp(c, S, S, S)


def _unit(k, i, j, S=L2, Z=None):
    c = np.zeros((2, 2, 2))
    c[k, i, j] = 1
    return BilinearOp(c, S, S, S if Z is None else Z)


def test_apply_examples():
    T = _diag()
    assert T([1, 0], [1, 0]).tolist() == [1, 0]
    rng = np.random.default_rng(0)
    R = BilinearOp(rng.standard_normal((2, 2, 2)), L2, L2, L2)
    assert R([0, 0], [1, 2]).tolist() == [0, 0]
    R1 = BilinearOp.rank_one(np.array([1.0, 0]), np.array([1.0, 0]), np.array([0.0, 1]), L2, L2, L2)
    assert R1.apply([2, 0], [3, 0]).tolist() == [0, 6]


def test_bilinearity():
    rng = np.random.default_rng(1)
    T = BilinearOp(rng.standard_normal((3, 2, 4)), lp(1, 2), lp(3, 4), lp(INF, 3))
    x, u = rng.standard_normal((2, 2))
    y, v = rng.standard_normal((2, 4))
    assert T(2 * x - u, y) == pytest.approx(2 * T(x, y) - T(u, y))
    assert T(x, 3 * y + v) == pytest.approx(3 * T(x, y) + T(x, v))


def test_parse_operator_round_trip_and_errors():
    T = _diag(LI)
    again = parse_operator(json.dumps(T.to_json()))
    assert np.array_equal(again.coeffs, T.coeffs) and again.X == LI
    for bad in ('{"X":"lp:2:2","Y":"lp:2:2","Z":"lp:2:2"}', "[1]",
                '{"X":"lp:2:2","Y":"lp:2:2","Z":"lp:2:3","c":[[[1,0],[0,1]],[[0,0],[0,0]]]}',
                '{"X":"lp:2:2","Y":"lp:2:2","Z":"lp:2:2","c":"x"}'):
        with pytest.raises(InputError):
            parse_operator(bad)


def test_norm_examples():
    f, g, z = np.array([1.0, 0]), np.array([1.0, 0]), np.array([0.6, 0.8])
    assert operator_norm(BilinearOp.rank_one(f, g, z, L2, L2, L2))[0] == pytest.approx(1, abs=1e-12)
    v, (x, y) = operator_norm(_diag(LI))
    assert v == pytest.approx(1, abs=1e-12)
    v, (x, y) = operator_norm(_diag(L2))
    assert v == pytest.approx(1, abs=1e-12)
    assert sorted(np.round(np.abs(x), 6).tolist()) in ([0, 1],)
    g_val, _ = operator_norm(_diag(L2), method="grid")
    assert g_val == pytest.approx(1, abs=1e-12)
    with pytest.raises(InputError):
        operator_norm(_diag(L2), method="nope")


def test_norm_pair_is_unit_and_attains():
    rng = np.random.default_rng(2)
    for X, Y, Z in ((lp(1, 2), lp(3, 2), LI), (LI, L2, lp(1, 2))):
        T = BilinearOp(rng.uniform(-1, 1, (2, 2, 2)), X, Y, Z)
        v, (x, y) = operator_norm(T)
        assert norm(X, x) == pytest.approx(1, abs=1e-10) and norm(Y, y) == pytest.approx(1, abs=1e-10)
        assert norm(Z, T(x, y)) == pytest.approx(v, rel=1e-12)


def test_rank_one_analytic_norm():
    rng = np.random.default_rng(3)
    for X, Y, Z in ((L2, LI, lp(1, 2)), (lp(1, 2), lp(3, 2), L2), (LI, LI, LI)):
        f, g, z = rng.standard_normal((3, 2))
        exact = dual_norm(X, f) * dual_norm(Y, g) * norm(Z, z)
        assert operator_norm(BilinearOp.rank_one(f, g, z, X, Y, Z))[0] == pytest.approx(exact, rel=1e-9)


def test_norm_grid_agreement_and_homogeneity():
    rng = np.random.default_rng(4)
    for k in range(10):
        X, Y, Z = (lp(p, 2) for p in rng.choice([1, 2, 3, INF], 3))
        T = BilinearOp(rng.uniform(-1, 1, (2, 2, 2)), X, Y, Z)
        alt = operator_norm(T)[0]
        assert abs(alt - operator_norm(T, method="grid", resolution=361)[0]) <= 1e-3
        for a in (-2.0, 0.5):
            assert operator_norm(a * T)[0] == pytest.approx(abs(a) * alt, rel=1e-8)
        P, Q = rng.standard_normal((2, 50, 2))
        assert np.all(norm(Z, T(P, Q)) <= alt * norm(X, P) * norm(Y, Q) * (1 + 1e-12))


def test_attainment_examples():
    M = attainment_set(_diag(L2))
    assert M.count == 2
    reps = sorted(tuple(np.round(np.concatenate(r), 6)) for r in M.representatives)
    assert reps == [(0, 1, 0, 1), (1, 0, 1, 0)]
    f, g = np.array([0.6, 0.8]), np.array([1.0, -1.0])
    assert attainment_set(BilinearOp.rank_one(f, g, np.array([1.0, 0]), L2, L2, L2)).count == 1
    assert attainment_set(_diag(LI)).count >= 3


def test_attainment_representatives_attain_and_are_separated():
    rng = np.random.default_rng(5)
    T = BilinearOp(rng.uniform(-1, 1, (2, 2, 2)), LI, LI, lp(1, 2))
    M = attainment_set(T)
    keys = [np.concatenate(r) for r in M.representatives]
    for x, y in M.representatives:
        assert norm(lp(1, 2), T(x, y)) >= M.norm - M.tol
    for i in range(len(keys)):
        for j in range(i):
            assert np.max(np.abs(keys[i] - keys[j])) > M.cluster_radius


def test_operator_birkhoff_examples():
    T, A = _unit(0, 0, 0), _unit(0, 1, 1)
    v = is_operator_birkhoff(T, A)
    assert v.holds and v.witness["via_attainment"]["holds"]
    assert not is_operator_birkhoff(T, T).holds
    # rank-one A agreeing with T at its unique attaining pair
    A2 = BilinearOp.rank_one(np.array([1.0, 0.3]), np.array([1.0, -0.2]), np.array([1.0, 0]), L2, L2, L2)
    assert not is_operator_birkhoff(T, A2).holds
    assert not attainment_certificate(T, A2)["holds"]


def test_two_orbit_certificate_needs_two_pairs():
    T = _diag(L2)
    c = np.zeros((2, 2, 2))
    c[0, 0, 0], c[1, 1, 1] = 0.5, -0.5
    A = BilinearOp(c, L2, L2, L2)
    cert = attainment_certificate(T, A)
    assert cert["holds"] and cert["plus_pair"] != cert["minus_pair"]
    assert cert["plus_stat"] == pytest.approx(0.5) and cert["minus_stat"] == pytest.approx(-0.5)
    assert is_operator_birkhoff(T, A).holds


def test_norming_sequence_examples():
    T, A = _unit(0, 0, 0), _unit(0, 1, 1)
    assert "a" in norming_sequence_conditions(T, A)["certified_by"]
    r = norming_sequence_conditions(_diag(L2), _unit(1, 0, 0))
    assert "b" in r["certified_by"] and r["consistent"]
    r = norming_sequence_conditions(T, T)
    assert r["certified_by"] == [] and not r["numeric_holds"] and r["consistent"]


def test_smoothness_fixtures():
    assert is_operator_smooth(_unit(0, 0, 0)).holds
    v = is_operator_smooth(_diag(L2))
    assert not v.holds and v.witness["orbits"] == 2
    c = np.zeros((2, 2, 2))
    c[0, 0, 0] = c[1, 0, 0] = 1
    v = is_operator_smooth(BilinearOp(c, L2, L2, LI))
    assert not v.holds and v.witness["orbits"] == 1
    f, g = np.array([0.6, 0.8]), np.array([0.3, -1.0])
    assert is_operator_smooth(BilinearOp.rank_one(f, g, np.array([0.2, 0.7]), L2, lp(3, 2), L2)).holds


def test_approx_examples():
    T, A = _unit(0, 0, 0), _unit(0, 1, 1)
    for e in (0, 0.1, 0.5, 0.9):
        assert is_operator_approx_birkhoff(T, A, e).holds
    assert not is_operator_approx_birkhoff(T, T, 0.9).holds
    with pytest.raises(InputError):
        is_operator_approx_birkhoff(T, A, 1.0)


def test_approx_zero_matches_plain_batch():
    rng = np.random.default_rng(6)
    CT, CA = rng.uniform(-1, 1, (2, 12, 2, 2, 2))
    a = operator_birkhoff_batch(CT, CA, L2, LI, lp(1, 2))
    b = operator_approx_batch(CT, CA, L2, LI, lp(1, 2), 0.0)
    for k in a:
        assert np.array_equal(a[k], b[k])


def test_approx_certificate_clause_a_and_gaps():
    T, A = _unit(0, 0, 0), _unit(0, 1, 1)
    c = approx_certificate(T, A, 0.2)
    assert c["clause_a"] and c["holds"] and c["min_A_on_M"] == pytest.approx(0, abs=1e-12)
    c = approx_certificate(T, T, 0.5)
    assert not c["holds"] and not c["clause_a"]


def test_mismatched_operator_spaces():
    with pytest.raises(InputError):
        is_operator_birkhoff(_diag(L2), _diag(LI))
