import json
import math

import numpy as np
import pytest

from normgeo.errors import DomainError, InputError
from normgeo.spaces import (SpaceError, Vector, dual_norm, dual_space, lp, norm, norm_increment,
                            norming_vector, parse_space, parse_vector, prodmax, sip_lp, space_to_json,
                            sphere_sample, sum1)

INF = math.inf


def test_norm_values():
    assert norm(lp(2, 2), [3, 4]) == pytest.approx(5)
    assert norm(lp(INF, 2), [2, -7]) == 7
    assert norm(sum1(lp(1, 2), lp(INF, 2)), [1, 1, 2, -3]) == 5


def test_prodmax_norm():
    sp = prodmax(lp(1, 2), lp(2, 2))
    assert norm(sp, [1, -1, 3, 4]) == 5
    assert norm(sp, [4, -3, 0, 1]) == 7


def test_nested_composite_matches_manual():
    inner = sum1(lp(1, 2), lp(INF, 3))
    sp = prodmax(inner, lp(2, 2))
    rng = np.random.default_rng(0)
    for v in rng.standard_normal((50, 7)):
        manual = max(np.abs(v[:2]).sum() + np.abs(v[2:5]).max(), np.hypot(v[5], v[6]))
        assert norm(sp, v) == pytest.approx(manual, rel=1e-14)


def test_dimension_mismatch():
    with pytest.raises(InputError):
        norm(lp(2, 3), [1, 2])


def test_bad_exponent():
    for p in (0.5, -1, float("nan")):
        with pytest.raises(SpaceError):
            lp(p, 2)
    with pytest.raises(SpaceError):
        lp(2, 0)


def test_sip_examples():
    assert sip_lp([3, 4], [4, -3], 2) == pytest.approx(0, abs=1e-12)
    for p in (1.5, 2, 3, 7):
        y = np.array([1.0, 2.0])
        assert sip_lp(y, y, p) == pytest.approx(norm(lp(p, 2), y) ** 2, rel=1e-12)
    assert sip_lp([1, -1], [1, 1], 3) == pytest.approx(0, abs=1e-15)


def test_sip_errors():
    with pytest.raises(DomainError):
        sip_lp([1, 2], [0, 0], 3)
    for p in (1, INF, 0.5):
        with pytest.raises(InputError):
            sip_lp([1, 2], [1, 1], p)


def test_sip_linear_first_slot_homogeneous_second():
    rng = np.random.default_rng(3)
    for p in (1.5, 3, 4.5):
        x, u, y = rng.standard_normal((3, 4))
        assert sip_lp(2 * x - u, y, p) == pytest.approx(2 * sip_lp(x, y, p) - sip_lp(u, y, p), rel=1e-12)
        for a in (0.5, 2, 10):
            assert sip_lp(x, a * y, p) == pytest.approx(a * sip_lp(x, y, p), rel=1e-12)


def test_sphere_sample_unit_and_deterministic():
    v = sphere_sample(lp(2, 3), 1, 10)
    assert v.shape == (10, 3)
    assert np.all(np.abs(np.linalg.norm(v, axis=1) - 1) <= 1e-12)
    assert np.array_equal(sphere_sample(lp(1, 2), 7, 1), sphere_sample(lp(1, 2), 7, 1))


def test_sphere_sample_hits_linf_ties():
    v = sphere_sample(lp(INF, 4), 2, 1000)
    ties = (np.abs(np.abs(v) - 1) <= 1e-3).sum(axis=1)
    assert np.any(ties >= 2)


def test_sphere_sample_composites_unit():
    for sp in (sum1(lp(1, 2), lp(INF, 2)), prodmax(lp(3, 2), lp(1, 1))):
        v = sphere_sample(sp, 5, 200)
        assert np.all(np.abs(norm(sp, v) - 1) <= 1e-12)


def test_norm_increment_matches_direct_difference():
    rng = np.random.default_rng(1)
    for sp in (lp(1, 3), lp(2, 3), lp(3.5, 3), lp(INF, 3), sum1(lp(1, 1), lp(2, 2))):
        x, y = rng.standard_normal((2, 3))
        for t in (-2.0, -0.3, 0.7, 3.0):
            direct = norm(sp, x + t * y) - norm(sp, x)
            assert norm_increment(sp, x, y, t) == pytest.approx(direct, abs=1e-12)


def test_norm_increment_small_steps_keep_slope():
    x, y = np.array([3.0, 4.0]), np.array([1.0, 0.0])
    q = norm_increment(lp(2, 2), x, y, 1e-14) / 1e-14
    assert q == pytest.approx(0.6, rel=1e-6)


def test_duality():
    assert dual_space(lp(3, 2)).p == pytest.approx(1.5)
    assert dual_space(lp(1, 2)).is_inf
    for sp in (lp(1, 3), lp(2, 3), lp(3, 3), lp(INF, 3)):
        x = np.array([0.3, -1.2, 0.5])
        f = norming_vector(dual_space(sp), x)
        assert dual_norm(sp, f) == pytest.approx(1, abs=1e-12)
        assert f @ x == pytest.approx(norm(sp, x), rel=1e-12)


def test_json_round_trip():
    for sp in (lp(1, 2), lp(INF, 3), lp(2.5, 2), sum1(lp(1, 2), prodmax(lp(INF, 1), lp(3, 2)))):
        assert parse_space(json.loads(json.dumps(space_to_json(sp)))) == sp
    vec = Vector(lp(2, 2), np.array([1.0, -2.0]))
    again = parse_vector(json.dumps(vec.to_json()))
    assert again.space == vec.space and np.array_equal(again.coords, vec.coords)


def test_compact_space_syntax():
    assert parse_space("lp:inf:2") == lp(INF, 2)
    assert parse_space("lp:1.5:3") == lp(1.5, 3)
    for bad in ("lp:2", "lp:x:2", '{"kind":"lp","p":2}', '{"kind":"weird"}', "[1,2]"):
        with pytest.raises(SpaceError):
            parse_space(bad)


def test_vector_validation():
    with pytest.raises(SpaceError):
        parse_vector([1, "a"], lp(2, 2))
    with pytest.raises(SpaceError):
        parse_vector([1, 2])
    with pytest.raises(InputError):
        parse_vector([1, 2, 3], lp(2, 2))
