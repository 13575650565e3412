import json
import math

import numpy as np
import pytest

from normgeo import theorems
from normgeo.errors import InputError
from normgeo.oracle import TheoremReport, grid_min_lambda, sphere_mesh, theorem_ids, verify_theorem
from normgeo.spaces import lp, norm

INF = math.inf

REQUIRED_IDS = {"T2.1", "T2.2", "TLP", "TLINF", "TL1P", "TL1M", "TSB", "CSUM1", "CLS", "CRS",
                "L5416", "TBSTAR", "BOP-ORTH", "BOP-COR", "BOP-SMOOTH-NA", "BOP-SMOOTH",
                "BOP-APPROX", "BOP-SEQ"}


def test_grid_min_examples():
    t, v = grid_min_lambda(lambda s: abs(1 + s) + abs(1 - s), (-3, 3))
    assert v == pytest.approx(2, abs=1e-12) and -1 <= t <= 1
    t, v = grid_min_lambda(lambda s: (s - 2) ** 2, (-5, 5))
    assert t == pytest.approx(2, abs=1e-9) and v == pytest.approx(0, abs=1e-15)
    with pytest.raises(InputError):
        grid_min_lambda(abs, (-INF, 1))


def test_sphere_mesh_examples():
    m = sphere_mesh(lp(2, 2), 4)
    assert m.shape == (4, 2)
    assert m == pytest.approx(np.array([[1, 0], [0, 1], [-1, 0], [0, -1]]), abs=1e-15)
    m = sphere_mesh(lp(INF, 2), 721)
    assert np.min(np.max(np.abs(m - 1), axis=1)) <= 1e-2
    m = sphere_mesh(lp(1, 3), 64)
    assert np.all(np.abs(norm(lp(1, 3), m) - 1) <= 1e-12)
    with pytest.raises(InputError):
        sphere_mesh(lp(2, 4), 10)


def test_registry_covers_required_ids():
    ids = [t[0] for t in theorem_ids()]
    assert REQUIRED_IDS <= set(ids)
    assert len(ids) == len(set(ids))
    for _, trials, desc in theorem_ids():
        assert trials >= 1 and desc


def test_unknown_id_and_bad_trials():
    with pytest.raises(InputError):
        verify_theorem("NOPE")
    with pytest.raises(InputError):
        verify_theorem("T2.1", trials=0)


@pytest.mark.parametrize("theorem_id", [t[0] for t in theorem_ids()])
def test_every_suite_small_run(theorem_id):
    r = verify_theorem(theorem_id, trials=16, seed=3)
    assert r.trials == r.passes + r.skipped_boundary + len(r.counterexamples)
    assert r.ok, r.counterexamples[:2]
    json.loads(r.dumps())


def test_report_bookkeeping_and_json():
    r = TheoremReport("X", 10, 2, [{"a": 1}], 0.5, 7, 1.25, {"k": 1})
    assert r.passes == 7 and not r.ok
    assert "wall_time" not in r.to_json() and r.to_json(timing=True)["wall_time"] == 1.25
    assert "FAIL" in r.table_row()


def test_reports_are_reproducible():
    a = verify_theorem("TSB", trials=200, seed=5).dumps()
    theorems.clear_caches()
    b = verify_theorem("TSB", trials=200, seed=5).dumps()
    assert a == b


def test_threads_do_not_change_reports(monkeypatch):
    a = verify_theorem("JAMES", trials=300, seed=9).dumps()
    theorems.clear_caches()
    monkeypatch.setenv("NORMGEO_THREADS", "4")
    b = verify_theorem("JAMES", trials=300, seed=9).dumps()
    assert a == b


@pytest.mark.parametrize("theorem_id", ["CLS", "CRS", "XPERP", "VAPPROX"])
def test_structural_suites(theorem_id):
    r = verify_theorem(theorem_id, trials=1000, seed=42)
    assert r.ok, r.counterexamples[:2]


def test_left_symmetry_violations_are_found():
    r = verify_theorem("CLS", trials=1000, seed=42)
    found = r.notes["violations_found"]
    assert found["l2^4"] == 0 and found["linf^4"] > 0


def test_singleton_orbit_reduction_seed_7():
    r = verify_theorem("BOP-COR", trials=200, seed=7)
    assert r.ok and r.trials > 0
