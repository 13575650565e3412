"""Brute-force references and the theorem-verification harness.

``grid_min_lambda`` and ``sphere_mesh`` are deliberately naive: they are
the yardsticks the faster routines are measured against.  The suites
themselves live in :mod:`normgeo.theorems` and register here by id.
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .spaces import SpaceSpec, _norm

__all__ = [
    "grid_min_lambda",
    "sphere_mesh",
    "TheoremReport",
    "register",
    "theorem_ids",
    "verify_theorem",
    "worker_count",
]


def grid_min_lambda(f, bracket, steps=100_000, refine=3):
    """Dense evaluation of ``f`` on ``bracket`` followed by local re-gridding.

    Each refinement re-grids the two cells around the best point with
    ``steps // 100`` points.  Works for any continuous ``f``; the result is
    exact to roughly ``width / steps**(1 + refine)`` for convex ``f``.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise InputError("bracket must be finite")
    lo, hi = min(lo, hi), max(lo, hi)
    n = int(steps)
    best_t, best_v = lo, float(f(lo))
    for k in range(refine + 1):
        ts = np.linspace(lo, hi, n + 1)
        vs = np.array([float(f(t)) for t in ts])
        i = int(np.argmin(vs))
        if vs[i] < best_v:
            best_t, best_v = float(ts[i]), float(vs[i])
        cell = (hi - lo) / n
        lo, hi = best_t - cell, best_t + cell
        n = max(steps // 100, 16)
    return best_t, best_v


def _special_points(space, d):
    # vertices and edge midpoints of the cube / cross-polytope, up to sign
    pts = []
    for signs in np.ndindex(*(3,) * d):
        v = np.array(signs, dtype=float) - 1.0
        if np.any(v):
            pts.append(v)
    return np.array(pts)


def sphere_mesh(space: SpaceSpec, resolution: int) -> np.ndarray:
    """Unit vectors on an angular mesh, ``resolution`` points per angle.

    Dimension 2: angles ``2 pi k / resolution``.  Dimension 3: a latitude /
    longitude grid.  For l_1 / l_inf type spaces the directions of the
    vertices of the unit ball are appended so corners are hit exactly.
    Dimension 1 gives the two points +-1.
    """
    d, r = space.dim, int(resolution)
    if r < 1:
        raise InputError("resolution must be positive")
    if d > 3:
        raise InputError(f"sphere_mesh supports dimension <= 3, got {d}")
    if d == 1:
        v = np.array([[1.0], [-1.0]])
    elif d == 2:
        th = 2 * np.pi * np.arange(r) / r
        v = np.stack([np.cos(th), np.sin(th)], axis=1)
    else:
        th = np.pi * np.arange(r // 2 + 1) / max(r // 2, 1)
        ph = 2 * np.pi * np.arange(r) / r
        T, P = np.meshgrid(th, ph, indexing="ij")
        v = np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], axis=-1).reshape(-1, 3)
    if not space.is_smooth_lp and d > 1:
        v = np.concatenate([v, _special_points(space, d)])
    return v / _norm(space, v)[:, None]


# ---------------------------------------------------------------------------
# harness

@dataclass
class TheoremReport:
    theorem_id: str
    trials: int
    skipped_boundary: int
    counterexamples: list
    max_residual: float
    seed: int
    wall_time: float = 0.0
    notes: dict = field(default_factory=dict)

    @property
    def passes(self) -> int:
        return self.trials - self.skipped_boundary - len(self.counterexamples)

    @property
    def ok(self) -> bool:
        return not self.counterexamples

    def to_json(self, timing=False) -> dict:
        out = {"theorem_id": self.theorem_id, "trials": self.trials, "passes": self.passes,
               "skipped_boundary": self.skipped_boundary,
               "counterexamples": self.counterexamples,
               "max_residual": self.max_residual, "seed": self.seed, "notes": self.notes}
        if timing:
            out["wall_time"] = self.wall_time
        return out

    def dumps(self, timing=False) -> str:
        return json.dumps(self.to_json(timing), sort_keys=True)

    def table_row(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return (f"{self.theorem_id:<15} {status:<5} trials={self.trials:<6} "
                f"skipped={self.skipped_boundary:<5} counterexamples={len(self.counterexamples):<4} "
                f"max_residual={self.max_residual:.3e}")


_REGISTRY: dict = {}


def register(theorem_id, default_trials, description):
    """Decorator adding a suite ``fn(trials, seed) -> dict`` to the registry."""
    def wrap(fn):
        _REGISTRY[theorem_id] = (fn, default_trials, description)
        return fn
    return wrap


def _load():
    from . import theorems  # noqa: F401  (registers the suites)


def theorem_ids():
    """Registered ids in registration order, with default trials and a description."""
    _load()
    return [(k, v[1], v[2]) for k, v in _REGISTRY.items()]


def worker_count() -> int:
    """Worker cap from ``NORMGEO_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("NORMGEO_THREADS", "1")))
    except ValueError:
        return 1


def verify_theorem(theorem_id: str, trials=None, seed=42) -> TheoremReport:
    """Run the registered equivalence suite for ``theorem_id``."""
    _load()
    if theorem_id not in _REGISTRY:
        raise InputError(f"unknown theorem id {theorem_id!r}")
    fn, default, _ = _REGISTRY[theorem_id]
    trials = default if trials is None else int(trials)
    if trials < 1:
        raise InputError("trials must be at least 1")
    t0 = time.perf_counter()
    out = fn(trials, int(seed))
    return TheoremReport(theorem_id, out["trials"], out["skipped"], out["counterexamples"],
                         float(out["max_residual"]), int(seed), time.perf_counter() - t0,
                         out.get("notes", {}))
