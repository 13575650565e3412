"""Vector-level orthogonality relations and supporting functionals.

Relations covered: Birkhoff-James (``x _|_B y``), the positive and negative
parts ``x+`` / ``x-``, strong and approximate Birkhoff-James orthogonality,
the ``B*`` refinement, the three rho-orthogonalities, James' functional
criterion, orthogonality cones in a plane and falsifiers for left/right
symmetric points.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .derivatives import MAX_RTOL, max_set, rho, rho_closed, support_mask
from .errors import DomainError, InputError
from .minimize import golden_section_batch
from .spaces import LP, SUM1, SpaceSpec, _check, _norm, dual_norm, norm_increment, sphere_sample

__all__ = [
    "OrthoVerdict",
    "Cone2D",
    "SupportSet",
    "Counterexample",
    "lambda_bracket",
    "is_birkhoff",
    "line_minimum",
    "increment_minimum",
    "approx_line_minimum",
    "half_line_minimum",
    "in_positive_part",
    "in_negative_part",
    "is_strong_birkhoff",
    "is_approx_birkhoff",
    "is_b_star",
    "b_star_grid",
    "b_star_definitional",
    "strong_lambdas",
    "rho_orthogonal",
    "support_set",
    "support_range",
    "check_james",
    "orthogonality_cone",
    "symmetric_violation",
    "falsify_left_symmetric",
    "falsify_right_symmetric",
]

RHO_TOL = 1e-10
UNIT_TOL = 1e-9


@dataclass
class OrthoVerdict:
    relation: str
    holds: bool
    witness: dict = field(default_factory=dict)
    tol: float = 0.0

    def __bool__(self):
        return bool(self.holds)

    def to_json(self) -> dict:
        return {"relation": self.relation, "holds": bool(self.holds),
                "witness": _jsonable(self.witness), "tol": self.tol}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


def lambda_bracket(nx: float, ny: float) -> float:
    """Half-width ``L`` of the search interval for ``min_t ||x + t y||``.

    Once ``|t| ||y|| > 2 ||x||`` we have ``||x + t y|| > ||x||``, so every
    minimiser lies in ``[-L, L]`` with ``L = 2 ||x|| / ||y|| + 1``.
    """
    return 2.0 * nx / ny + 1.0


def _brackets(space, x, y, sign):
    nx, ny = _norm(space, x), _norm(space, y)
    live = ny > 0
    L = np.where(live, 2.0 * nx / np.where(live, ny, 1.0) + 1.0, 0.0)
    lo = np.where(sign > 0, 0.0, -L)
    hi = np.where(sign < 0, 0.0, L)
    return nx, lo, hi


def line_minimum(space: SpaceSpec, x, y, sign=0, width=1e-12):
    """Golden-section minimum of ``t -> ||x + t y||`` for a batch of rows.

    ``sign = 0`` searches all of ``[-L, L]``, ``+1`` only ``[0, L]`` and ``-1``
    only ``[-L, 0]``, with ``L = 2 ||x|| / ||y|| + 1``.  Returns ``(t, m)``;
    ``t = 0`` whenever nothing beats ``||x||``.
    """
    x, y = _check(space, x), _check(space, y)
    x, y = np.broadcast_arrays(np.atleast_2d(x), np.atleast_2d(y))
    nx, lo, hi = _brackets(space, x, y, sign)

    def f(t):
        return _norm(space, x + t[:, None] * y)

    t, m = golden_section_batch(f, lo, hi, width)
    better = m < nx
    return np.where(better, t, 0.0), np.where(better, m, nx)


def increment_minimum(space: SpaceSpec, x, y, sign=0, width=1e-12):
    """Like :func:`line_minimum` but minimises ``||x + t y|| - ||x||`` directly.

    The increment is evaluated without cancellation, so tiny negative
    minima (of order ``1e-20`` and below) are resolved.  Returns ``(t, d)``
    with ``d <= 0``.
    """
    x, y = _check(space, x), _check(space, y)
    x, y = np.broadcast_arrays(np.atleast_2d(x), np.atleast_2d(y))
    _, lo, hi = _brackets(space, x, y, sign)

    def f(t):
        return norm_increment(space, x, y, t)

    t, d = golden_section_batch(f, lo, hi, width)
    better = d < 0
    return np.where(better, t, 0.0), np.where(better, d, 0.0)


def is_birkhoff(space: SpaceSpec, x, y, tol=1e-9, width=1e-12) -> OrthoVerdict:
    """``||x + t y|| >= ||x||`` for every real ``t``, by golden-section search."""
    x, y = _check(space, x), _check(space, y)
    nx = float(_norm(space, x))
    t, m = line_minimum(space, x, y, 0, width)
    t, m = float(t[0]), float(m[0])
    return OrthoVerdict("birkhoff", m >= nx - tol, {"lambda": t, "min": m}, tol)


def half_line_minimum(space: SpaceSpec, x, y, sign=1, width=1e-12):
    """``(t*, min ||x + t y||)`` over ``t >= 0`` (``sign=1``) or ``t <= 0`` (``sign=-1``)."""
    t, m = line_minimum(space, x, y, 1 if sign > 0 else -1, width)
    return float(t[0]), float(m[0])


def in_positive_part(space: SpaceSpec, x, y) -> bool:
    """``y`` in ``x+``, decided as ``rho_plus(x, y) >= 0``."""
    return rho(space, x, y).rho_plus >= -RHO_TOL


def in_negative_part(space: SpaceSpec, x, y) -> bool:
    """``y`` in ``x-``, decided as ``rho_minus(x, y) <= 0``."""
    return rho(space, x, y).rho_minus <= RHO_TOL


def is_strong_birkhoff(space: SpaceSpec, x, y) -> OrthoVerdict:
    """``||x + t y|| > ||x||`` for every ``t != 0``.

    Polyhedral spaces (l_1, l_inf and their sums / products): both one-sided
    derivatives strictly away from zero.  Smooth l_p is strictly convex, so
    the strong and ordinary relations coincide there.
    """
    x, y = _check(space, x), _check(space, y)
    if not np.any(x) or not np.any(y):
        raise DomainError("strong orthogonality is defined for nonzero vectors")
    if space.is_polyhedral:
        r = rho_closed(space, x, y)
        holds = r.rho_plus > RHO_TOL and r.rho_minus < -RHO_TOL
        return OrthoVerdict("strong", holds,
                            {"rho_plus": r.rho_plus, "rho_minus": r.rho_minus}, RHO_TOL)
    if space.is_smooth_lp:
        v = is_birkhoff(space, x, y)
        return OrthoVerdict("strong", v.holds, v.witness, v.tol)
    raise InputError(f"strong orthogonality is not supported on {space}")


def strong_lambdas(L, count=1000, floor=1e-6):
    """Sample points ``+-t`` for the direct strong-orthogonality check.

    ``count // 2`` log-spaced magnitudes from ``floor`` to ``L`` on each side.
    """
    mags = np.logspace(math.log10(floor), math.log10(max(L, 10 * floor)), count // 2)
    return np.concatenate([-mags[::-1], mags])


def approx_line_minimum(space: SpaceSpec, x, y, eps, width=1e-12):
    """Minimum of ``sqrt(||x + t y||^2 + 2 eps ||x|| ||y|| |t|)`` per row."""
    x, y = _check(space, x), _check(space, y)
    x, y = np.broadcast_arrays(np.atleast_2d(x), np.atleast_2d(y))
    nx, lo, hi = _brackets(space, x, y, 0)
    c = 2.0 * eps * nx * _norm(space, y)

    def h(t):
        return np.sqrt(_norm(space, x + t[:, None] * y) ** 2 + c * np.abs(t))

    t, m = golden_section_batch(h, lo, hi, width)
    better = m < nx
    return np.where(better, t, 0.0), np.where(better, m, nx)


def is_approx_birkhoff(space: SpaceSpec, x, y, eps, tol=1e-9, width=1e-12) -> OrthoVerdict:
    """``||x + t y||^2 >= ||x||^2 - 2 eps ||x|| ||t y||`` for every real ``t``.

    Minimises ``h(t) = sqrt(||x + t y||^2 + 2 eps ||x|| ||y|| |t|)`` and compares
    with ``||x|| - tol``.  ``h`` is a monotone transform of the convex
    ``g = h^2 - ||x||^2``, and at ``eps = 0`` it equals ``||x + t y||`` bit for
    bit, so the verdict then coincides with :func:`is_birkhoff`.
    """
    if not 0 <= eps < 1:
        raise InputError(f"eps must lie in [0, 1), got {eps}")
    x = _check(space, x)
    nx = float(_norm(space, x))
    t, m = approx_line_minimum(space, x, y, eps, width)
    t, m = float(t[0]), float(m[0])
    return OrthoVerdict("approx", m >= nx - tol,
                        {"lambda": t, "min": m * m - nx * nx, "eps": eps}, tol)


def _require_unit(space, *vs):
    for v in vs:
        if abs(float(_norm(space, v)) - 1.0) > UNIT_TOL:
            raise InputError("B* orthogonality is defined on the unit sphere only")


def b_star_grid(n=512):
    """Parameters ``t`` in (0, 1) used by the definitional B* check.

    Three quarters uniform, one quarter geometric towards 1 (down to
    ``1 - t = 1e-10``), where the convex combinations approach ``y`` and the
    decision is finest.
    """
    k = n // 4
    uniform = np.linspace(0.0, 1.0, n - k + 2)[1:-1]
    near_one = 1.0 - np.logspace(-10.0, -2.5, k)
    return np.unique(np.concatenate([uniform, near_one]))


# slope below which x + t u is counted as dipping under ||x||
B_STAR_SLOPE = 1e-12
_B_STAR_CHUNK = 16384


def b_star_definitional(space: SpaceSpec, X, Y, grid=None, tol=1e-9):
    """Definition-level B* test for a batch of unit pairs (rows of X, Y).

    ``x _|_B y`` by golden section on the norm, then for every grid ``t``
    ``u = t y + (1 - t) x`` counts as orthogonal to ``x`` unless the increment
    ``||x + s u|| - ||x||`` reaches ``-B_STAR_SLOPE |s|`` somewhere.
    Returns ``(holds, orth_base, t_hit)`` with ``t_hit`` the largest grid
    ``t`` whose ``u`` is still orthogonal (``nan`` if none).
    """
    grid = b_star_grid() if grid is None else np.asarray(grid, dtype=float)
    X, Y = np.atleast_2d(_check(space, X)), np.atleast_2d(_check(space, Y))
    n, g = X.shape[0], grid.size
    _, m = line_minimum(space, X, Y)
    base = m >= _norm(space, X) - tol
    t = np.tile(grid, n)[:, None]
    Xr = np.repeat(X, g, axis=0)
    U = t * np.repeat(Y, g, axis=0) + (1.0 - t) * Xr
    orth = np.empty(n * g, dtype=bool)
    for k in range(0, n * g, _B_STAR_CHUNK):  # chunks stay cache-resident
        s, d = increment_minimum(space, Xr[k:k + _B_STAR_CHUNK], U[k:k + _B_STAR_CHUNK], width=1e-14)
        orth[k:k + _B_STAR_CHUNK] = d >= -B_STAR_SLOPE * np.abs(s)
    orth = orth.reshape(n, g)
    hit = np.where(orth.any(axis=1), grid[g - 1 - np.argmax(orth[:, ::-1], axis=1)], np.nan)
    return base & ~orth.any(axis=1), base, hit


def is_b_star(space: SpaceSpec, x, y, method="rho", grid=512) -> OrthoVerdict:
    """``x _|_B y`` while ``x`` is not orthogonal to any ``t y + (1-t) x``, ``0 < t < 1``.

    ``method="rho"`` decides it as ``rho_minus(x, y) = 0``; ``method="grid"``
    checks the definition directly on a grid of ``t`` values.
    """
    x, y = _check(space, x), _check(space, y)
    _require_unit(space, x, y)
    if method == "rho":
        r = rho(space, x, y)
        return OrthoVerdict("b_star", abs(r.rho_minus) <= 1e-9,
                            {"rho_minus": r.rho_minus, "rho_plus": r.rho_plus}, 1e-9)
    if method == "grid":
        holds, base, hit = b_star_definitional(space, x, y, b_star_grid(grid))
        wit = {"birkhoff": bool(base[0]), "t_orthogonal": None if np.isnan(hit[0]) else float(hit[0])}
        return OrthoVerdict("b_star", bool(holds[0]), wit, B_STAR_SLOPE)
    raise InputError(f"unknown method {method!r}")


def rho_orthogonal(space: SpaceSpec, x, y, tol=1e-9) -> dict:
    """Flags for ``rho_plus = 0``, ``rho_minus = 0`` and ``rho_plus + rho_minus = 0``."""
    x = _check(space, x)
    if not np.any(x):
        raise DomainError("rho-orthogonality needs x != 0")
    r = rho(space, x, y)
    return {"perp_rho_plus": abs(r.rho_plus) <= tol,
            "perp_rho_minus": abs(r.rho_minus) <= tol,
            "perp_rho": abs(r.rho_plus + r.rho_minus) <= tol,
            "rho_plus": r.rho_plus, "rho_minus": r.rho_minus}


# ---------------------------------------------------------------------------
# supporting functionals

@dataclass
class SupportSet:
    """The set ``J(x)`` of norm-one functionals with ``f(x) = ||x|| = 1``.

    ``lower``/``upper`` bound each coordinate of the members (a box for l_1,
    a point for smooth l_p); ``extreme`` lists extreme points, at most
    ``2**10`` of them (``truncated`` flags a cut list).
    """
    space: SpaceSpec
    x: np.ndarray
    kind: str
    extreme: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    truncated: bool = False

    def value_range(self, y):
        """``(min f(y), max f(y))`` over ``f`` in ``J(x)``."""
        y = np.asarray(y, dtype=float)
        if self.kind == "linf":
            vals = self.extreme @ y
            return float(vals.min()), float(vals.max())
        lo = float(np.sum(np.minimum(self.lower * y, self.upper * y)))
        hi = float(np.sum(np.maximum(self.lower * y, self.upper * y)))
        return lo, hi

    def to_json(self) -> dict:
        return {"kind": self.kind, "extreme": self.extreme.tolist(),
                "lower": self.lower.tolist(), "upper": self.upper.tolist(),
                "truncated": self.truncated}


def support_set(space: SpaceSpec, x) -> SupportSet:
    x = _check(space, x)
    if space.kind != LP:
        raise InputError("support sets are implemented for l_p^n")
    if abs(float(_norm(space, x)) - 1.0) > UNIT_TOL:
        raise InputError("support_set expects a unit vector")
    n = space.n
    if space.is_smooth_lp:
        f = np.sign(x) * np.abs(x) ** (space.p - 1.0)
        f = f / dual_norm(space, f)
        return SupportSet(space, x, "smooth", f[None, :], f.copy(), f.copy())
    if space.is_inf:
        m = np.flatnonzero(max_set(x))
        ext = np.zeros((m.size, n))
        ext[np.arange(m.size), m] = np.sign(x[m])
        return SupportSet(space, x, "linf", ext, ext.min(axis=0), ext.max(axis=0))
    nz = support_mask(x)
    lower = np.where(nz, np.sign(x), -1.0)
    upper = np.where(nz, np.sign(x), 1.0)
    free = np.flatnonzero(~nz)
    enum, truncated = free[:10], free.size > 10
    rows = []
    for signs in itertools.product((-1.0, 1.0), repeat=enum.size):
        f = upper.copy()
        f[enum] = signs
        rows.append(f)
    return SupportSet(space, x, "l1", np.array(rows), lower, upper, truncated)


def support_range(space: SpaceSpec, x, y):
    """``(min f(y), max f(y))`` over the supporting functionals ``f`` at ``x``.

    ``f`` ranges over norm-one functionals with ``f(x) = ||x||``.  l_p leaves
    use :func:`support_set`; a zero leaf contributes the whole dual ball.
    For an l_1 sum the ranges of the parts add up; for a max product the
    functional lives on the parts of largest norm, so the range is the hull
    of theirs.
    """
    x, y = _check(space, x), _check(space, y)
    nx = float(_norm(space, x))
    if nx == 0:
        ny = float(_norm(space, y))
        return -ny, ny
    if space.kind == LP:
        return support_set(space, x / nx).value_range(y)
    (xa, xb), (ya, yb) = space.split(x), space.split(y)
    la, ha = support_range(space.left, xa, ya)
    lb, hb = support_range(space.right, xb, yb)
    if space.kind == SUM1:
        return la + lb, ha + hb
    na, nb = float(_norm(space.left, xa)), float(_norm(space.right, xb))
    top = max(na, nb)
    act = [r for r, nr in (((la, ha), na), ((lb, hb), nb)) if nr >= top * (1 - MAX_RTOL)]
    return min(r[0] for r in act), max(r[1] for r in act)


def check_james(space: SpaceSpec, x, y, tol=1e-9) -> bool:
    """Some supporting functional at ``x`` annihilates ``y``."""
    x = _check(space, x)
    if not np.any(x):
        raise DomainError("James' criterion needs x != 0")
    lo, hi = support_range(space, x, y)
    return lo - tol <= 0.0 <= hi + tol


# ---------------------------------------------------------------------------
# orthogonality cone in span{x, y}

@dataclass
class Cone2D:
    """Arc of directions ``w`` in span{x, y} with ``x _|_B w`` that contains ``y``.

    ``w(theta) = cos(theta) x + sin(theta) y``; ``y`` sits at ``theta = pi/2``
    and the arc is ``[theta1, theta2]``.  ``v1``/``v2`` are its unit ends
    (clockwise / counterclockwise).
    """
    x: np.ndarray
    y: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    theta1: float
    theta2: float

    def direction(self, theta):
        return math.cos(theta) * self.x + math.sin(theta) * self.y

    def to_json(self) -> dict:
        return {"x": self.x.tolist(), "y": self.y.tolist(), "v1": self.v1.tolist(),
                "v2": self.v2.tolist(), "theta1": self.theta1, "theta2": self.theta2}


def _cone_member(space, x, y, theta):
    w = math.cos(theta) * x + math.sin(theta) * y
    r = rho(space, x, w)
    return r.rho_minus <= RHO_TOL and r.rho_plus >= -RHO_TOL


def orthogonality_cone(space: SpaceSpec, x, y, resolution=4096) -> Cone2D:
    x, y = _check(space, x), _check(space, y)
    _require_unit(space, x, y)
    if np.linalg.matrix_rank(np.vstack([x, y]), tol=1e-9) < 2:
        raise DomainError("x and y must be linearly independent")
    if not (in_positive_part(space, x, y) and in_negative_part(space, x, y)):
        raise DomainError("orthogonality_cone needs x _|_B y")
    half = math.pi / 2
    if not _cone_member(space, x, y, half):
        raise RuntimeError("y fails the membership test although x _|_B y")
    step = 2 * math.pi / resolution

    def edge(direction):
        k = 1
        while k < resolution // 2 and _cone_member(space, x, y, half + direction * k * step):
            k += 1
        inside, outside = half + direction * (k - 1) * step, half + direction * k * step
        for _ in range(60):
            mid = 0.5 * (inside + outside)
            if _cone_member(space, x, y, mid):
                inside = mid
            else:
                outside = mid
        return inside

    t1, t2 = edge(-1), edge(+1)
    w1 = math.cos(t1) * x + math.sin(t1) * y
    w2 = math.cos(t2) * x + math.sin(t2) * y
    return Cone2D(x, y, w1 / float(_norm(space, w1)), w2 / float(_norm(space, w2)), t1, t2)


# ---------------------------------------------------------------------------
# symmetric points

@dataclass
class Counterexample:
    y: np.ndarray
    form: str
    values: dict

    def to_json(self) -> dict:
        return {"y": self.y.tolist(), "form": self.form, "values": _jsonable(self.values)}


def symmetric_violation(space: SpaceSpec, x, y, side="left", margin=1e-8) -> Optional[str]:
    """Which derivative form of the symmetry implication ``y`` violates, if any.

    left:  rho+(x,y) >= 0  =>  rho+(y,x) >= 0   (form "plus")
           rho-(x,y) <= 0  =>  rho-(y,x) <= 0   (form "minus")
    right: the same with the roles of x and y exchanged.
    The conclusion must fail by more than ``margin``.
    """
    a, b = (x, y) if side == "left" else (y, x)
    if not np.any(a) or not np.any(b):
        return None
    ab, ba = rho(space, a, b), rho(space, b, a)
    if ab.rho_plus >= 0 and ba.rho_plus < -margin:
        return "plus"
    if ab.rho_minus <= 0 and ba.rho_minus > margin:
        return "minus"
    return None


def _falsify(space, x, trials, seed, side):
    x = _check(space, x)
    if not np.any(x):
        raise DomainError("symmetry of the zero vector is trivial")
    for y in sphere_sample(space, seed, trials):
        form = symmetric_violation(space, x, y, side)
        if form is not None:
            a, b = (x, y) if side == "left" else (y, x)
            ab, ba = rho(space, a, b), rho(space, b, a)
            vals = {"rho_ab": [ab.rho_plus, ab.rho_minus], "rho_ba": [ba.rho_plus, ba.rho_minus]}
            return Counterexample(y, form, vals)
    return None


def falsify_left_symmetric(space: SpaceSpec, x, trials=1000, seed=0) -> Optional[Counterexample]:
    """Search for ``y`` showing that ``x`` is not left-symmetric.

    ``None`` only means that no counterexample turned up in ``trials`` samples.
    """
    return _falsify(space, x, trials, seed, "left")


def falsify_right_symmetric(space: SpaceSpec, x, trials=1000, seed=0) -> Optional[Counterexample]:
    """Search for ``y`` showing that ``x`` is not right-symmetric."""
    return _falsify(space, x, trials, seed, "right")
