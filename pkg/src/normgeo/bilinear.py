"""Bilinear operators ``T: X x Y -> Z`` stored as coefficient tensors.

``T(x, y)_k = sum_ij c[k, i, j] x_i y_j``.  The operator norm is the
maximum of ``||T(x, y)||`` over the product of unit spheres; at finite
dimension it is always attained, so the attainment set ``M_T`` is never
empty.  Every finite-dimensional bilinear map is compact and weak-weak
continuous, so those hypotheses need no runtime check here.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .derivatives import rho
from .errors import DomainError, InputError
from .minimize import golden_section_batch
from .orthogonality import OrthoVerdict, lambda_bracket
from .spaces import (LP, SUM1, SpaceSpec, _norm, dual_space, norming_vector, parse_space,
                     space_to_json, sphere_sample)

__all__ = [
    "BilinearOp",
    "AttainmentSet",
    "operator_norm",
    "operator_norm_batch",
    "attainment_set",
    "is_operator_birkhoff",
    "operator_birkhoff_batch",
    "attainment_certificate",
    "norming_sequence_conditions",
    "is_operator_smooth",
    "is_operator_approx_birkhoff",
    "operator_approx_batch",
    "approx_certificate",
    "parse_operator",
]

MAX_ITER = 2000
STEP_TOL = 1e-13


@dataclass(frozen=True)
class BilinearOp:
    coeffs: np.ndarray
    X: SpaceSpec
    Y: SpaceSpec
    Z: SpaceSpec

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim != 3 or c.shape != (self.Z.dim, self.X.dim, self.Y.dim):
            raise InputError(f"coefficients of shape {c.shape} do not match "
                             f"Z x X x Y = {self.Z.dim} x {self.X.dim} x {self.Y.dim}")
        if not np.all(np.isfinite(c)):
            raise InputError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def apply(self, x, y):
        """``T(x, y)``; ``x`` and ``y`` may carry matching leading batch axes."""
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        if x.shape[-1] != self.X.dim or y.shape[-1] != self.Y.dim:
            raise InputError(f"apply expects x in {self.X} and y in {self.Y}")
        return np.einsum("kij,...i,...j->...k", self.coeffs, x, y)

    __call__ = apply

    def __add__(self, other):
        return BilinearOp(self.coeffs + _same(self, other).coeffs, self.X, self.Y, self.Z)

    def __sub__(self, other):
        return BilinearOp(self.coeffs - _same(self, other).coeffs, self.X, self.Y, self.Z)

    def __mul__(self, a):
        return BilinearOp(float(a) * self.coeffs, self.X, self.Y, self.Z)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def to_json(self) -> dict:
        return {"X": space_to_json(self.X), "Y": space_to_json(self.Y),
                "Z": space_to_json(self.Z), "c": self.coeffs.tolist()}

    @classmethod
    def rank_one(cls, f, g, z0, X, Y, Z):
        """``(x, y) -> f(x) g(y) z0``."""
        return cls(np.einsum("k,i,j->kij", z0, f, g), X, Y, Z)


def _same(T, A):
    if (str(T.X), str(T.Y), str(T.Z)) != (str(A.X), str(A.Y), str(A.Z)):
        raise InputError("operators must share domain and codomain")
    return A


def parse_operator(obj) -> BilinearOp:
    """``{"X": ..., "Y": ..., "Z": ..., "c": [[[...]]]}`` as a dict or JSON text."""
    if isinstance(obj, BilinearOp):
        return obj
    if isinstance(obj, str):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise InputError(f"operator is not valid JSON: {exc}") from None
    if not isinstance(obj, dict) or set(obj) != {"X", "Y", "Z", "c"}:
        raise InputError("operator literal needs exactly 'X', 'Y', 'Z' and 'c'")
    X, Y, Z = (parse_space(obj[k]) for k in ("X", "Y", "Z"))
    try:
        c = np.array(obj["c"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad coefficient tensor: {exc}") from None
    return BilinearOp(c, X, Y, Z)


# ---------------------------------------------------------------------------
# operator norm

# at most this many vertex starts are added per operator
_VERTEX_CAP = 64


def _vertices(space):
    """Extreme points of the unit ball up to sign, or None if there are too many."""
    if space.kind == LP:
        n = space.n
        if space.is_l1:
            return np.eye(n)
        if space.is_inf and n <= 7:
            signs = np.array(list(itertools.product((1.0, -1.0), repeat=n - 1))).reshape(-1, n - 1)
            return np.hstack([np.ones((len(signs), 1)), signs])
        return None
    a, b = _vertices(space.left), _vertices(space.right)
    if a is None or b is None:
        return None
    if space.kind == SUM1:
        return np.vstack([np.hstack([a, np.zeros((len(a), b.shape[1]))]),
                          np.hstack([np.zeros((len(b), a.shape[1])), b])])
    if len(a) * len(b) * 2 > _VERTEX_CAP:
        return None
    pa = np.repeat(np.vstack([a, -a]), len(b), axis=0)
    pb = np.tile(b, (2 * len(a), 1))
    return np.hstack([pa, pb])


def _starts(X, Y, seed, restarts):
    """Random unit pairs, plus vertex starts for polyhedral factors.

    ``||T(x, y)||`` is convex in each argument, so its maximum over a
    polyhedral ball is reached at a vertex; seeding the ascent there keeps
    it from settling on a lesser corner.
    """
    rng = np.random.default_rng([int(seed), 7919])
    xs, ys = sphere_sample(X, rng, restarts), sphere_sample(Y, rng, restarts)
    vx, vy = _vertices(X), _vertices(Y)
    if vx is not None and vy is not None and len(vx) * len(vy) <= _VERTEX_CAP:
        ex, ey = np.repeat(vx, len(vy), axis=0), np.tile(vy, (len(vx), 1))
    elif vx is not None and len(vx) <= _VERTEX_CAP:
        ex, ey = vx, ys[np.arange(len(vx)) % len(ys)]
    elif vy is not None and len(vy) <= _VERTEX_CAP:
        ex, ey = xs[np.arange(len(vy)) % len(xs)], vy
    else:
        return xs, ys
    ex = ex / _norm(X, ex)[:, None]
    ey = ey / _norm(Y, ey)[:, None]
    return np.vstack([xs, ex]), np.vstack([ys, ey])


def _contract(C, x, y):
    # T(x, y) row by row: C (N, dz, dx, dy), x (..., N, dx), y (..., N, dy)
    Cy = (C @ y[..., None, :, None])[..., 0]
    return np.sum(Cy * x[..., None, :], axis=-1)


def _value(C, Z, x, y):
    return _norm(Z, _contract(C, x, y))


_EXTRAP = 2.0 ** np.arange(1, 11)


def _extrapolate(C, X, Y, Z, x, y, xn, yn):
    s = _EXTRAP[:, None, None]
    xs = x + s * (xn - x)
    ys = y + s * (yn - y)
    xs = xs / np.maximum(_norm(X, xs), 1e-300)[..., None]
    ys = ys / np.maximum(_norm(Y, ys), 1e-300)[..., None]
    vs = _value(C, Z, xs, ys)
    k = np.argmax(vs, axis=0)
    rows = np.arange(x.shape[0])
    return xs[k, rows], ys[k, rows], vs[k, rows]


def _sweep(C, X, Y, Zd, Z, x, y, g, val):
    g = norming_vector(Zd, _contract(C, x, y), current=g)
    Cy = (C @ y[:, None, :, None])[..., 0]
    xn = norming_vector(X, np.sum(g[:, :, None] * Cy, axis=1), current=x)
    xC = (xn[:, None, None, :] @ C)[:, :, 0, :]
    yn = norming_vector(Y, np.sum(g[:, :, None] * xC, axis=1), current=y)
    vn = _value(C, Z, xn, yn)
    # extrapolate along the sweep: flat maxima make plain sweeps crawl
    xe, ye, ve = _extrapolate(C, X, Y, Z, x, y, xn, yn)
    take = (ve > vn)[:, None]
    xn, yn, vn = np.where(take, xe, xn), np.where(take, ye, yn), np.maximum(ve, vn)
    keep = (vn < val)[:, None]
    return np.where(keep, x, xn), np.where(keep, y, yn), g, np.maximum(vn, val)


def _ascent(C, X, Y, Z, x, y):
    """Block ascent on ``g(T(x, y))`` over unit x, unit y and norm-one g in Z*.

    Rows are independent problems: ``C`` has shape (N, dz, dx, dy), the
    starts (N, d).  Each block step is an exact maximisation, so
    ``||T(x, y)||`` never decreases; a row stops once its step is below
    ``STEP_TOL``.
    """
    Zd = dual_space(Z)
    x, y = x.copy(), y.copy()
    val = _value(C, Z, x, y)
    g = norming_vector(Zd, _contract(C, x, y))
    act = np.arange(C.shape[0])
    for _ in range(MAX_ITER):
        if act.size == 0:
            break
        xa, ya = x[act], y[act]
        xn, yn, gn, vn = _sweep(C[act], X, Y, Zd, Z, xa, ya, g[act], val[act])
        step = np.maximum(np.max(np.abs(xn - xa), axis=1), np.max(np.abs(yn - ya), axis=1))
        x[act], y[act], g[act], val[act] = xn, yn, gn, vn
        act = act[step >= STEP_TOL]
    return val, x, y


def operator_norm_batch(coeffs, X, Y, Z, seed=0, restarts=32, warm=None):
    """Alternating-ascent norms of a stack of tensors (B, dz, dx, dy) sharing spaces.

    ``warm = (xw, yw)`` with shapes (B, W, dx) and (B, W, dy) adds W extra
    starts per tensor.  Returns ``(values, x, y, all_values, all_x, all_y)``;
    the ``all_*`` arrays keep every start so that attainment sets can be
    harvested.
    """
    C = np.asarray(coeffs, dtype=float)
    B, R = C.shape[0], int(restarts)
    x0, y0 = _starts(X, Y, seed, R)
    x0, y0 = np.broadcast_to(x0, (B,) + x0.shape), np.broadcast_to(y0, (B,) + y0.shape)
    if warm is not None:
        x0 = np.concatenate([x0, warm[0]], axis=1)
        y0 = np.concatenate([y0, warm[1]], axis=1)
    R = x0.shape[1]
    rows = np.repeat(np.arange(B), R)
    vals, xs, ys = _ascent(C[rows], X, Y, Z, x0.reshape(B * R, -1), y0.reshape(B * R, -1))
    vals, xs, ys = vals.reshape(B, R), xs.reshape(B, R, -1), ys.reshape(B, R, -1)
    best = np.argmax(vals, axis=1)
    idx = np.arange(B)
    return vals[idx, best], xs[idx, best], ys[idx, best], vals, xs, ys


def _grid_norm(T, resolution):
    from .oracle import sphere_mesh

    xs, ys = sphere_mesh(T.X, resolution), sphere_mesh(T.Y, resolution)
    best, pair = -1.0, None
    rows = max(1, 2 ** 20 // len(ys))
    for start in range(0, len(xs), rows):
        chunk = xs[start:start + rows]
        v = _norm(T.Z, np.einsum("kij,ai,bj->abk", T.coeffs, chunk, ys))
        a, b = np.unravel_index(int(np.argmax(v)), v.shape)
        if v[a, b] > best:
            best, pair = float(v[a, b]), (chunk[a], ys[b])
    return best, pair


_CACHE: "OrderedDict[tuple, tuple]" = OrderedDict()
_CACHE_SIZE = 4096


def operator_norm(T: BilinearOp, method="alternating", seed=0, restarts=32, resolution=721):
    """``(||T||, (x, y))`` with the best unit pair found.

    ``alternating`` runs exact block ascent from ``restarts`` random starts and
    is a lower bound that is tight in practice; ``multistart`` is the same
    with four times the restarts; ``grid`` scans a dense sphere mesh (each
    factor of dimension <= 3) and serves as the reference.
    """
    if method == "grid":
        return _grid_norm(T, resolution)
    if method == "multistart":
        method, restarts = "alternating", 4 * restarts
    if method != "alternating":
        raise InputError(f"unknown operator-norm method {method!r}")
    key = (T.coeffs.tobytes(), T.coeffs.shape, str(T.X), str(T.Y), str(T.Z), int(seed), int(restarts))
    hit = _CACHE.get(key)
    if hit is None:
        v, x, y, *_ = operator_norm_batch(T.coeffs[None], T.X, T.Y, T.Z, seed, restarts)
        hit = (float(v[0]), (x[0].copy(), y[0].copy()))
        _CACHE[key] = hit
        if len(_CACHE) > _CACHE_SIZE:
            _CACHE.popitem(last=False)
    else:
        _CACHE.move_to_end(key)
    return hit[0], (hit[1][0].copy(), hit[1][1].copy())


# ---------------------------------------------------------------------------
# attainment set

@dataclass
class AttainmentSet:
    """Orbit representatives of ``M_T`` modulo ``(x, y) -> (+-x, +-y)``."""
    representatives: list
    values: list
    norm: float
    cluster_radius: float
    tol: float

    @property
    def count(self) -> int:
        return len(self.representatives)

    def to_json(self) -> dict:
        return {"norm": self.norm, "count": self.count, "cluster_radius": self.cluster_radius,
                "tol": self.tol, "values": [float(v) for v in self.values],
                "representatives": [[x.tolist(), y.tolist()] for x, y in self.representatives]}


def _sign_fix(v, radius):
    big = np.flatnonzero(np.abs(v) > radius)
    if big.size and v[big[0]] < 0:
        v = -v
    return v + 0.0  # no negative zeros in reports


def _cluster(vals, xs, ys, norm_value, tol, radius):
    reps, rvals = [], []
    for i in np.argsort(-vals, kind="stable"):
        if vals[i] < norm_value - tol:
            break
        x, y = _sign_fix(xs[i], radius), _sign_fix(ys[i], radius)
        key = np.concatenate([x, y])
        if any(np.max(np.abs(key - np.concatenate(r))) <= radius for r in reps):
            continue
        reps.append((x, y))
        rvals.append(float(vals[i]))
    return reps, rvals


def attainment_set(T: BilinearOp, tol=1e-6, cluster_radius=1e-3, restarts=64, seed=0) -> AttainmentSet:
    """Cluster the restarts of the ascent that land within ``tol`` of ``||T||``.

    Pairs are put in canonical form first: ``x`` is flipped so that its first
    coordinate of size above ``cluster_radius`` is positive, then ``y``.
    """
    v, _, _, vals, xs, ys = operator_norm_batch(T.coeffs[None], T.X, T.Y, T.Z, seed, restarts)
    N = float(v[0])
    if N <= 0:
        raise DomainError("the zero operator has no norm attainment set")
    reps, rvals = _cluster(vals[0], xs[0], ys[0], N, tol, cluster_radius)
    return AttainmentSet(reps, rvals, N, cluster_radius, tol)


# ---------------------------------------------------------------------------
# operator-level orthogonality

# best pairs of this many recent evaluations seed the next one
_WARM = 3


def _min_along(C_T, C_A, X, Y, Z, lo, hi, eps_term, seed, restarts, width):
    """Golden-section minimum of ``sqrt(||T + t A||^2 + eps_term |t|)`` per batch entry.

    Consecutive probes are close in ``t``, so the maximisers found at the
    last few probes are added to the random starts.
    """
    pool = []

    def f(t):
        warm = None
        if pool:
            warm = (np.stack([p[0] for p in pool], axis=1), np.stack([p[1] for p in pool], axis=1))
        C = C_T + t[:, None, None, None] * C_A
        v, x, y, *_ = operator_norm_batch(C, X, Y, Z, seed, restarts, warm)
        pool.append((x, y))
        del pool[:-_WARM]
        return np.sqrt(v * v + eps_term * np.abs(t))

    return golden_section_batch(f, lo, hi, width=width)


def _batch_verdicts(C_T, C_A, X, Y, Z, eps, tol, seed, restarts, width):
    NT, *_ = operator_norm_batch(C_T, X, Y, Z, seed, restarts)
    NA, *_ = operator_norm_batch(C_A, X, Y, Z, seed, restarts)
    live = NA > 0
    L = np.where(live, 2.0 * NT / np.where(live, NA, 1.0) + 1.0, 1.0)
    t, m = _min_along(C_T, C_A, X, Y, Z, -L, L, 2.0 * eps * NT * NA, seed, restarts, width)
    better = m < NT
    t = np.where(better & live, t, 0.0)
    m = np.where(better & live, m, NT)
    return NT, NA, t, m, m >= NT - tol


def operator_birkhoff_batch(C_T, C_A, X, Y, Z, tol=1e-8, seed=0, restarts=16, width=1e-10):
    """Numeric ``T _|_B A`` for stacks of tensors sharing spaces.

    Returns a dict of arrays: ``norm_T``, ``norm_A``, ``lambda``, ``min``, ``holds``.
    """
    NT, NA, t, m, holds = _batch_verdicts(np.asarray(C_T, float), np.asarray(C_A, float),
                                          X, Y, Z, 0.0, tol, seed, restarts, width)
    return {"norm_T": NT, "norm_A": NA, "lambda": t, "min": m, "holds": holds}


def operator_approx_batch(C_T, C_A, X, Y, Z, eps, tol=1e-8, seed=0, restarts=16, width=1e-10):
    """Numeric ``T _|_B^eps A`` for stacks of tensors sharing spaces.

    Minimises ``sqrt(||T + t A||^2 + 2 eps ||T|| ||A|| |t|)`` against
    ``||T|| - tol``; at ``eps = 0`` this is bit-for-bit the orthogonality test.
    """
    if not 0 <= eps < 1:
        raise InputError(f"eps must lie in [0, 1), got {eps}")
    NT, NA, t, m, holds = _batch_verdicts(np.asarray(C_T, float), np.asarray(C_A, float),
                                          X, Y, Z, float(eps), tol, seed, restarts, width)
    return {"norm_T": NT, "norm_A": NA, "lambda": t, "min": m, "holds": holds}


def attainment_certificate(T: BilinearOp, A: BilinearOp, M: AttainmentSet = None, tol=1e-10):
    """Search ``M_T`` for a pair with ``A(x,y)`` in ``T(x,y)+`` and one with it in ``T(x,y)-``.

    Each orbit representative stands for four pairs; flipping a sign of
    ``x`` or ``y`` negates both ``T(x,y)`` and ``A(x,y)``, which leaves the
    one-sided derivatives unchanged, so representatives suffice.
    ``plus_stat`` / ``minus_stat`` are the best derivative values found
    (``max rho_plus`` and ``min rho_minus``).
    """
    _same(T, A)
    M = attainment_set(T) if M is None else M
    plus = minus = None
    plus_stat, minus_stat = -math.inf, math.inf
    for x, y in M.representatives:
        z, a = T.apply(x, y), A.apply(x, y)
        r = rho(T.Z, z, a)
        if r.rho_plus > plus_stat:
            plus_stat, plus = r.rho_plus, (x, y)
        if r.rho_minus < minus_stat:
            minus_stat, minus = r.rho_minus, (x, y)
    holds = plus_stat >= -tol and minus_stat <= tol
    return {"holds": bool(holds), "plus_stat": float(plus_stat), "minus_stat": float(minus_stat),
            "plus_pair": None if plus is None else [plus[0].tolist(), plus[1].tolist()],
            "minus_pair": None if minus is None else [minus[0].tolist(), minus[1].tolist()],
            "orbits": M.count}


def is_operator_birkhoff(T: BilinearOp, A: BilinearOp, tol=1e-8, seed=0, restarts=16) -> OrthoVerdict:
    """``||T + t A|| >= ||T||`` for all real ``t``.

    The verdict is numeric (golden section over ``t`` on
    ``[-(2||T||/||A|| + 1), 2||T||/||A|| + 1]``); the witness also carries the
    attainment-set certificate under ``via_attainment`` for comparison.
    """
    _same(T, A)
    r = operator_birkhoff_batch(T.coeffs[None], A.coeffs[None], T.X, T.Y, T.Z, tol, seed, restarts)
    wit = {k: float(v[0]) for k, v in r.items() if k != "holds"}
    if float(np.max(np.abs(T.coeffs))) > 0:
        wit["via_attainment"] = attainment_certificate(T, A)
    return OrthoVerdict("operator_birkhoff", bool(r["holds"][0]), wit, tol)


def norming_sequence_conditions(T: BilinearOp, A: BilinearOp, samples=64, seed=0, tol=1e-8) -> dict:
    """Finite-dimensional form of the norming-sequence characterisation.

    Norming sequences accumulate on ``M_T``, so clause (a) asks for an
    attainment pair with ``||A(x, y)|| <= tol`` and clause (b) for the
    ``T(x,y)+`` / ``T(x,y)-`` pair memberships of :func:`attainment_certificate`.
    """
    _same(T, A)
    M = attainment_set(T, restarts=samples, seed=seed)
    a_min, a_pair = math.inf, None
    for x, y in M.representatives:
        na = float(_norm(T.Z, A.apply(x, y)))
        if na < a_min:
            a_min, a_pair = na, (x, y)
    clause_a = a_min <= tol
    cert = attainment_certificate(T, A, M)
    clause_b = cert["holds"]
    numeric = is_operator_birkhoff(T, A, seed=seed)
    certified = [c for c, ok in (("a", clause_a), ("b", clause_b)) if ok]
    return {"clause_a": bool(clause_a), "clause_b": bool(clause_b), "certified_by": certified,
            "min_A_on_M": a_min, "pair_a": [a_pair[0].tolist(), a_pair[1].tolist()],
            "certificate": cert, "numeric_holds": numeric.holds,
            "consistent": bool((clause_a or clause_b) == numeric.holds)}


def _smooth_point(space, z, tol=1e-10):
    # a convex function is differentiable once its partial derivatives exist
    for w in np.eye(space.dim):
        r = rho(space, z, w)
        if r.rho_plus - r.rho_minus > tol:
            return False
    return True


def is_operator_smooth(T: BilinearOp, seed=0) -> OrthoVerdict:
    """Single attainment orbit ``{(+-x0, +-y0)}`` and ``T(x0, y0)`` smooth in Z."""
    M = attainment_set(T, seed=seed)
    wit = {"orbits": M.count, "norm": M.norm}
    if M.count != 1:
        wit["diagnosis"] = f"attainment set has {M.count} orbits"
        return OrthoVerdict("operator_smooth", False, wit, M.tol)
    x0, y0 = M.representatives[0]
    z0 = T.apply(x0, y0)
    wit.update(x0=x0.tolist(), y0=y0.tolist(), z0=z0.tolist())
    if not _smooth_point(T.Z, z0):
        wit["diagnosis"] = "T(x0, y0) is not a smooth point of Z"
        return OrthoVerdict("operator_smooth", False, wit, M.tol)
    wit["diagnosis"] = "single orbit with smooth image"
    return OrthoVerdict("operator_smooth", True, wit, M.tol)


def _one_sided_min(Z, z, a, sign, eps_term, width=1e-12):
    nz, na = float(_norm(Z, z)), float(_norm(Z, a))
    if na <= 1e-13 * nz:  # rounding-level A(x, y) is an exact zero
        return 0.0, nz
    L = lambda_bracket(nz, na)
    lo, hi = (0.0, L) if sign > 0 else (-L, 0.0)

    def f(t):
        return np.sqrt(_norm(Z, z + t[:, None] * a) ** 2 + eps_term * np.abs(t))

    t, m = golden_section_batch(f, np.array([lo]), np.array([hi]), width=width)
    t, m = float(t[0]), float(m[0])
    return (0.0, nz) if m >= nz else (t, m)


def approx_certificate(T: BilinearOp, A: BilinearOp, eps, M: AttainmentSet = None,
                       norm_A=None, tol=1e-8) -> dict:
    """Two-pair test on ``M_T`` for ``T _|_B^eps A``.

    Needs a pair with ``||T(x,y) + t A(x,y)||^2 >= ||T||^2 - 2 eps t ||T|| ||A||``
    for all ``t >= 0`` and a pair with the same for ``t <= 0``.  Each side is a
    golden-section search; ``plus_gap`` / ``minus_gap`` are the smallest
    shortfalls ``||T|| - min`` over the representatives.  Clause (a) of the
    sequence form, ``||A(x,y)|| <= eps ||A||`` on ``M_T``, is reported too.
    """
    _same(T, A)
    M = attainment_set(T) if M is None else M
    NA = operator_norm(A)[0] if norm_A is None else norm_A
    gaps = {1: math.inf, -1: math.inf}
    a_min = math.inf
    for x, y in M.representatives:
        z, a = T.apply(x, y), A.apply(x, y)
        nz = float(_norm(T.Z, z))
        a_min = min(a_min, float(_norm(T.Z, a)))
        for s in (1, -1):
            _, m = _one_sided_min(T.Z, z, a, s, 2.0 * eps * nz * NA)
            gaps[s] = min(gaps[s], nz - m)
    holds = gaps[1] <= tol and gaps[-1] <= tol
    return {"holds": bool(holds), "plus_gap": float(gaps[1]), "minus_gap": float(gaps[-1]),
            "clause_a": bool(a_min <= eps * NA + tol), "min_A_on_M": a_min, "orbits": M.count}


def is_operator_approx_birkhoff(T: BilinearOp, A: BilinearOp, eps, tol=1e-8, seed=0,
                                restarts=16) -> OrthoVerdict:
    """``||T + t A||^2 >= ||T||^2 - 2 eps ||T|| ||t A||`` for all real ``t``.

    Numeric verdict plus the two-pair attainment certificate in the witness.
    """
    _same(T, A)
    r = operator_approx_batch(T.coeffs[None], A.coeffs[None], T.X, T.Y, T.Z, eps, tol, seed, restarts)
    wit = {k: float(v[0]) for k, v in r.items() if k != "holds"}
    wit["eps"] = float(eps)
    if float(np.max(np.abs(T.coeffs))) > 0:
        wit["certificate"] = approx_certificate(T, A, eps, norm_A=wit["norm_A"])
    return OrthoVerdict("operator_approx", bool(r["holds"][0]), wit, tol)
