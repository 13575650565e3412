"""Concrete finite-dimensional normed spaces.

Three kinds of space are supported:

* ``lp``      -- the sequence space l_p^n, 1 <= p <= inf
* ``sum1``    -- the l_1 direct sum ``X (+)_1 Y`` with ``||(x, y)|| = ||x|| + ||y||``
* ``prodmax`` -- the product ``X x Y`` with ``||(x, y)|| = max(||x||, ||y||)``

Composites nest freely.  Vectors are plain numpy arrays whose last axis
holds the coordinates (left child first); every evaluator broadcasts over
leading axes so that batches of vectors can be handled in one call.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from .errors import DomainError, InputError

__all__ = [
    "SpaceSpec",
    "Vector",
    "SpaceError",
    "lp",
    "sum1",
    "prodmax",
    "norm",
    "norm_increment",
    "dual_space",
    "dual_norm",
    "norming_vector",
    "sip_lp",
    "sphere_sample",
    "parse_space",
    "parse_vector",
    "space_to_json",
]

LP, SUM1, PRODMAX = "lp", "sum1", "prodmax"

# relative tolerance used to decide whether a candidate already attains a
# dual norm (keeps iterates still on flat faces)
_ATTAIN_RTOL = 1e-13


class SpaceError(InputError):
    """Malformed space description or a vector that does not belong to it."""


@dataclass(frozen=True)
class SpaceSpec:
    kind: str
    p: float = math.nan
    n: int = 0
    left: Optional["SpaceSpec"] = None
    right: Optional["SpaceSpec"] = None

    def __post_init__(self):
        if self.kind == LP:
            p = self.p
            if not (p == math.inf or (isinstance(p, (int, float)) and 1 <= p < math.inf)):
                raise SpaceError(f"exponent must lie in [1, inf], got {p!r}")
            if int(self.n) != self.n or self.n < 1:
                raise SpaceError(f"dimension must be a positive integer, got {self.n!r}")
        elif self.kind in (SUM1, PRODMAX):
            if not isinstance(self.left, SpaceSpec) or not isinstance(self.right, SpaceSpec):
                raise SpaceError(f"{self.kind} needs left and right child spaces")
        else:
            raise SpaceError(f"unknown space kind {self.kind!r}")

    @property
    def dim(self) -> int:
        if self.kind == LP:
            return int(self.n)
        return self.left.dim + self.right.dim

    @property
    def is_inf(self) -> bool:
        return self.kind == LP and self.p == math.inf

    @property
    def is_l1(self) -> bool:
        return self.kind == LP and self.p == 1

    @property
    def is_smooth_lp(self) -> bool:
        """True for l_p with 1 < p < inf (smooth and strictly convex)."""
        return self.kind == LP and 1 < self.p < math.inf

    @property
    def is_polyhedral(self) -> bool:
        if self.kind == LP:
            return self.p == 1 or self.p == math.inf
        return self.left.is_polyhedral and self.right.is_polyhedral

    def split(self, v):
        """Split the last axis of ``v`` into the left and right child parts."""
        k = self.left.dim
        return v[..., :k], v[..., k:]

    def __str__(self):
        if self.kind == LP:
            p = "inf" if self.is_inf else _fmt_p(self.p)
            return f"l{p}^{self.n}"
        op = "(+)1" if self.kind == SUM1 else "x"
        return f"({self.left} {op} {self.right})"


def _fmt_p(p):
    return str(int(p)) if float(p).is_integer() else repr(float(p))


def lp(p, n: int) -> SpaceSpec:
    if isinstance(p, str):
        if p.strip().lower() not in ("inf", "infinity", "oo"):
            raise SpaceError(f"bad exponent {p!r}")
        p = math.inf
    return SpaceSpec(LP, p=float(p), n=int(n))


def sum1(left: SpaceSpec, right: SpaceSpec) -> SpaceSpec:
    return SpaceSpec(SUM1, left=left, right=right)


def prodmax(left: SpaceSpec, right: SpaceSpec) -> SpaceSpec:
    return SpaceSpec(PRODMAX, left=left, right=right)


def conjugate_exponent(p: float) -> float:
    if p == 1:
        return math.inf
    if p == math.inf:
        return 1.0
    return p / (p - 1.0)


def _check(space: SpaceSpec, v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim == 0 or v.shape[-1] != space.dim:
        raise SpaceError(
            f"vector of shape {v.shape} does not belong to {space} (dimension {space.dim})")
    return v


# ---------------------------------------------------------------------------
# norms

def _lp_norm(v, p):
    a = np.abs(v)
    if p == 1:
        return a.sum(axis=-1)
    if p == math.inf:
        return a.max(axis=-1)
    if p == 2:
        return np.sqrt(np.sum(a * a, axis=-1))
    m = a.max(axis=-1, keepdims=True)
    safe = np.where(m > 0, m, 1.0)
    return m[..., 0] * np.sum((a / safe) ** p, axis=-1) ** (1.0 / p)


def _norm(space, v):
    if space.kind == LP:
        return _lp_norm(v, space.p)
    a, b = space.split(v)
    na, nb = _norm(space.left, a), _norm(space.right, b)
    return na + nb if space.kind == SUM1 else np.maximum(na, nb)


def norm(space: SpaceSpec, v):
    """Norm of ``v`` (or of each row of a batch)."""
    v = _check(space, v)
    out = _norm(space, v)
    return float(out) if out.ndim == 0 else out


def _abs_increment(a, h):
    # |a + h| - |a| without cancellation when the sign of a is kept
    keep = (a != 0) & (np.abs(h) <= np.abs(a))
    return np.where(keep, np.sign(a) * h, np.abs(a + h) - np.abs(a))


def _lp_increment(x, h, p):
    if p == 1:
        return _abs_increment(x, h).sum(axis=-1)
    if p == math.inf:
        ax = np.abs(x)
        top = ax.max(axis=-1, keepdims=True)
        return np.max(_abs_increment(x, h) + (ax - top), axis=-1)
    m = np.abs(x).max(axis=-1, keepdims=True)
    zero = m[..., 0] == 0
    scale = np.where(m > 0, m, 1.0)
    a, b = x / scale, h / scale
    aa = np.abs(a)
    keep = (a != 0) & (np.abs(b) < aa)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(keep, b / np.where(a != 0, a, 1.0), 0.0)
        stable = aa ** p * np.expm1(p * np.log1p(ratio))
    direct = np.abs(a + b) ** p - aa ** p
    dS = np.sum(np.where(keep, stable, direct), axis=-1)
    S0 = np.sum(aa ** p, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.log1p(np.maximum(dS / np.where(S0 > 0, S0, 1.0), -1.0)) / p
        inc = S0 ** (1.0 / p) * np.expm1(rel)
    inc = inc * m[..., 0]
    return np.where(zero, _lp_norm(h, p), inc)


def _increment(space, x, h):
    if space.kind == LP:
        return _lp_increment(x, h, space.p)
    (xa, xb), (ha, hb) = space.split(x), space.split(h)
    ia, ib = _increment(space.left, xa, ha), _increment(space.right, xb, hb)
    if space.kind == SUM1:
        return ia + ib
    na, nb = _norm(space.left, xa), _norm(space.right, xb)
    top = np.maximum(na, nb)
    return np.maximum(ia + (na - top), ib + (nb - top))


def norm_increment(space: SpaceSpec, x, y, lam):
    """``||x + lam*y|| - ||x||`` evaluated without catastrophic cancellation.

    ``lam`` may be an array; the result has its shape.  This is what keeps
    difference quotients of the norm usable down to steps of 1e-14.
    """
    x, y = _check(space, x), _check(space, y)
    lam = np.asarray(lam, dtype=float)
    xb, h = np.broadcast_arrays(x, lam[..., None] * y)
    out = _increment(space, xb, h)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# duality

def dual_space(space: SpaceSpec) -> SpaceSpec:
    """The dual space under the standard pairing ``sum f_i x_i``."""
    if space.kind == LP:
        return SpaceSpec(LP, p=conjugate_exponent(space.p), n=space.n)
    kind = PRODMAX if space.kind == SUM1 else SUM1
    return SpaceSpec(kind, left=dual_space(space.left), right=dual_space(space.right))


def dual_norm(space: SpaceSpec, f):
    """Norm of the functional ``f`` in the dual of ``space``."""
    return norm(dual_space(space), f)


def _lp_norming(h, p, current):
    a = np.abs(h)
    top = a.max(axis=-1, keepdims=True)
    if p == math.inf:
        free = a <= 1e-15 * top
        cur = np.zeros_like(h) if current is None else np.clip(current, -1.0, 1.0)
        v = np.where(free, cur, np.sign(h))
        return _fill_dead(v, top)
    if p == 1:
        k = np.argmax(a, axis=-1)[..., None]
        sgn = np.sign(np.take_along_axis(h, k, axis=-1))
        v = np.zeros_like(h)
        np.put_along_axis(v, k, np.where(sgn == 0, 1.0, sgn), axis=-1)
        return v
    q = conjugate_exponent(p)
    safe = np.where(top > 0, top, 1.0)
    w = np.sign(h) * (a / safe) ** (q - 1.0)
    nw = _lp_norm(w, p)[..., None]
    return _fill_dead(w / np.where(nw > 0, nw, 1.0), top)


def _fill_dead(v, top):
    # h == 0 entirely: any unit vector will do, take e_1
    e1 = np.zeros(v.shape[-1])
    e1[0] = 1.0
    return np.where(top == 0, e1, v)


def _norming(space, h, current):
    if space.kind == LP:
        return _lp_norming(h, space.p, current)
    ha, hb = space.split(h)
    ca, cb = (None, None) if current is None else space.split(current)
    va = _norming(space.left, ha, ca)
    vb = _norming(space.right, hb, cb)
    if space.kind == PRODMAX:
        return np.concatenate([va, vb], axis=-1)
    da = _norm(dual_space(space.left), ha)
    db = _norm(dual_space(space.right), hb)
    use_left = (da >= db)[..., None]
    return np.concatenate([np.where(use_left, va, 0.0), np.where(use_left, 0.0, vb)], axis=-1)


def norming_vector(space: SpaceSpec, h, current=None):
    """Unit vector ``v`` of ``space`` with ``h . v`` equal to the dual norm of ``h``.

    When ``current`` is given and already attains the dual norm it is
    returned unchanged; on flat faces free coordinates are taken from it.
    Applied in the dual space this yields supporting functionals.
    """
    h = _check(space, h)
    v = _norming(space, h, None if current is None else _check(space, current))
    if current is not None:
        current = np.broadcast_to(current, v.shape)
        dn = _norm(dual_space(space), h)
        ok = (np.sum(h * current, axis=-1) >= dn * (1 - _ATTAIN_RTOL)) & (
            np.abs(_norm(space, current) - 1.0) <= 1e-12)
        v = np.where(ok[..., None], current, v)
    return v


# ---------------------------------------------------------------------------
# semi-inner product

def sip_lp(x, y, p: float):
    """Semi-inner product ``[x, y]`` on smooth l_p compatible with its norm.

    ``[x, y] = ||y||^(2-p) * sum_i x_i y_i |y_i|^(p-2)``, with ``y_i |y_i|^(p-2)``
    written as ``sign(y_i) |y_i|^(p-1)`` so zero coordinates contribute 0.
    ``x`` may be a batch of rows (the map is linear in ``x``).
    """
    if p == math.inf or not 1 < p < math.inf:
        raise SpaceError(f"semi-inner product formula needs 1 < p < inf, got {p}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or x.shape[-1:] != y.shape:
        raise SpaceError(f"dimension mismatch {x.shape} vs {y.shape}")
    ny = float(_lp_norm(y, p))
    if ny == 0:
        raise DomainError("[x, 0] is undefined by the l_p formula")
    u = y / ny
    out = ny * np.sum(x * (np.sign(u) * np.abs(u) ** (p - 1.0)), axis=-1)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# sampling

def _raw_sample(space, rng, count):
    if space.kind != LP:
        return np.concatenate([_raw_sample(space.left, rng, count),
                               _raw_sample(space.right, rng, count)], axis=-1)
    n = space.n
    v = rng.standard_normal((count, n))
    snap = rng.random(count) < 0.25
    for r in np.flatnonzero(snap):
        if space.is_inf and n >= 2:
            k = rng.integers(2, n + 1)
            idx = rng.choice(n, size=k, replace=False)
            v[r, idx] = np.sign(v[r, idx]) * np.abs(v[r]).max()
        elif space.is_l1 and n >= 2:
            k = rng.integers(1, n)
            idx = rng.choice(n, size=k, replace=False)
            v[r, idx] = 0.0
    return v


def sphere_sample(space: SpaceSpec, seed, count: int) -> np.ndarray:
    """``count`` unit vectors of ``space`` as rows of an array.

    Gaussian directions normalised in the target norm; a quarter of the
    l_inf (l_1) leaves get tied maximal coordinates (zeroed coordinates) so
    that non-smooth sphere points show up with positive probability.
    """
    if int(count) < 1:
        raise SpaceError("count must be at least 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    v = _raw_sample(space, rng, int(count))
    nv = _norm(space, v)
    while np.any(nv == 0):
        bad = nv == 0
        v[bad] = rng.standard_normal((int(bad.sum()), space.dim))
        nv = _norm(space, v)
    return v / nv[:, None]


# ---------------------------------------------------------------------------
# JSON

@dataclass(frozen=True)
class Vector:
    space: SpaceSpec
    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", _check(self.space, self.coords).reshape(-1))

    def to_json(self) -> dict:
        return {"space": space_to_json(self.space), "v": [float(c) for c in self.coords]}


def space_to_json(space: SpaceSpec) -> dict:
    if space.kind == LP:
        p: Any = "inf" if space.is_inf else (int(space.p) if float(space.p).is_integer() else space.p)
        return {"kind": "lp", "p": p, "n": int(space.n)}
    return {"kind": space.kind, "left": space_to_json(space.left),
            "right": space_to_json(space.right)}


def parse_space(obj) -> SpaceSpec:
    """Build a SpaceSpec from JSON (dict or text) or the compact ``lp:<p>:<n>`` form."""
    if isinstance(obj, SpaceSpec):
        return obj
    if isinstance(obj, str):
        text = obj.strip()
        if text.startswith("lp:"):
            parts = text.split(":")
            if len(parts) != 3:
                raise SpaceError(f"compact space must be lp:<p>:<n>, got {text!r}")
            try:
                return lp(parts[1] if parts[1].lower().startswith("inf") else float(parts[1]),
                          int(parts[2]))
            except ValueError as exc:
                raise SpaceError(f"bad compact space {text!r}: {exc}") from None
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpaceError(f"space is neither JSON nor lp:<p>:<n>: {exc}") from None
    if not isinstance(obj, dict) or "kind" not in obj:
        raise SpaceError(f"space must be an object with a 'kind' field, got {obj!r}")
    kind = obj["kind"]
    if kind == LP:
        extra = set(obj) - {"kind", "p", "n"}
        if extra or "p" not in obj or "n" not in obj:
            raise SpaceError(f"lp space needs exactly 'p' and 'n', got {sorted(obj)}")
        p, n = obj["p"], obj["n"]
        if isinstance(p, bool) or not isinstance(p, (int, float, str)):
            raise SpaceError(f"bad exponent {p!r}")
        if isinstance(n, bool) or not isinstance(n, int):
            raise SpaceError(f"bad dimension {n!r}")
        return lp(p, n)
    if kind in (SUM1, PRODMAX):
        extra = set(obj) - {"kind", "left", "right"}
        if extra or "left" not in obj or "right" not in obj:
            raise SpaceError(f"{kind} space needs exactly 'left' and 'right'")
        return SpaceSpec(kind, left=parse_space(obj["left"]), right=parse_space(obj["right"]))
    raise SpaceError(f"unknown space kind {kind!r}")


def parse_vector(obj, space: Optional[SpaceSpec] = None) -> Vector:
    """Parse ``{"space": ..., "v": [...]}`` or a bare coordinate list (needs ``space``)."""
    if isinstance(obj, str):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise SpaceError(f"vector is not valid JSON: {exc}") from None
    if isinstance(obj, dict):
        if set(obj) != {"space", "v"}:
            raise SpaceError("vector literal needs exactly 'space' and 'v'")
        sp = parse_space(obj["space"])
        if space is not None and sp != space:
            raise SpaceError(f"vector lives in {sp}, expected {space}")
        space, coords = sp, obj["v"]
    else:
        coords = obj
    if space is None:
        raise SpaceError("a bare coordinate list needs an explicit space")
    if not isinstance(coords, list) or not all(
            isinstance(c, (int, float)) and not isinstance(c, bool) for c in coords):
        raise SpaceError("coordinates must be a list of numbers")
    return Vector(space, np.array(coords, dtype=float))
