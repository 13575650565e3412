"""One-sided Gateaux derivatives of the norm.

``rho_plus(x, y)``  = lim_{t -> 0+} (||x + t y|| - ||x||) / t
``rho_minus(x, y)`` = lim_{t -> 0-} (||x + t y|| - ||x||) / t

Two independent routes are provided: a shrinking-step limit that works
for any SpaceSpec, and closed forms for l_p, l_1 sums and max products.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InputError, NumericalError
from .spaces import LP, PRODMAX, SUM1, SpaceSpec, _check, _norm, norm_increment, sip_lp

__all__ = [
    "RhoResult",
    "SignConditions",
    "rho",
    "rho_numeric",
    "rho_closed",
    "rho_closed_rows",
    "rho_sign_conditions",
    "max_set",
    "support_mask",
    "MAX_RTOL",
    "ZERO_RTOL",
]

# |x_i| >= ||x|| (1 - MAX_RTOL) puts i in the max set of an l_inf vector
MAX_RTOL = 1e-11
# |x_i| > ZERO_RTOL ||x|| counts as a nonzero coordinate of an l_1 vector
ZERO_RTOL = 1e-12

_KS = np.arange(4, 49)
_STEPS = 2.0 ** -_KS
_SETTLE = 1e-10


@dataclass
class RhoResult:
    rho_plus: float
    rho_minus: float
    method: str
    step_trace: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"rho_plus": self.rho_plus, "rho_minus": self.rho_minus,
                "method": self.method,
                "step_trace": [[float(a), float(b)] for a, b in self.step_trace]}


@dataclass
class SignConditions:
    plus_nonneg: bool
    minus_nonpos: bool


def max_set(x) -> np.ndarray:
    """Boolean mask of the coordinates where ``|x_i|`` attains ``||x||_inf``."""
    a = np.abs(x)
    return a >= a.max() * (1 - MAX_RTOL)


def support_mask(x) -> np.ndarray:
    """Boolean mask of the nonzero coordinates of ``x`` (relative test)."""
    a = np.abs(x)
    return a > ZERO_RTOL * a.sum()


def _settled(q):
    # index of the first quotient that agrees with its predecessor
    tol = _SETTLE * max(1.0, float(np.max(np.abs(q[:2]))))
    hits = np.flatnonzero(np.abs(np.diff(q)) < tol)
    return None if hits.size == 0 else int(hits[0]) + 1


def rho_numeric(space: SpaceSpec, x, y) -> RhoResult:
    """Difference quotients at steps 2^-k, k = 4..48, until two agree.

    The final quotient is reported.  For ``x = 0`` the quotient is exactly
    ``|t| ||y|| / t`` so the result is ``(||y||, -||y||)``.
    """
    x, y = _check(space, x), _check(space, y)
    if not np.any(x):
        ny = float(_norm(space, y))
        return RhoResult(ny, -ny, "numeric", [])
    qp = norm_increment(space, x, y, _STEPS) / _STEPS
    qm = norm_increment(space, x, y, -_STEPS) / -_STEPS
    trace = []
    out = []
    for sgn, q in ((1.0, qp), (-1.0, qm)):
        j = _settled(q)
        stop = len(q) - 1 if j is None else j
        trace.extend((float(sgn * _STEPS[i]), float(q[i])) for i in range(stop + 1))
        if j is None:
            raise NumericalError(f"difference quotients did not settle by k = {_KS[-1]}", trace)
        out.append(float(q[j]))
    return RhoResult(out[0], out[1], "numeric", trace)


def _closed(space, x, y):
    # x is a single vector, y may carry leading batch axes
    if not np.any(x):
        ny = _norm(space, y)
        return ny, -ny
    if space.kind == LP:
        if space.is_smooth_lp:
            r = sip_lp(y, x, space.p) / float(_norm(space, x))
            return r, r
        if space.is_inf:
            m = max_set(x)
            s = (np.sign(x) * y)[..., m]
            return s.max(axis=-1), s.min(axis=-1)
        nz = support_mask(x)
        S = np.sum(np.sign(x[nz]) * y[..., nz], axis=-1)
        Z = np.sum(np.abs(y[..., ~nz]), axis=-1)
        return S + Z, S - Z
    (xa, xb), (ya, yb) = space.split(x), space.split(y)
    pa, ma = _closed(space.left, xa, ya)
    pb, mb = _closed(space.right, xb, yb)
    if space.kind == SUM1:
        return pa + pb, ma + mb
    na, nb = float(_norm(space.left, xa)), float(_norm(space.right, xb))
    top = max(na, nb)
    act = [c for c, nc in (((pa, ma), na), ((pb, mb), nb)) if nc >= top * (1 - MAX_RTOL)]
    return (np.max([c[0] for c in act], axis=0), np.min([c[1] for c in act], axis=0))


def rho_closed(space: SpaceSpec, x, y) -> RhoResult:
    """Closed-form one-sided derivatives.

    * smooth l_p: both equal ``[y, x] / ||x||`` with the compatible s.i.p.
    * l_inf: max / min of ``sign(x_i) y_i`` over the max set of ``x``
    * l_1: ``S +- Z`` with ``S = sum_{x_i != 0} sign(x_i) y_i`` and
      ``Z = sum_{x_i = 0} |y_i|``
    * l_1 sums add the children's values; max products take the max / min
      over the children attaining the norm.
    """
    x, y = _check(space, x), _check(space, y)
    if not np.any(x):
        raise DomainError("closed forms need x != 0; rho(0, y) = (||y||, -||y||)")
    if space.kind not in (LP, SUM1, PRODMAX):
        raise InputError(f"no closed form for {space}")
    if x.ndim != 1 or y.ndim != 1:
        raise InputError("rho_closed takes single vectors; see rho_closed_rows")
    p, m = _closed(space, x, y)
    return RhoResult(float(p), float(m), "closed")


def rho_closed_rows(space: SpaceSpec, x, Y):
    """Closed-form ``(rho_plus, rho_minus)`` arrays for one ``x`` and many directions."""
    x, Y = _check(space, x), _check(space, Y)
    if x.ndim != 1:
        raise InputError("rho_closed_rows takes a single base vector x")
    if not np.any(x):
        raise DomainError("closed forms need x != 0")
    if space.kind not in (LP, SUM1, PRODMAX):
        raise InputError(f"no closed form for {space}")
    p, m = _closed(space, x, Y)
    return np.asarray(p, dtype=float), np.asarray(m, dtype=float)


def rho(space: SpaceSpec, x, y) -> RhoResult:
    """Closed form where defined, the limit oracle otherwise (``x = 0``)."""
    x = _check(space, x)
    if not np.any(x):
        return rho_numeric(space, x, y)
    return rho_closed(space, x, y)


def rho_sign_conditions(space: SpaceSpec, x, y) -> SignConditions:
    """Coordinate conditions for ``rho_plus >= 0`` and ``rho_minus <= 0`` on l_p^n.

    smooth l_p:  ``sum y_i x_i |x_i|^(p-2)`` compared with 0
    l_inf:       some ``i`` in the max set with ``sign(x_i) y_i`` >= 0 (<= 0)
    l_1:         disjoint supports, or ``S + Z >= 0`` (``S - Z <= 0``)

    These are evaluated directly from the coordinates and do not go through
    :func:`rho_closed`.
    """
    x, y = _check(space, x), _check(space, y)
    if space.kind != LP:
        raise InputError("sign conditions are stated for l_p^n only")
    if not np.any(x):
        raise DomainError("sign conditions need x != 0")
    slack = 1e-12 * float(np.abs(y).max())
    if space.is_smooth_lp:
        u = x / np.abs(x).max()
        s = float(np.sum(y * np.sign(u) * np.abs(u) ** (space.p - 1)))
        return SignConditions(s >= -slack, s <= slack)
    if space.is_inf:
        m = max_set(x)
        s = np.sign(x[m]) * y[m]
        return SignConditions(bool(np.any(s >= -slack)), bool(np.any(s <= slack)))
    nz = support_mask(x)
    if not np.any(nz & (y != 0)):
        return SignConditions(True, True)
    S = float(np.sum(np.sign(x[nz]) * y[nz]))
    Z = float(np.sum(np.abs(y[~nz])))
    return SignConditions(S + Z >= -slack, S - Z <= slack)
