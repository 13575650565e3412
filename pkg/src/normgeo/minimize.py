"""Golden-section search for convex functions of one real variable."""

from __future__ import annotations

import math

import numpy as np

INV_PHI = (math.sqrt(5) - 1) / 2  # 1 / phi
INV_PHI2 = (3 - math.sqrt(5)) / 2  # 1 / phi^2


def golden_section(f, a, b, width=1e-12):
    """Minimise a convex ``f`` on ``[a, b]``.

    The bracket is shrunk until it is narrower than ``width`` (or stops
    shrinking in floating point).  Returns ``(t, f(t))`` for the best point
    evaluated, endpoints included, so flat minima are reported exactly.
    """
    a, b = min(a, b), max(a, b)
    best_t, best_v = a, f(a)
    vb = f(b)
    if vb < best_v:
        best_t, best_v = b, vb

    h = b - a
    c, d = a + INV_PHI2 * h, a + INV_PHI * h
    fc, fd = f(c), f(d)
    while h > width:
        if fc < fd:
            b, d, fd = d, c, fc
            h = b - a
            c = a + INV_PHI2 * h
            if not a < c < d:
                break
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + INV_PHI * h
            if not c < d < b:
                break
            fd = f(d)
        for t, v in ((c, fc), (d, fd)):
            if v < best_v:
                best_t, best_v = t, v
    m = 0.5 * (a + b)
    fm = f(m)
    if fm < best_v:
        best_t, best_v = m, fm
    return best_t, best_v


def golden_section_batch(f, a, b, width=1e-12, max_iter=200):
    """Vectorised :func:`golden_section` over independent brackets.

    ``f`` maps an array of points (one per bracket) to an array of values.
    Every bracket is run for the iteration count the widest one needs.
    """
    a = np.asarray(a, dtype=float).copy()
    b = np.asarray(b, dtype=float).copy()
    a, b = np.minimum(a, b), np.maximum(a, b)
    fa, fb = f(a), f(b)
    best_t = np.where(fb < fa, b, a)
    best_v = np.minimum(fa, fb)

    h = b - a
    c, d = a + INV_PHI2 * h, a + INV_PHI * h
    fc, fd = f(c), f(d)
    hmax = float(h.max()) if h.size else 0.0
    n = 0 if hmax <= width else min(max_iter, int(math.ceil(math.log(width / hmax) / math.log(INV_PHI))))
    for _ in range(n):
        left = fc < fd
        a = np.where(left, a, c)
        b = np.where(left, d, b)
        h = b - a
        nc = np.where(left, a + INV_PHI2 * h, d)
        nd = np.where(left, c, a + INV_PHI * h)
        fnc = np.where(left, 0.0, fd)
        fnd = np.where(left, fc, 0.0)
        probe = np.where(left, nc, nd)
        fp = f(probe)
        fc = np.where(left, fp, fnc)
        fd = np.where(left, fnd, fp)
        c, d = nc, nd
        better = fp < best_v
        best_t = np.where(better, probe, best_t)
        best_v = np.where(better, fp, best_v)
    m = 0.5 * (a + b)
    fm = f(m)
    better = fm < best_v
    return np.where(better, m, best_t), np.where(better, fm, best_v)
