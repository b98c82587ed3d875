"""Derivative-free 1-D maximization used by the likelihood fitters."""

from __future__ import annotations

import math

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(fn, lo: float, hi: float, tol: float,
                       max_iter: int = 300) -> float:
    """Argmax of a unimodal function on [lo, hi] to absolute tolerance tol.

    Strict concavity of the objectives in this package guarantees a unique
    interior or boundary maximum, which golden-section locates without
    derivatives.  Endpoints are compared against the interior optimum so a
    monotone objective returns the correct boundary.
    """
    if not lo < hi:
        raise ValueError("golden_section_max requires lo < hi")
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    it = 0
    while (b - a) > tol and it < max_iter:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = fn(d)
        it += 1
    x = 0.5 * (a + b)
    best = max(((fn(lo), lo), (fn(hi), hi), (fn(x), x)), key=lambda t: t[0])
    return best[1]
