"""Adaptive Simpson quadrature."""

from __future__ import annotations

import math
from typing import Callable


def _simpson(fa, fm, fb, a, b):
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-10, max_depth: int = 50) -> float:
    """Integrate ``f`` over [a, b] to absolute tolerance ``tol``.

    Uses the usual Richardson-corrected split test |S2 - S| <= 15 tol and
    halves the tolerance at each level. ``b < a`` gives the negated integral.
    """
    if a == b:
        return 0.0
    if b < a:
        return -adaptive_simpson(f, b, a, tol, max_depth)
    fa, fb = float(f(a)), float(f(b))
    m = 0.5 * (a + b)
    fm = float(f(m))
    whole = _simpson(fa, fm, fb, a, b)
    # explicit stack instead of recursion: (a, b, fa, fm, fb, whole, tol, depth)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    total = 0.0
    while stack:
        a, b, fa, fm, fb, whole, tol, depth = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = float(f(lm)), float(f(rm))
        left = _simpson(fa, flm, fm, a, m)
        right = _simpson(fm, frm, fb, m, b)
        delta = left + right - whole
        if depth >= max_depth or abs(delta) <= 15.0 * tol:
            total += left + right + delta / 15.0
        else:
            stack.append((a, m, fa, flm, fm, left, 0.5 * tol, depth + 1))
            stack.append((m, b, fm, frm, fb, right, 0.5 * tol, depth + 1))
    if not math.isfinite(total):
        raise FloatingPointError("integrand produced a non-finite value")
    return total
