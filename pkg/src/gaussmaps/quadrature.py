"""Adaptive Gauss-Legendre quadrature along straight segments in the plane."""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

DEFAULT_ORDER = 8
DEFAULT_TOL = 1e-9
MAX_DEPTH = 40


@lru_cache(maxsize=None)
def _rule(order: int):
    x, w = leggauss(order)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def _fixed(func, a: complex, b: complex, order: int, arc: bool) -> complex:
    x, w = _rule(order)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    vals = np.asarray(func(mid + half * x))
    jac = abs(half) if arc else half
    return complex(np.sum(w * vals) * jac)


def integrate_segment(
    func: Callable,
    a: complex,
    b: complex,
    *,
    order: int = DEFAULT_ORDER,
    tol: float = DEFAULT_TOL,
    arc: bool = False,
) -> complex:
    """Integrate ``func`` along the segment from ``a`` to ``b``.

    With ``arc=False`` this is the complex line integral ``∫ f(z) dz``;
    with ``arc=True`` it is ``∫ f(z) |dz|``.  ``func`` must accept numpy
    arrays.  The segment is bisected until a panel and its two halves agree
    to ``tol * max(1, |I|)``.
    """
    a, b = complex(a), complex(b)
    if a == b:
        return 0j
    stack = [(a, b, _fixed(func, a, b, order, arc), 0)]
    total = 0j
    while stack:
        lo, hi, whole, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left = _fixed(func, lo, mid, order, arc)
        right = _fixed(func, mid, hi, order, arc)
        if abs(left + right - whole) <= tol * max(1.0, abs(whole)) or depth >= MAX_DEPTH:
            total += left + right
        else:
            stack.append((lo, mid, left, depth + 1))
            stack.append((mid, hi, right, depth + 1))
    return total


def integrate_polyline(
    func: Callable,
    points: Sequence[complex],
    *,
    order: int = DEFAULT_ORDER,
    tol: float = DEFAULT_TOL,
    arc: bool = False,
) -> complex:
    """Sum of :func:`integrate_segment` over consecutive point pairs."""
    pts = [complex(p) for p in points]
    return sum(
        (integrate_segment(func, p, q, order=order, tol=tol, arc=arc) for p, q in zip(pts, pts[1:])),
        0j,
    )
