"""Independent reference computations used by the tests.

None of these call the quantity they check: curvature comes from a finite
difference Laplacian of log λ, completeness from numeric path lengths, and
admissible tuples from a plain nested scan.
"""

from __future__ import annotations

import warnings
from fractions import Fraction

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from gaussmaps.mero import is_inf
from gaussmaps.metric import MetricSpec, conformal_factor


def fd_curvature(spec: MetricSpec, z: complex, h: float = 1e-3) -> float:
    """``-(Δ log λ)/λ²`` with a fourth-order central difference Laplacian."""

    def loglam(w):
        return np.log(conformal_factor(spec, np.asarray(w, dtype=complex)))

    c = loglam(z)
    offs = np.array([h, -h, 1j * h, -1j * h, 2 * h, -2 * h, 2j * h, -2j * h])
    v = loglam(z + offs)
    near = v[:4].sum()
    far = v[4:].sum()
    lap = (16 * near - far - 60 * c) / (12 * h * h)
    return float(-lap / float(conformal_factor(spec, z)) ** 2)


def numeric_length_to(spec: MetricSpec, start: complex, target, stop: float = 1e-6) -> float:
    """Length of the straight ray from ``start`` toward ``target``.

    For a finite target the ray stops at Euclidean distance ``stop``; for
    ``∞`` it runs out to radius ``1/stop``.  Integrated in a logarithmic
    parameter so that both ends are resolved.
    """
    if target is None or is_inf(target):
        d = start / abs(start)
        r0 = abs(start)

        def integrand(s):
            r = r0 * np.exp(s)
            return float(conformal_factor(spec, d * r)) * r

        upper = np.log(1 / stop / r0)
    else:
        d = start - target
        r0 = abs(d)
        d = d / r0

        def integrand(s):
            r = r0 * np.exp(-s)
            return float(conformal_factor(spec, target + d * r)) * r

        upper = np.log(r0 / stop)
    edges = np.linspace(0, upper, 81)
    with warnings.catch_warnings():
        # divergent rays exhaust the subdivision budget by design
        warnings.simplefilter("ignore", IntegrationWarning)
        return float(sum(quad(integrand, a, b, limit=500)[0] for a, b in zip(edges[:-1], edges[1:])))


def ray_start(spec: MetricSpec, target, offset: float = 0.3) -> complex:
    """A start point for a ray into ``target`` that stays clear of the other
    punctures."""
    others = [complex(p) for p in spec.domain_punctures if not is_inf(p) and not (not is_inf(target) and p == target)]
    best, best_gap = None, -1.0
    for theta in np.linspace(0, 2 * np.pi, 24, endpoint=False):
        d = np.exp(1j * theta)
        if is_inf(target):
            pts = 2.0 * (1 + max([abs(p) for p in others], default=0)) * d * np.linspace(1, 50, 200)
        else:
            pts = complex(target) + offset * d * np.linspace(0, 1, 200)[1:]
        gap = min((np.min(np.abs(pts - p)) for p in others), default=np.inf)
        if gap > best_gap:
            best, best_gap = pts[0] if is_inf(target) else complex(target) + offset * d, gap
    return complex(best)


def numeric_divergence(spec: MetricSpec, start: complex, target, decades: int = 10) -> tuple[bool, list]:
    """Decide numerically whether the ray from ``start`` to ``target`` has
    infinite length.

    Lengths are measured out to Euclidean distance ``10^-k`` (or radius
    ``10^k`` for ``∞``) for ``k = 1..decades``.  The ray diverges when the
    length passes 1e3, or when the per-decade increments stop shrinking,
    which catches logarithmic growth that 1e3 would need hundreds of
    decades to reveal.  A convergent ray has geometrically shrinking
    increments.
    """
    lengths = [numeric_length_to(spec, start, target, 10.0 ** -k) for k in range(1, decades + 1)]
    if lengths[-1] > 1e3:
        return True, lengths
    inc = np.diff(lengths)
    tail = inc[-4:]
    return bool(np.all(tail > 0) and tail[-1] >= 0.9 * tail[0]), lengths


def brute_force_tuples(m: int, q: int, cap: int = 50) -> list[tuple]:
    """Admissible nondecreasing tuples with entries in ``2..cap`` by direct scan.

    Pruning uses only the definition and the ordering: terms grow along the
    tuple, so a prefix bounds the smallest and largest possible ``γ``, and
    dropping the first term must leave at most ``m + 2``.  The last entry is
    scanned over its whole range with a float prefilter, and every survivor
    is checked exactly.
    """
    bound = m + 2
    slack = 1e-9
    xs = np.arange(2, cap + 1)
    fterm = 1.0 - 1.0 / xs
    fprev = 1.0 - 1.0 / (xs - 1)
    top = 1.0 - 1.0 / cap
    out = []

    def term(n):
        return 1 - Fraction(1, n)

    def exact(t):
        gam = sum(term(n) for n in t)
        return (
            gam > bound
            and all(gam - term(n) <= bound for n in t)
            and all(gam - term(n) + term(n - 1) <= bound for n in set(t))
        )

    def last(prefix, s):
        gam = s + fterm
        ok = (gam > bound - slack) & (xs >= prefix[-1])
        ok &= gam - fterm <= bound + slack
        ok &= gam - (1.0 - 1.0 / prefix[0]) <= bound + slack
        ok &= gam - fterm + fprev <= bound + slack
        for x in xs[ok]:
            t = (*prefix, int(x))
            if exact(t):
                out.append(t)

    def scan(prefix, s):
        if len(prefix) == q - 1:
            last(prefix, s)
            return
        r = q - len(prefix) - 1
        for n in range(prefix[-1] if prefix else 2, cap + 1):
            t = 1.0 - 1.0 / n
            s2 = s + t
            first = prefix[0] if prefix else n
            # the smallest completion already breaks the drop-one condition
            if s2 + r * t - (1.0 - 1.0 / first) > bound + slack:
                break
            # even the largest completion cannot push γ past the bound
            if s2 + r * top <= bound - slack:
                continue
            scan(prefix + [n], s2)

    scan([], 0.0)
    return sorted(out)
