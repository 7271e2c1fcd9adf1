"""Enumeration of minimal ramification tuples.

A nondecreasing integer tuple ``(ν_1, ..., ν_q)`` with every ``ν_j ≥ 2`` is
*admissible* for ``m`` when

* ``γ = Σ (1 - 1/ν_j) > m + 2``;
* (A) every proper sub-sum of the terms ``1 - 1/ν_j`` is at most ``m + 2``;
* (B) lowering any entries (down to 1 at the least) never keeps ``γ > m + 2``.

Lowering entries only decreases ``γ``, and the cheapest single step lowers
the largest entry, so (B) is equivalent to
``γ - 1/(ν_q (ν_q - 1)) ≤ m + 2``.  Likewise (A) reduces to dropping the
smallest term.  Entries equal to ∞ never satisfy (B), so they do not occur.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import floor

from .errors import PreconditionViolated, QOutOfRange


def _term(nu: int) -> Fraction:
    return 1 - Fraction(1, nu)


@dataclass(frozen=True)
class AdmissibilityCheck:
    gamma: Fraction
    exceeds: bool
    cond_a: bool
    cond_b: bool

    @property
    def admissible(self) -> bool:
        return self.exceeds and self.cond_a and self.cond_b


def check_tuple(nus, m: int) -> AdmissibilityCheck:
    """Evaluate the three admissibility conditions for one tuple."""
    nus = sorted(int(n) for n in nus)
    if not nus or nus[0] < 2:
        raise ValueError("entries must be integers ≥ 2")
    gam = sum((_term(n) for n in nus), Fraction(0))
    bound = m + 2
    cond_a = gam - _term(nus[0]) <= bound
    top = nus[-1]
    cond_b = gam - Fraction(1, top * (top - 1)) <= bound
    return AdmissibilityCheck(gam, gam > bound, cond_a, cond_b)


@dataclass(frozen=True)
class TupleEnumeration:
    m: int
    q: int
    tuples: tuple
    discrepancy: bool
    truncated: bool
    note: str

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "q": self.q,
            "count": len(self.tuples),
            "tuples": [list(t) for t in self.tuples],
            "discrepancy": self.discrepancy,
            "truncated": self.truncated,
            "note": self.note,
        }


def _max_next(d: Fraction, r: int) -> int:
    """Largest ``x ≥ 2`` with ``r/x + 1/(x(x-1)) ≥ d`` (0 if none)."""

    def ok(x: int) -> bool:
        return Fraction(r, x) + Fraction(1, x * (x - 1)) >= d

    if not ok(2):
        return 0
    lo = 2
    hi = max(3, int((r + 1) / d) + 2)
    while ok(hi):
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def enumerate_admissible_tuples(m: int, q: int, max_nu: int | None = None) -> TupleEnumeration:
    """All admissible nondecreasing tuples of length ``q`` for ``m``.

    The search is exhaustive: each next entry ``x`` is bounded because the
    remaining terms must supply the deficit ``D = γ_prefix + r - (m+2)``
    while (B) forces ``r/x + 1/(x(x-1)) ≥ D``.  The last entry is then
    determined uniquely as ``floor(1/D) + 1``.  With ``max_nu`` set, tuples
    containing a larger entry are dropped and ``truncated`` reports whether
    anything was dropped.
    """
    if int(m) != m or m < 1:
        raise PreconditionViolated("m must be an integer ≥ 1")
    if not 5 <= q <= 2 * m + 5:
        raise QOutOfRange(f"q = {q} outside 5 ≤ q ≤ {2 * m + 5}")
    bound = m + 2
    found: list[tuple] = []

    def search(prefix: list[int], s: Fraction):
        k = len(prefix)
        r = q - k
        lo = prefix[-1] if prefix else 2
        d = s + r - bound
        if d <= 0:
            return
        if r == 1:
            x = floor(1 / d) + 1
            if x < lo:
                return
            cand = (*prefix, x)
            if check_tuple(cand, m).admissible:
                found.append(cand)
            return
        hi = _max_next(d, r)
        for x in range(max(lo, 2), hi + 1):
            s2 = s + _term(x)
            # a proper prefix is a proper sub-sum, so (A) caps it
            if s2 > bound:
                break
            # the remaining terms are at least 1 - 1/x each, and (B) caps γ
            if s2 + (r - 1) * _term(x) > bound + Fraction(1, 2):
                break
            search(prefix + [x], s2)

    search([], Fraction(0))
    found.sort()
    truncated = False
    if max_nu is not None:
        kept = [t for t in found if t[-1] <= max_nu]
        truncated = len(kept) < len(found)
        found = kept
    all_two = (2,) * q
    discrepancy = q == 2 * m + 5 and all_two in found
    note = ""
    if discrepancy:
        note = (
            f"the all-2 tuple of length {q} has γ = m + 5/2 exactly; it meets the "
            "literal conditions, but a strict bound γ < m + 5/2 would exclude it"
        )
    return TupleEnumeration(m, q, tuple(found), discrepancy, truncated, note)
