"""Rational meromorphic functions on the Riemann sphere.

A :class:`MeroExpr` is a quotient of two complex polynomials kept in reduced
form (no common roots, monic denominator).  Coefficients are stored in
ascending degree order, matching :mod:`numpy.polynomial.polynomial`.

Points of the sphere are plain Python complex numbers, or the singleton
:data:`INF`.

Numerical conventions
---------------------
* Polynomial roots come from companion-matrix eigenvalues followed by one
  Newton polish step.  Degrees above :data:`DEGREE_CAP` are rejected.
* Roots closer than ``CLUSTER_TOL * max(1, |r|)`` are merged into a single
  root of higher multiplicity.  A k-fold root perturbed by rounding spreads
  to roughly ``eps**(1/k)``, so this keeps multiplicities up to about 4
  intact while merging genuinely distinct roots only when they are closer
  than the tolerance.
* Common factors are cancelled when the numerator, normalized to be monic,
  vanishes at a denominator root to within ``GCD_TOL`` (relative).
"""

from __future__ import annotations

import cmath
import math
from numbers import Number
from typing import Iterable, Union

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import (
    DegreeCapExceeded,
    NonUnitVector,
    RootFindingFailed,
    SingularMatrix,
)

DEGREE_CAP = 64
GCD_TOL = 1e-10
CLUSTER_TOL = 1e-4
TRIM_TOL = 1e-14


class _Infinity:
    """The point at infinity of the Riemann sphere."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()
SpherePoint = Union[complex, _Infinity]


def is_inf(p) -> bool:
    """True for :data:`INF` and for non-finite complex numbers."""
    if p is INF:
        return True
    return not cmath.isfinite(complex(p))


def as_point(p) -> SpherePoint:
    """Normalize a number (or INF / non-finite number) to a sphere point."""
    if is_inf(p):
        return INF
    return complex(p)


# ---------------------------------------------------------------------------
# polynomial helpers (ascending coefficients)


def _as_coeffs(c) -> np.ndarray:
    if isinstance(c, Number):
        c = [c]
    arr = np.atleast_1d(np.asarray(c, dtype=complex)).copy()
    if arr.ndim != 1:
        raise ValueError("coefficients must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise ValueError("coefficients must be finite")
    return _trim(arr)


def _trim(c: np.ndarray) -> np.ndarray:
    if c.size == 0:
        return np.zeros(1, dtype=complex)
    scale = np.max(np.abs(c))
    if scale == 0:
        return np.zeros(1, dtype=complex)
    keep = np.nonzero(np.abs(c) > TRIM_TOL * scale)[0]
    out = c[: keep[-1] + 1].copy()
    # tiny low-order coefficients are rounding residue
    out[np.abs(out) <= TRIM_TOL * scale] = 0
    return out


def _degree(c: np.ndarray) -> int:
    return len(c) - 1


def _is_zero_poly(c: np.ndarray) -> bool:
    return len(c) == 1 and c[0] == 0


def _polyval(c: np.ndarray, z):
    return P.polyval(z, c)


def _deflate(c: np.ndarray, p: complex) -> np.ndarray:
    """Quotient of ``c`` by ``(z - p)``; the remainder is dropped."""
    n = _degree(c)
    if n < 1:
        return c.copy()
    q = np.zeros(n, dtype=complex)
    q[n - 1] = c[n]
    for k in range(n - 1, 0, -1):
        q[k - 1] = c[k] + p * q[k]
    return q


def _vanishes_at(c: np.ndarray, p: complex, tol: float = GCD_TOL) -> bool:
    if _degree(c) < 1:
        return False
    monic = c / c[-1]
    r = max(1.0, abs(p))
    scale = float(np.sum(np.abs(monic) * r ** np.arange(len(monic))))
    return abs(_polyval(monic, p)) <= tol * scale


def _root_order(c: np.ndarray, p: complex, limit: int | None = None) -> int:
    """How many times ``(z - p)`` divides ``c`` (numerically)."""
    k = 0
    cur = c
    while _vanishes_at(cur, p) and (limit is None or k < limit):
        cur = _deflate(cur, p)
        k += 1
    return k


def poly_roots(c, cap: int = DEGREE_CAP) -> np.ndarray:
    """All roots of an ascending-coefficient polynomial, with multiplicity.

    Companion-matrix eigenvalues, then one Newton step per root, kept only
    when it lowers the residual.  Exact zero roots are factored out first.
    """
    c = _as_coeffs(c)
    n = _degree(c)
    if _is_zero_poly(c):
        raise ValueError("the zero polynomial has no isolated roots")
    if n > cap:
        raise DegreeCapExceeded(f"degree {n} exceeds cap {cap}")
    if n == 0:
        return np.zeros(0, dtype=complex)
    nz = int(np.argmax(c != 0))
    zeros = np.zeros(nz, dtype=complex)
    c = c[nz:]
    n = _degree(c)
    if n == 0:
        return zeros
    monic = c / c[-1]
    comp = np.zeros((n, n), dtype=complex)
    comp[1:, :-1] = np.eye(n - 1)
    comp[:, -1] = -monic[:-1]
    try:
        roots = np.linalg.eigvals(comp)
    except np.linalg.LinAlgError as exc:
        raise RootFindingFailed(str(exc)) from exc
    if not np.all(np.isfinite(roots)):
        raise RootFindingFailed("companion eigenvalues are not finite")
    dc = P.polyder(monic)
    val = _polyval(monic, roots)
    dval = _polyval(dc, roots)
    with np.errstate(divide="ignore", invalid="ignore"):
        polished = roots - val / dval
    ok = np.isfinite(polished)
    better = np.zeros_like(ok)
    better[ok] = np.abs(_polyval(monic, polished[ok])) < np.abs(val[ok])
    roots = np.where(better, polished, roots)
    return np.concatenate([zeros, roots])


def cluster_roots(roots: Iterable[complex], tol: float = CLUSTER_TOL):
    """Group nearby roots; returns ``[(center, multiplicity), ...]``."""
    roots = list(roots)
    groups: list[list[complex]] = []
    for r in roots:
        placed = None
        for g in groups:
            if any(abs(r - s) <= tol * max(1.0, abs(s)) for s in g):
                if placed is None:
                    g.append(r)
                    placed = g
                else:
                    placed.extend(g)
                    g.clear()
        groups = [g for g in groups if g]
        if placed is None:
            groups.append([r])
    out = []
    for g in groups:
        center = complex(np.mean(g))
        # snap rounding noise on exact real/imaginary parts
        if abs(center.imag) <= 1e-13 * max(1.0, abs(center)):
            center = complex(center.real, 0.0)
        if abs(center.real) <= 1e-13 * max(1.0, abs(center)):
            center = complex(0.0, center.imag)
        out.append((center, len(g)))
    out.sort(key=lambda t: (t[0].real, t[0].imag))
    return out


def _reduce(num: np.ndarray, den: np.ndarray):
    if _is_zero_poly(den):
        raise ZeroDivisionError("denominator is the zero polynomial")
    if _is_zero_poly(num):
        return np.zeros(1, dtype=complex), np.ones(1, dtype=complex)
    if _degree(den) >= 1 and _degree(num) >= 1:
        for center, k in cluster_roots(poly_roots(den)):
            j = _root_order(num, center, limit=k)
            for _ in range(j):
                num = _trim(_deflate(num, center))
                den = _trim(_deflate(den, center))
            if _degree(num) < 1 or _degree(den) < 1:
                break
    lead = den[-1]
    return _trim(num / lead), _trim(den / lead)


# ---------------------------------------------------------------------------


class MeroExpr:
    """Rational function ``num(z) / den(z)`` in reduced form.

    Instances are immutable.  Arithmetic with numbers or other
    ``MeroExpr`` objects returns new reduced instances.

    >>> z = MeroExpr.identity()
    >>> f = z / (z - 2)
    >>> f.at(2)
    INF
    """

    __slots__ = ("_num", "_den")

    def __init__(self, num, den=(1.0,), *, reduce: bool = True):
        num = _as_coeffs(num)
        den = _as_coeffs(den)
        if reduce:
            num, den = _reduce(num, den)
        elif _is_zero_poly(den):
            raise ZeroDivisionError("denominator is the zero polynomial")
        num.flags.writeable = False
        den.flags.writeable = False
        object.__setattr__(self, "_num", num)
        object.__setattr__(self, "_den", den)

    def __setattr__(self, name, value):
        raise AttributeError("MeroExpr is immutable")

    # construction ---------------------------------------------------------
    @classmethod
    def constant(cls, c) -> "MeroExpr":
        return cls([c])

    @classmethod
    def identity(cls) -> "MeroExpr":
        return cls([0, 1])

    @classmethod
    def coerce(cls, x) -> "MeroExpr":
        if isinstance(x, MeroExpr):
            return x
        if isinstance(x, Number):
            return cls.constant(x)
        raise TypeError(f"cannot interpret {x!r} as a rational function")

    # structure -------------------------------------------------------------
    @property
    def num(self) -> np.ndarray:
        return self._num

    @property
    def den(self) -> np.ndarray:
        return self._den

    @property
    def deg_num(self) -> int:
        return -1 if self.is_zero else _degree(self._num)

    @property
    def deg_den(self) -> int:
        return _degree(self._den)

    @property
    def degree(self) -> int:
        """Degree as a map of the sphere, ``max(deg num, deg den)``."""
        return max(self.deg_num, self.deg_den, 0)

    @property
    def is_zero(self) -> bool:
        return _is_zero_poly(self._num)

    @property
    def is_constant(self) -> bool:
        return _degree(self._num) == 0 and _degree(self._den) == 0

    @property
    def is_polynomial(self) -> bool:
        return _degree(self._den) == 0

    # evaluation ------------------------------------------------------------
    def __call__(self, z):
        """Vectorized evaluation; poles evaluate to ``inf + 0j``."""
        z = np.asarray(z, dtype=complex)
        n = _polyval(self._num, z)
        d = _polyval(self._den, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = n / d
        pole = d == 0
        if np.any(pole):
            out = np.where(pole, complex(np.inf, 0.0), out)
        if out.ndim == 0:
            return complex(out)
        return out

    def at(self, p) -> SpherePoint:
        """Value at a sphere point, with ``INF`` for poles."""
        if is_inf(p):
            dn, dd = self.deg_num, self.deg_den
            if self.is_zero or dn < dd:
                return 0j
            if dn > dd:
                return INF
            return complex(self._num[-1] / self._den[-1])
        p = complex(p)
        d = _polyval(self._den, p)
        if d == 0:
            return INF
        return complex(_polyval(self._num, p) / d)

    def order_at(self, p) -> int:
        """Signed order at ``p``: zero order if positive, minus pole order."""
        if self.is_zero:
            raise ValueError("order of the zero function is undefined")
        if is_inf(p):
            return self.deg_den - self.deg_num
        p = complex(p)
        return _root_order(self._num, p) - _root_order(self._den, p)

    # calculus ----------------------------------------------------------------
    def derivative(self) -> "MeroExpr":
        n, d = self._num, self._den
        top = P.polysub(P.polymul(P.polyder(n), d), P.polymul(n, P.polyder(d)))
        return MeroExpr(top, P.polymul(d, d))

    def antiderivative(self) -> "MeroExpr":
        """Polynomial antiderivative vanishing at 0 (polynomials only)."""
        if not self.is_polynomial:
            raise ValueError("antiderivative is only provided for polynomials")
        return MeroExpr(P.polyint(self._num / self._den[0]))

    def zeros_and_poles(self, cap: int = DEGREE_CAP):
        """Zeros (positive multiplicity) and poles (negative) on the sphere.

        The point at infinity is included whenever its order is nonzero, so
        the multiplicities always sum to zero.
        """
        if self.is_zero:
            raise ValueError("the zero function has no isolated zeros")
        if max(self.deg_num, self.deg_den) > cap:
            raise DegreeCapExceeded(
                f"degree {max(self.deg_num, self.deg_den)} exceeds cap {cap}"
            )
        out: list[tuple[SpherePoint, int]] = []
        if self.deg_num > 0:
            out += [(c, k) for c, k in cluster_roots(poly_roots(self._num, cap))]
        if self.deg_den > 0:
            out += [(c, -k) for c, k in cluster_roots(poly_roots(self._den, cap))]
        k_inf = self.deg_den - self.deg_num
        if k_inf:
            out.append((INF, k_inf))
        return out

    def preimage(self, alpha) -> list[tuple[SpherePoint, int]]:
        """Solutions of ``f = alpha`` on the sphere, with multiplicity."""
        if self.is_constant:
            raise ValueError("preimages of a constant function are not isolated")
        if is_inf(alpha):
            return [(p, -k) for p, k in self.zeros_and_poles() if k < 0]
        shifted = self - complex(alpha)
        return [(p, k) for p, k in shifted.zeros_and_poles() if k > 0]

    # arithmetic ----------------------------------------------------------------
    def __neg__(self):
        return MeroExpr(-self._num, self._den, reduce=False)

    def __pos__(self):
        return self

    def __add__(self, other):
        try:
            other = MeroExpr.coerce(other)
        except TypeError:
            return NotImplemented
        if self._den.shape == other._den.shape and np.array_equal(self._den, other._den):
            return MeroExpr(P.polyadd(self._num, other._num), self._den)
        num = P.polyadd(P.polymul(self._num, other._den), P.polymul(other._num, self._den))
        return MeroExpr(num, P.polymul(self._den, other._den))

    __radd__ = __add__

    def __sub__(self, other):
        try:
            other = MeroExpr.coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        try:
            other = MeroExpr.coerce(other)
        except TypeError:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        try:
            other = MeroExpr.coerce(other)
        except TypeError:
            return NotImplemented
        return MeroExpr(P.polymul(self._num, other._num), P.polymul(self._den, other._den))

    __rmul__ = __mul__

    def reciprocal(self) -> "MeroExpr":
        if self.is_zero:
            raise ZeroDivisionError("reciprocal of the zero function")
        return MeroExpr(self._den, self._num)

    def __truediv__(self, other):
        try:
            other = MeroExpr.coerce(other)
        except TypeError:
            return NotImplemented
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        try:
            other = MeroExpr.coerce(other)
        except TypeError:
            return NotImplemented
        return other * self.reciprocal()

    def __pow__(self, k):
        if not isinstance(k, (int, np.integer)):
            return NotImplemented
        k = int(k)
        base = self if k >= 0 else self.reciprocal()
        num = P.polypow(base._num, abs(k)) if abs(k) else np.ones(1)
        den = P.polypow(base._den, abs(k)) if abs(k) else np.ones(1)
        # powers of a reduced quotient stay reduced
        return MeroExpr(num, den, reduce=False)._normalized()

    def _normalized(self) -> "MeroExpr":
        lead = self._den[-1]
        return MeroExpr(self._num / lead, self._den / lead, reduce=False)

    # comparison -----------------------------------------------------------------
    def is_close(self, other, tol: float = 1e-9) -> bool:
        other = MeroExpr.coerce(other)
        if self.deg_num != other.deg_num or self.deg_den != other.deg_den:
            return False
        scale = max(1.0, float(np.max(np.abs(self._num))))
        return bool(
            np.allclose(self._num, other._num, rtol=0, atol=tol * scale)
            and np.allclose(self._den, other._den, rtol=0, atol=tol)
        )

    def __eq__(self, other):
        if not isinstance(other, MeroExpr):
            if isinstance(other, Number):
                other = MeroExpr.constant(other)
            else:
                return NotImplemented
        return (
            np.array_equal(self._num, other._num)
            and np.array_equal(self._den, other._den)
        )

    def __hash__(self):
        return hash((tuple(self._num), tuple(self._den)))

    # text --------------------------------------------------------------------------
    def to_text(self) -> str:
        """Infix text accepted by :func:`gaussmaps.parsing.parse_expr`."""
        num = _poly_text(self._num)
        if self.is_polynomial and self._den[0] == 1:
            return num
        den = _poly_text(self._den)
        if len(self._num) == 1 and "+" not in num and " - " not in num:
            return f"{num}/({den})"
        return f"({num})/({den})"

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"MeroExpr({self.to_text()!r})"


def _real_text(x: float) -> str:
    return str(int(x)) if x.is_integer() and abs(x) < 1e15 else repr(x)


def _coef_text(c: complex) -> str:
    c = complex(c)
    if c.imag == 0:
        return _real_text(c.real)
    if c.real == 0:
        return f"{_real_text(c.imag)}i"
    sign = "+" if c.imag >= 0 else "-"
    return f"({_real_text(c.real)}{sign}{_real_text(abs(c.imag))}i)"


def _poly_text(c: np.ndarray) -> str:
    terms = []
    for k in range(len(c) - 1, -1, -1):
        a = c[k]
        if a == 0 and len(c) > 1:
            continue
        coef = _coef_text(a)
        power = "" if k == 0 else ("z" if k == 1 else f"z^{k}")
        if not power:
            terms.append(coef)
        elif coef == "1":
            terms.append(power)
        elif coef == "-1":
            terms.append(f"-{power}")
        else:
            terms.append(f"{coef}*{power}")
    return (" + ".join(terms) if terms else "0").replace("+ -", "- ")


Z = MeroExpr.identity()


# ---------------------------------------------------------------------------
# sphere geometry


def chordal(a, b):
    """Normalized chordal distance ``|a, b|`` in ``[0, 1]``.

    Accepts sphere points or numpy arrays (non-finite entries are treated as
    the point at infinity).  Equals half the Euclidean chord between the
    stereographic preimages.
    """
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        return _chordal_array(a, b)
    a_inf, b_inf = is_inf(a), is_inf(b)
    if a_inf and b_inf:
        return 0.0
    if a_inf:
        return 1.0 / math.sqrt(1.0 + abs(complex(b)) ** 2)
    if b_inf:
        return 1.0 / math.sqrt(1.0 + abs(complex(a)) ** 2)
    a, b = complex(a), complex(b)
    return abs(a - b) / (math.sqrt(1.0 + abs(a) ** 2) * math.sqrt(1.0 + abs(b) ** 2))


def _chordal_array(a, b):
    if a is INF:
        a = complex(np.inf, 0)
    if b is INF:
        b = complex(np.inf, 0)
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    a, b = np.broadcast_arrays(a, b)
    ai = ~np.isfinite(a)
    bi = ~np.isfinite(b)
    af = np.where(ai, 0, a)
    bf = np.where(bi, 0, b)
    sa = np.sqrt(1 + np.abs(af) ** 2)
    sb = np.sqrt(1 + np.abs(bf) ** 2)
    out = np.abs(af - bf) / (sa * sb)
    out = np.where(ai & ~bi, 1 / sb, out)
    out = np.where(bi & ~ai, 1 / sa, out)
    out = np.where(ai & bi, 0.0, out)
    return out


def stereographic(p) -> SpherePoint:
    """Project a unit 3-vector from the north pole ``(0, 0, 1)``."""
    p = np.asarray(p, dtype=float)
    if p.shape != (3,):
        raise NonUnitVector("expected a 3-vector")
    if abs(np.linalg.norm(p) - 1.0) > 1e-12:
        raise NonUnitVector(f"|p| = {np.linalg.norm(p)!r} is not 1")
    x, y, z = p
    if 1.0 - z <= 1e-15:
        return INF
    return complex(x, y) / (1.0 - z)


def inverse_stereographic(w) -> np.ndarray:
    """Unit 3-vector whose stereographic projection is ``w``."""
    if is_inf(w):
        return np.array([0.0, 0.0, 1.0])
    w = complex(w)
    s = abs(w) ** 2
    return np.array([2 * w.real, 2 * w.imag, s - 1.0]) / (s + 1.0)


def _check_matrix(matrix) -> np.ndarray:
    m = np.asarray(matrix, dtype=complex)
    if m.shape != (2, 2):
        raise SingularMatrix("expected a 2x2 matrix")
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if abs(det) <= 1e-14 * max(1.0, float(np.max(np.abs(m)))) ** 2:
        raise SingularMatrix("determinant vanishes")
    return m


def mobius(f: MeroExpr, matrix) -> MeroExpr:
    """Compose ``f`` with ``w -> (a w + b) / (c w + d)``."""
    (a, b), (c, d) = _check_matrix(matrix)
    f = MeroExpr.coerce(f)
    num = P.polyadd(a * f.num, b * f.den)
    den = P.polyadd(c * f.num, d * f.den)
    return MeroExpr(num, den)


def mobius_point(matrix, w) -> SpherePoint:
    (a, b), (c, d) = _check_matrix(matrix)
    if is_inf(w):
        return INF if c == 0 else complex(a / c)
    w = complex(w)
    den = c * w + d
    if den == 0:
        return INF
    return complex((a * w + b) / den)


class OneForm:
    """Meromorphic 1-form ``coefficient(z) dz``."""

    __slots__ = ("_coef",)

    def __init__(self, coefficient, *, allow_zero: bool = False):
        coef = MeroExpr.coerce(coefficient)
        if coef.is_zero and not allow_zero:
            raise ValueError("zero 1-form; pass allow_zero=True to construct it")
        object.__setattr__(self, "_coef", coef)

    def __setattr__(self, name, value):
        raise AttributeError("OneForm is immutable")

    @property
    def coefficient(self) -> MeroExpr:
        return self._coef

    @property
    def is_zero(self) -> bool:
        return self._coef.is_zero

    def __call__(self, z):
        return self._coef(z)

    def order_at(self, p) -> int:
        """Order of the form; at infinity this uses the chart ``w = 1/z``."""
        k = self._coef.order_at(p)
        return k - 2 if is_inf(p) else k

    def scaled(self, c) -> "OneForm":
        return OneForm(self._coef * c, allow_zero=True)

    def __mul__(self, other):
        if isinstance(other, (MeroExpr, Number)):
            return OneForm(self._coef * other, allow_zero=True)
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return OneForm(-self._coef, allow_zero=True)

    def __eq__(self, other):
        return isinstance(other, OneForm) and self._coef == other._coef

    def __hash__(self):
        return hash(("OneForm", self._coef))

    def __repr__(self):
        return f"OneForm({self._coef.to_text()!r} dz)"


def exterior_derivative(f: MeroExpr) -> OneForm:
    """``df = f'(z) dz``."""
    return OneForm(MeroExpr.coerce(f).derivative(), allow_zero=True)
