"""The conformal metric ``ds² = (1+|g|²)^m |ω|²`` and quantities built on it.

Near poles of ``g`` every evaluation switches to the chart ``ĝ = 1/g`` and
to the precomputed rational function ``ω̂·g^m``, so the conformal factor
and curvature stay finite wherever the metric is regular.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ConstantFunction,
    EvaluatedAtPuncture,
    InfiniteDistance,
    InvalidMetric,
    PreconditionViolated,
    PunctureNotIsolated,
)
from .mero import INF, MeroExpr, OneForm, SpherePoint, as_point, chordal, is_inf
from .parsing import format_point

POINT_TOL = 1e-9


def _nu_text(nu):
    return "inf" if nu is INF else int(nu)


def contains_point(points: Iterable[SpherePoint], p: SpherePoint, tol: float = POINT_TOL) -> bool:
    return any(chordal(p, q) <= tol for q in points)


def check_isolated(points: Sequence[SpherePoint], tol: float = POINT_TOL) -> None:
    for i, a in enumerate(points):
        for b in points[i + 1 :]:
            if chordal(a, b) <= tol:
                raise PunctureNotIsolated(f"punctures {format_point(a)} and {format_point(b)} coincide")


def pole_order(g: MeroExpr, p) -> int:
    """Pole order of ``g`` at ``p`` (0 when ``g`` is finite there)."""
    if g.is_zero:
        return 0
    return max(0, -g.order_at(p))


def local_exponent(g: MeroExpr, omega: OneForm, m: int, p) -> int:
    """Exponent ``k`` with ``λ ~ |z - p|^k`` (``|w|^k`` with ``w = 1/z`` at ∞)."""
    return omega.order_at(p) - m * pole_order(g, p)


def natural_punctures(g: MeroExpr, omega: OneForm, m: int) -> list[SpherePoint]:
    """Points of the sphere where the conformal factor is zero or infinite."""
    cands: list[SpherePoint] = []
    if not omega.coefficient.is_constant:
        cands += [p for p, _ in omega.coefficient.zeros_and_poles() if not is_inf(p)]
    if not g.is_constant:
        cands += [p for p, k in g.zeros_and_poles() if k < 0 and not is_inf(p)]
    cands.append(INF)
    out: list[SpherePoint] = []
    for p in cands:
        if contains_point(out, p):
            continue
        if local_exponent(g, omega, m, p) != 0:
            out.append(p)
    return out


@dataclass(frozen=True)
class MetricSpec:
    """Data ``(g, ω, m)`` of the metric ``(1+|g|²)^m |ω|²``.

    ``punctures`` declares the domain as the sphere minus those points.  When
    given, the metric must be regular (finite and positive) everywhere else;
    when omitted the domain is the sphere minus :attr:`natural_punctures`.
    """

    g: MeroExpr
    omega: OneForm
    m: int
    punctures: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "g", MeroExpr.coerce(self.g))
        if not isinstance(self.omega, OneForm):
            object.__setattr__(self, "omega", OneForm(self.omega))
        if self.omega.is_zero:
            raise InvalidMetric("ω vanishes identically")
        if int(self.m) != self.m or self.m < 0:
            raise InvalidMetric("m must be a nonnegative integer")
        object.__setattr__(self, "m", int(self.m))
        if self.punctures is not None:
            pts = tuple(as_point(p) for p in self.punctures)
            check_isolated(pts)
            object.__setattr__(self, "punctures", pts)
            missing = [p for p in self.natural_punctures if not contains_point(pts, p)]
            if missing:
                raise InvalidMetric(
                    "conformal factor degenerates at "
                    + ", ".join(format_point(p) for p in missing)
                    + " inside the domain"
                )

    @cached_property
    def natural_punctures(self) -> tuple:
        return tuple(natural_punctures(self.g, self.omega, self.m))

    @property
    def domain_punctures(self) -> tuple:
        return self.punctures if self.punctures is not None else self.natural_punctures

    def with_omega_scaled(self, c) -> "MetricSpec":
        return MetricSpec(self.g, self.omega.scaled(c), self.m, self.punctures)

    # rational helpers for the chart near poles of g
    @cached_property
    def _g_prime(self) -> MeroExpr:
        return self.g.derivative()

    @cached_property
    def _ghat(self) -> MeroExpr | None:
        return None if self.g.is_zero else self.g.reciprocal()

    @cached_property
    def _ghat_prime(self) -> MeroExpr | None:
        return None if self._ghat is None else self._ghat.derivative()

    @cached_property
    def _omega_gm(self) -> MeroExpr:
        return self.omega.coefficient * self.g**self.m


def _as_array(z):
    if z is INF:
        raise EvaluatedAtPuncture("cannot evaluate at ∞ in the z-chart")
    arr = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise EvaluatedAtPuncture("cannot evaluate at ∞ in the z-chart")
    return arr


def _check_not_puncture(spec: MetricSpec, z: np.ndarray) -> None:
    for p in spec.domain_punctures:
        if is_inf(p):
            continue
        if np.any(np.abs(z - p) <= 1e-12 * max(1.0, abs(p))):
            raise EvaluatedAtPuncture(f"z = {format_point(p)} is a puncture")


def _branches(spec: MetricSpec, z: np.ndarray):
    gz = spec.g(z)
    big = ~(np.abs(gz) <= 1.0)
    return gz, big


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def conformal_factor(spec: MetricSpec, z):
    """``λ(z) = (1+|g|²)^{m/2} |ω̂(z)|``; vectorized over ``z``."""
    z = _as_array(z)
    _check_not_puncture(spec, z)
    return _out(_conformal_factor(spec, z))


def _conformal_factor(spec: MetricSpec, z: np.ndarray) -> np.ndarray:
    shape = z.shape
    z = z.reshape(-1)
    m = spec.m
    gz, big = _branches(spec, z)
    lam = np.empty(z.shape, dtype=float)
    small = ~big
    if np.any(small):
        lam[small] = (1 + np.abs(gz[small]) ** 2) ** (m / 2) * np.abs(spec.omega(z[small]))
    if np.any(big):
        zb = z[big]
        lam[big] = (1 + np.abs(spec._ghat(zb)) ** 2) ** (m / 2) * np.abs(spec._omega_gm(zb))
    return lam.reshape(shape)


def spherical_derivative(g: MeroExpr, z, *, _ghat=None, _gp=None, _ghp=None):
    """``|g'| / (1 + |g|²)``, evaluated in whichever chart keeps it finite."""
    g = MeroExpr.coerce(g)
    z = _as_array(z)
    shape = z.shape
    z = z.reshape(-1)
    gz = g(z)
    big = ~(np.abs(gz) <= 1.0)
    out = np.empty(z.shape, dtype=float)
    gp = _gp if _gp is not None else g.derivative()
    small = ~big
    out[small] = np.abs(gp(z[small])) / (1 + np.abs(gz[small]) ** 2)
    if np.any(big):
        gh = _ghat if _ghat is not None else g.reciprocal()
        ghp = _ghp if _ghp is not None else gh.derivative()
        zb = z[big]
        out[big] = np.abs(ghp(zb)) / (1 + np.abs(gh(zb)) ** 2)
    return _out(out.reshape(shape))


def gaussian_curvature(spec: MetricSpec, z):
    """``K = -2m |g'|² / ((1+|g|²)^{m+2} |ω̂|²)``; vectorized, always ≤ 0."""
    z = _as_array(z)
    _check_not_puncture(spec, z)
    if spec.m == 0 or spec.g.is_constant:
        return _out(np.zeros(z.shape))
    sph = np.asarray(
        spherical_derivative(
            spec.g, z, _ghat=spec._ghat, _gp=spec._g_prime, _ghp=spec._ghat_prime
        )
    )
    lam = _conformal_factor(spec, z)
    return _out(-2.0 * spec.m * sph**2 / lam**2)


# ---------------------------------------------------------------------------
# ramification


@dataclass(frozen=True)
class RamificationProfile:
    """Targets ``α_j`` with required multiplicities ``ν_j`` (an int ≥ 2 or INF)."""

    entries: tuple

    def __post_init__(self):
        ents = []
        for alpha, nu in self.entries:
            alpha = as_point(alpha)
            if nu is not INF:
                if isinstance(nu, float) and np.isinf(nu):
                    nu = INF
                elif int(nu) != nu or nu < 2:
                    raise ValueError(f"multiplicity {nu!r} must be an integer ≥ 2 or INF")
                else:
                    nu = int(nu)
            ents.append((alpha, nu))
        alphas = [a for a, _ in ents]
        for i, a in enumerate(alphas):
            for b in alphas[i + 1 :]:
                if chordal(a, b) <= 1e-12:
                    raise ValueError(f"target {format_point(a)} repeated")
        object.__setattr__(self, "entries", tuple(ents))

    @classmethod
    def uniform(cls, alphas: Iterable, nu) -> "RamificationProfile":
        return cls(tuple((a, nu) for a in alphas))

    @property
    def q(self) -> int:
        return len(self.entries)

    @property
    def alphas(self) -> list:
        return [a for a, _ in self.entries]

    @property
    def nus(self) -> list:
        return [n for _, n in self.entries]

    @property
    def min_gap(self) -> float:
        """Smallest pairwise chordal distance between targets."""
        a = self.alphas
        gaps = [chordal(x, y) for i, x in enumerate(a) for y in a[i + 1 :]]
        return min(gaps) if gaps else 1.0


def defect_term(nu) -> Fraction:
    return Fraction(1) if nu is INF else 1 - Fraction(1, int(nu))


def gamma(profile: RamificationProfile) -> Fraction:
    """``Σ (1 - 1/ν_j)`` as an exact fraction, with ``ν = ∞`` contributing 1."""
    return sum((defect_term(nu) for nu in profile.nus), Fraction(0))


@dataclass(frozen=True)
class AlphaCheck:
    alpha: SpherePoint
    nu: object
    points: tuple
    ok: bool

    def to_dict(self) -> dict:
        return {
            "alpha": format_point(self.alpha),
            "nu": _nu_text(self.nu),
            "points": [{"z": format_point(p), "multiplicity": k} for p, k in self.points],
            "ok": self.ok,
        }


@dataclass(frozen=True)
class HypothesisVerdict:
    """Bookkeeping of the ramification hypothesis.

    ``satisfied`` is true when every ``α_j``-point in the domain has
    multiplicity at least ``ν_j``; ``gamma_exceeds`` records ``γ > m+2``.
    """

    gamma: Fraction
    threshold: int
    gamma_exceeds: bool
    satisfied: bool
    per_alpha: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "gamma": float(self.gamma),
            "gamma_exact": str(self.gamma),
            "threshold": self.threshold,
            "gamma_exceeds_threshold": self.gamma_exceeds,
            "satisfied": self.satisfied,
            "per_alpha": [c.to_dict() for c in self.per_alpha],
        }


def alpha_points(g: MeroExpr, alpha, punctures: Iterable[SpherePoint]) -> list[tuple[SpherePoint, int]]:
    """Solutions of ``g = α`` on the sphere minus ``punctures``."""
    punctures = list(punctures)
    return [(p, k) for p, k in g.preimage(alpha) if not contains_point(punctures, p)]


def hypothesis_check(spec: MetricSpec, profile: RamificationProfile) -> HypothesisVerdict:
    """Check multiplicities of ``α_j``-points of ``g`` on the metric's domain."""
    if spec.g.is_constant:
        raise ConstantFunction("g is constant")
    checks = []
    for alpha, nu in profile.entries:
        pts = alpha_points(spec.g, alpha, spec.domain_punctures)
        ok = all(nu is not INF and k >= nu for _, k in pts)
        checks.append(AlphaCheck(alpha, nu, tuple(pts), ok))
    gam = gamma(profile)
    return HypothesisVerdict(
        gamma=gam,
        threshold=spec.m + 2,
        gamma_exceeds=gam > spec.m + 2,
        satisfied=all(c.ok for c in checks),
        per_alpha=tuple(checks),
    )


# ---------------------------------------------------------------------------
# completeness


@dataclass(frozen=True)
class PunctureReport:
    puncture: SpherePoint
    k: int
    complete_at: bool

    def to_dict(self) -> dict:
        return {"puncture": format_point(self.puncture), "k": self.k, "complete": self.complete_at}


def classify_completeness(spec: MetricSpec, punctures: Iterable[SpherePoint] | None = None) -> list[PunctureReport]:
    """Local exponent and completeness verdict at each puncture.

    ``k ≤ -1`` means every path into the puncture has infinite length.
    """
    pts = [as_point(p) for p in (spec.domain_punctures if punctures is None else punctures)]
    check_isolated(pts)
    out = []
    for p in pts:
        k = local_exponent(spec.g, spec.omega, spec.m, p)
        out.append(PunctureReport(p, k, k <= -1))
    return out


def is_complete(spec: MetricSpec, punctures: Iterable[SpherePoint] | None = None) -> bool:
    """Completeness of the metric on the sphere minus ``punctures``."""
    return all(r.complete_at for r in classify_completeness(spec, punctures))


# ---------------------------------------------------------------------------
# diagnostics


def curvature_bound_field(spec: MetricSpec, mesh) -> np.ndarray:
    """``|K(p)|^{1/2} d(p)`` at every vertex of ``mesh``."""
    from .mesh import domain_is_complete, geodesic_distances_to_boundary

    if domain_is_complete(spec, mesh.domain):
        raise InfiniteDistance("the metric is complete on this domain: d(p) = ∞")
    d = geodesic_distances_to_boundary(mesh, spec)
    k = np.asarray(gaussian_curvature(spec, mesh.vertices))
    return np.sqrt(np.abs(k)) * d


def curvature_bound_quantity(spec: MetricSpec, mesh, p: int) -> float:
    """``|K(p)|^{1/2} d(p)`` at vertex index ``p``."""
    return float(curvature_bound_field(spec, mesh)[p])


def fujimoto_lhs(g, profile: RamificationProfile, eta: float, delta: float, z, *, strict: bool = True):
    """Left-hand quantity of the spherical-derivative estimate for ``g``.

    ``|g'|/(1+|g|²)`` divided by ``(Π_j |g, α_j|^{1-1/ν_j})^{1-η-δ}``.
    With ``strict=False`` the conditions on ``γ``, ``η`` and ``δ`` are not
    enforced, which allows evaluating degenerate exponents.
    """
    if isinstance(g, MetricSpec):
        g = g.g
    g = MeroExpr.coerce(g)
    gam = gamma(profile)
    if strict:
        if eta < 0 or delta <= 0:
            raise PreconditionViolated("need η ≥ 0 and δ > 0")
        if not gam > 2:
            raise PreconditionViolated(f"γ = {gam} is not > 2")
        if not float(gam) - 2 > float(gam) * (eta + delta):
            raise PreconditionViolated("need γ - 2 > γ(η + δ)")
    z = _as_array(z)
    sph = np.asarray(spherical_derivative(g, z))
    gz = g(z)
    prod = np.ones(z.shape)
    for alpha, nu in profile.entries:
        d = np.asarray(chordal(gz, INF if is_inf(alpha) else complex(alpha)))
        if np.any(d == 0) and not g.is_constant:
            raise PreconditionViolated(f"z is a {format_point(alpha)}-point of g")
        prod = prod * d ** float(defect_term(nu))
    expo = 1.0 - eta - delta
    with np.errstate(divide="ignore"):
        val = np.where(sph == 0, 0.0, sph / prod**expo)
    return _out(val)
