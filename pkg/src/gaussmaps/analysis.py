"""Value distribution of Gauss maps: omitted values, ramification, islands,
shared values, and the two-map example with many shared values.

Verdicts never claim to verify a theorem.  They record whether the data
meets a theorem's hypotheses and whether the outcome is consistent with its
conclusion.  Statuses:

``trivial``
    ``g`` is constant, so the conclusion holds outright.
``silent``
    the metric is not complete, so the theorem says nothing.
``consistent``
    the metric is complete but some hypothesis fails.
``contradiction``
    every hypothesis holds for nonconstant ``g``; a correct theorem never
    produces this on valid data.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    ConstantFunction,
    EpsTooLarge,
    InvalidAlphas,
    UnresolvedComponent,
)
from .mero import INF, MeroExpr, OneForm, SpherePoint, Z, as_point, chordal, is_inf
from .mesh import DomainMesh, domain_is_complete
from .metric import (
    MetricSpec,
    RamificationProfile,
    alpha_points,
    classify_completeness,
    contains_point,
    gamma,
    hypothesis_check,
    is_complete,
)
from .parsing import format_point, point_key

SHARED_TOL = 1e-9


def _unique_points(points: Iterable[SpherePoint], tol: float = SHARED_TOL) -> list[SpherePoint]:
    out: list[SpherePoint] = []
    for p in points:
        p = as_point(p)
        if not contains_point(out, p, tol):
            out.append(p)
    return sorted(out, key=point_key)


def _fmt_points(points) -> list[str]:
    return [format_point(p) for p in points]


# ---------------------------------------------------------------------------
# omitted values


@dataclass(frozen=True)
class OmittedValueReport:
    g: str
    punctures: tuple
    omitted: tuple
    m: int

    @property
    def count(self) -> int:
        return len(self.omitted)

    @property
    def bound(self) -> int:
        return self.m + 2

    @property
    def within_bound(self) -> bool:
        return self.count <= self.bound

    def to_dict(self) -> dict:
        return {
            "g": self.g,
            "punctures": _fmt_points(self.punctures),
            "omitted": _fmt_points(self.omitted),
            "count": self.count,
            "bound": self.bound,
            "within_bound": self.within_bound,
        }


def omitted_values(g: MeroExpr, punctures: Sequence[SpherePoint], m: int) -> OmittedValueReport:
    """Values of the sphere that ``g`` does not take on the sphere minus ``punctures``.

    A rational ``g`` is onto the sphere, so a value can only be omitted if
    all its preimages are punctures; the candidates are therefore the values
    ``g(p)`` at the punctures.
    """
    g = MeroExpr.coerce(g)
    if g.is_constant:
        raise ConstantFunction("g is constant")
    pts = [as_point(p) for p in punctures]
    cands = _unique_points(g.at(p) for p in pts)
    omitted = [a for a in cands if not alpha_points(g, a, pts)]
    return OmittedValueReport(g.to_text(), tuple(pts), tuple(omitted), int(m))


# ---------------------------------------------------------------------------
# ramification


@dataclass(frozen=True)
class RamificationVerdict:
    status: str
    complete: bool
    hypothesis: object | None
    punctures: tuple

    def to_dict(self) -> dict:
        out = {
            "status": self.status,
            "complete": self.complete,
            "punctures": [r.to_dict() for r in self.punctures],
        }
        if self.hypothesis is not None:
            out.update(self.hypothesis.to_dict())
        return out


def ramification_verdict(spec: MetricSpec, profile: RamificationProfile) -> RamificationVerdict:
    """Combine the multiplicity hypothesis with completeness on the sphere
    minus the metric's punctures."""
    reports = tuple(classify_completeness(spec))
    complete = all(r.complete_at for r in reports)
    if spec.g.is_constant:
        return RamificationVerdict("trivial", complete, None, reports)
    hyp = hypothesis_check(spec, profile)
    if not complete:
        status = "silent"
    elif hyp.gamma_exceeds and hyp.satisfied:
        status = "contradiction"
    else:
        status = "consistent"
    return RamificationVerdict(status, complete, hyp, reports)


# ---------------------------------------------------------------------------
# islands


@dataclass(frozen=True)
class Island:
    vertices: tuple
    multiplicity: int
    winding: int
    roots: tuple
    boundary_contained: bool = False

    @property
    def simple(self) -> bool:
        return self.multiplicity == 1

    def to_dict(self) -> dict:
        return {
            "size": len(self.vertices),
            "multiplicity": self.multiplicity,
            "winding": self.winding,
            "roots": [{"z": format_point(p), "multiplicity": k} for p, k in self.roots],
            "boundary_contained": self.boundary_contained,
        }


@dataclass(frozen=True)
class IslandReport:
    alpha: SpherePoint
    eps: float
    islands: tuple
    boundary_components: int = 0
    non_island_components: tuple = ()

    @property
    def multiplicities(self) -> list[int]:
        return [i.multiplicity for i in self.islands]

    @property
    def simple_count(self) -> int:
        return sum(1 for i in self.islands if i.simple)

    def to_dict(self) -> dict:
        return {
            "alpha": format_point(self.alpha),
            "eps": self.eps,
            "islands": [i.to_dict() for i in self.islands],
            "island_count": len(self.islands),
            "simple_islands": self.simple_count,
            "boundary_components": self.boundary_components,
            "non_island_components": [i.to_dict() for i in self.non_island_components],
        }


def _components(mesh: DomainMesh, mask: np.ndarray) -> list[np.ndarray]:
    idx = np.nonzero(mask)[0]
    if len(idx) == 0:
        return []
    e = mesh.edges
    keep = mask[e[:, 0]] & mask[e[:, 1]]
    n = mesh.n_vertices
    ee = e[keep]
    A = coo_matrix((np.ones(len(ee)), (ee[:, 0], ee[:, 1])), shape=(n, n))
    _, labels = connected_components(A, directed=False)
    groups: dict[int, list[int]] = {}
    for v in idx:
        groups.setdefault(int(labels[v]), []).append(int(v))
    return [np.array(sorted(g)) for g in sorted(groups.values(), key=lambda g: g[0])]


def _closed_star(mesh: DomainMesh, comp: np.ndarray) -> np.ndarray:
    inside = np.zeros(mesh.n_vertices, dtype=bool)
    inside[comp] = True
    return np.nonzero(inside[mesh.triangles].any(axis=1))[0]


def _euler_characteristic(tris: np.ndarray) -> int:
    verts = np.unique(tris)
    e = np.sort(np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]]), axis=1)
    edges = np.unique(e, axis=0)
    return len(verts) - len(edges) + len(tris)


def _boundary_loop_edges(tris: np.ndarray) -> np.ndarray:
    """Directed edges of the triangles that are not shared (the boundary cycle)."""
    e = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    key = np.sort(e, axis=1)
    _, inv, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
    return e[counts[inv.ravel()] == 1]


def _local_value(g: MeroExpr, alpha):
    """Function whose zeros are the ``α``-points of ``g``."""
    if is_inf(alpha):
        return g.reciprocal()
    return g - complex(alpha)


def _winding(h: MeroExpr, z: np.ndarray, edges: np.ndarray) -> int:
    total = 0.0
    for a, b in edges:
        za, zb = z[a], z[b]
        n = 4
        while True:
            t = np.linspace(0.0, 1.0, n + 1)
            vals = np.asarray(h(za + t * (zb - za)))
            if not np.all(np.isfinite(vals)) or np.any(vals == 0):
                raise UnresolvedComponent("a target point lies on the island boundary; refine the mesh")
            steps = np.angle(vals[1:] / vals[:-1])
            if np.max(np.abs(steps)) < np.pi / 4:
                total += float(np.sum(steps))
                break
            n *= 2
            if n > 4096:
                raise UnresolvedComponent("argument varies too fast along an island boundary")
    w = total / (2 * np.pi)
    k = int(round(w))
    if abs(w - k) > 0.1:
        raise UnresolvedComponent(f"winding number {w:.3f} is not close to an integer")
    return k


def _locate(points: np.ndarray, z: np.ndarray, tris: np.ndarray) -> np.ndarray:
    """For each point, the index into ``tris`` of a containing triangle or -1."""
    out = -np.ones(len(points), dtype=np.int64)
    if len(points) == 0 or len(tris) == 0:
        return out
    a, b, c = z[tris[:, 0]], z[tris[:, 1]], z[tris[:, 2]]
    for i, p in enumerate(points):
        d1 = ((b - a).conjugate() * (p - a)).imag
        d2 = ((c - b).conjugate() * (p - b)).imag
        d3 = ((a - c).conjugate() * (p - c)).imag
        scale = 1e-12 * np.abs(b - a) ** 2
        hit = np.nonzero((d1 >= -scale) & (d2 >= -scale) & (d3 >= -scale))[0]
        if len(hit):
            out[i] = hit[0]
    return out


def find_islands(g: MeroExpr, mesh: DomainMesh, alpha, eps: float) -> IslandReport:
    """Islands of ``g`` over the chordal disk ``D(α, ε)``.

    Vertices with ``|g(v), α| < ε`` are grouped into connected components.
    Components touching the mesh boundary are not islands.  Each remaining
    component's multiplicity is the number of ``α``-points (with
    multiplicity) inside its closed star, cross-checked against the winding
    number of ``g - α`` (or ``1/g`` for ``α = ∞``) along the star's boundary.
    Components whose star is not a disk are listed as non-island components.
    """
    g = MeroExpr.coerce(g)
    alpha = as_point(alpha)
    if not 0 < eps <= 1:
        raise EpsTooLarge("eps must lie in (0, 1]")
    if g.is_constant:
        raise ConstantFunction("g is constant")
    z = mesh.vertices
    gv = np.asarray(g(z))
    d = chordal(gv, complex(np.inf) if is_inf(alpha) else complex(alpha))
    comps = _components(mesh, d < eps)
    roots = [(p, k) for p, k in g.preimage(alpha) if not is_inf(p)]
    root_pts = np.array([p for p, _ in roots], dtype=complex)
    h = _local_value(g, alpha)

    islands, holes_, n_boundary = [], [], 0
    claimed = np.zeros(len(roots), dtype=bool)
    for comp in comps:
        star = mesh.triangles[_closed_star(mesh, comp)]
        loc = _locate(root_pts, z, star)
        mine = loc >= 0
        if np.any(claimed & mine):
            raise UnresolvedComponent("two components claim the same α-point; refine the mesh")
        claimed |= mine
        if mesh.boundary[comp].any():
            n_boundary += 1
            continue
        inside = tuple((roots[i][0], roots[i][1]) for i in np.nonzero(mine)[0])
        mult = sum(k for _, k in inside)
        wind = _winding(h, z, _boundary_loop_edges(star))
        island = Island(tuple(int(v) for v in comp), mult, wind, inside)
        if _euler_characteristic(star) != 1:
            holes_.append(island)
            continue
        if wind != mult:
            raise UnresolvedComponent(
                f"root count {mult} disagrees with winding number {wind}; refine the mesh"
            )
        islands.append(island)
    unclaimed = np.nonzero(~claimed)[0]
    on_mesh = _locate(root_pts[unclaimed], z, mesh.triangles) >= 0
    for i in unclaimed[on_mesh]:
        p = root_pts[i]
        raise UnresolvedComponent(
                f"the {format_point(alpha)}-point {format_point(p)} has no mesh vertex in its "
                "preimage component; refine the mesh or enlarge eps"
            )
    return IslandReport(alpha, float(eps), tuple(islands), n_boundary, tuple(holes_))


def default_eps(alphas: Sequence[SpherePoint]) -> float:
    """A quarter of the smallest pairwise chordal gap (0.25 for one target)."""
    pts = [as_point(a) for a in alphas]
    gaps = [chordal(a, b) for i, a in enumerate(pts) for b in pts[i + 1 :]]
    return 0.25 * (min(gaps) if gaps else 1.0)


@dataclass(frozen=True)
class TargetIslands:
    alpha: SpherePoint
    nu: object
    report: IslandReport

    @property
    def min_multiplicity(self) -> int | None:
        m = self.report.multiplicities
        return min(m) if m else None

    @property
    def ok(self) -> bool:
        """No island of multiplicity below ``ν`` over this target."""
        if self.nu is INF:
            return not self.report.islands
        return all(k >= self.nu for k in self.report.multiplicities)

    def to_dict(self) -> dict:
        return {
            "alpha": format_point(self.alpha),
            "nu": "inf" if self.nu is INF else int(self.nu),
            "min_multiplicity": self.min_multiplicity,
            "ok": self.ok,
            **{k: v for k, v in self.report.to_dict().items() if k != "alpha"},
        }


@dataclass(frozen=True)
class IslandsVerdict:
    status: str
    eps: float
    gamma: Fraction
    threshold: int
    complete: bool
    hypothesis_holds: bool
    targets: tuple

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "eps": self.eps,
            "gamma": float(self.gamma),
            "gamma_exact": str(self.gamma),
            "threshold": self.threshold,
            "complete": self.complete,
            "hypothesis_holds": self.hypothesis_holds,
            "targets": [t.to_dict() for t in self.targets],
        }


def islands_verdict(
    g: MeroExpr,
    mesh: DomainMesh,
    targets: Sequence[tuple],
    eps: float | None = None,
    m: int = 2,
    spec: MetricSpec | None = None,
) -> IslandsVerdict:
    """Island hypothesis bookkeeping over disks ``D(α_j, ε)``.

    The hypothesis holds when no target has an island of multiplicity below
    its ``ν_j``.  Completeness is taken from ``spec`` on the mesh's domain;
    without ``spec`` the domain is treated as incomplete.
    """
    g = MeroExpr.coerce(g)
    profile = RamificationProfile(tuple((as_point(a), nu) for a, nu in targets))
    alphas = profile.alphas
    gap = profile.min_gap
    if eps is None:
        eps = default_eps(alphas)
    if len(alphas) > 1 and eps >= gap / 2:
        raise EpsTooLarge(f"eps = {eps:g} is not below half the smallest target gap {gap:g}")
    gam = gamma(profile)
    complete = spec is not None and domain_is_complete(spec, mesh.domain)
    if g.is_constant:
        return IslandsVerdict("trivial", eps, gam, m + 2, complete, False, ())
    res = tuple(TargetIslands(a, nu, find_islands(g, mesh, a, eps)) for a, nu in profile.entries)
    holds = gam > m + 2 and all(t.ok for t in res)
    if not complete:
        status = "silent"
    elif holds:
        status = "contradiction"
    else:
        status = "consistent"
    return IslandsVerdict(status, float(eps), gam, m + 2, complete, all(t.ok for t in res), res)


# ---------------------------------------------------------------------------
# shared values


@dataclass(frozen=True)
class SharedValueReport:
    alpha: SpherePoint
    preimage_g: tuple
    preimage_gh: tuple

    @property
    def equal(self) -> bool:
        a, b = self.preimage_g, self.preimage_gh
        return all(contains_point(b, p, SHARED_TOL) for p in a) and all(
            contains_point(a, p, SHARED_TOL) for p in b
        )

    @property
    def vacuous(self) -> bool:
        return not self.preimage_g and not self.preimage_gh

    def to_dict(self) -> dict:
        return {
            "alpha": format_point(self.alpha),
            "preimage_g": _fmt_points(self.preimage_g),
            "preimage_gh": _fmt_points(self.preimage_gh),
            "equal": self.equal,
            "vacuous": self.vacuous,
        }


@dataclass(frozen=True)
class SharedValuesSummary:
    reports: tuple
    identical: bool
    m: int | None = None

    @property
    def shared(self) -> list:
        return [r.alpha for r in self.reports if r.equal]

    @property
    def shared_count(self) -> int:
        return len(self.shared)

    def to_dict(self) -> dict:
        out = {
            "shared": _fmt_points(self.shared),
            "shared_count": self.shared_count,
            "identical": self.identical,
            "values": [r.to_dict() for r in self.reports],
        }
        if self.m is not None:
            out["unicity_threshold"] = self.m + 5
            out["sharpness_bound"] = self.m + 4
            out["forces_identity"] = self.shared_count >= self.m + 5
        return out


def _preimage_set(f: MeroExpr, alpha, punctures) -> tuple:
    return tuple(_unique_points(p for p, _ in alpha_points(f, alpha, punctures)))


def shared_value_candidates(g: MeroExpr, gh: MeroExpr, punctures) -> list[SpherePoint]:
    """Every value that can possibly be shared.

    A shared value with nonempty preimage is taken at a point where
    ``g = ĝ``; one with empty preimage is omitted by both maps, hence is a
    value at a puncture.
    """
    pts = [as_point(p) for p in punctures]
    cands = [g.at(p) for p in pts] + [gh.at(p) for p in pts]
    diff = g - gh
    if not diff.is_zero:
        coincide = [p for p, k in diff.zeros_and_poles() if k > 0]
        # at ∞ and at common poles both maps are infinite
        coincide += [p for p, k in g.zeros_and_poles() if k < 0 and gh.order_at(p) < 0]
        if is_inf(g.at(INF)) and is_inf(gh.at(INF)):
            coincide.append(INF)
        cands += [g.at(p) for p in coincide if not contains_point(pts, p)]
    return _unique_points(cands)


def shared_values(
    g: MeroExpr,
    gh: MeroExpr,
    punctures: Sequence[SpherePoint],
    candidates: Sequence[SpherePoint] | None = None,
    m: int | None = None,
) -> SharedValuesSummary:
    """Compare exact preimage sets of ``g`` and ``ĝ`` on the sphere minus punctures."""
    g, gh = MeroExpr.coerce(g), MeroExpr.coerce(gh)
    if g.is_constant or gh.is_constant:
        raise ConstantFunction("both maps must be nonconstant")
    pts = [as_point(p) for p in punctures]
    identical = (g - gh).is_zero
    if candidates is None:
        candidates = shared_value_candidates(g, gh, pts)
    reports = tuple(
        SharedValueReport(as_point(a), _preimage_set(g, a, pts), _preimage_set(gh, a, pts))
        for a in candidates
    )
    return SharedValuesSummary(reports, identical, m)


# ---------------------------------------------------------------------------
# the example with m + 4 shared values


class UnicityExample(NamedTuple):
    first: MetricSpec
    second: MetricSpec
    punctures: tuple


def make_unicity_example(m: int, alphas: Sequence, *, omega_hat: str = "same") -> UnicityExample:
    """``g = z`` and ``ĝ = 1/z`` with ``ω = dz / (z Π (z-α_i)(α_i z-1))``.

    ``omega_hat="same"`` pairs ``ĝ`` with ``ω`` itself.  That metric has
    local exponent ``m - 1`` at ∞, so it is not complete there.
    ``omega_hat="isometric"`` uses ``z^m ω`` instead, which makes the
    identity map an isometry and both metrics complete; the shared values
    depend only on the maps and are the same either way.
    """
    if int(m) != m or m < 2 or m % 2:
        raise InvalidAlphas("m must be an even integer ≥ 2")
    alphas = [complex(a) for a in alphas]
    if len(alphas) != m // 2:
        raise InvalidAlphas(f"need exactly m/2 = {m // 2} values")
    for i, a in enumerate(alphas):
        if abs(a) < 1e-12 or abs(a - 1) < 1e-12 or abs(a + 1) < 1e-12:
            raise InvalidAlphas(f"{format_point(a)} is one of 0, 1, -1")
        for b in alphas[i + 1 :]:
            if abs(a - b) < 1e-12:
                raise InvalidAlphas("values must be distinct")
        for b in alphas:
            if abs(a * b - 1) < 1e-12:
                raise InvalidAlphas("α_i = 1/α_j is not allowed")
    den = Z
    for a in alphas:
        den = den * (Z - a) * (a * Z - 1)
    omega = OneForm(1 / den)
    punctures = tuple([0j, *alphas, *(1 / a for a in alphas), INF])
    first = MetricSpec(Z, omega, m, punctures)
    if omega_hat == "same":
        w2 = omega
    elif omega_hat == "isometric":
        w2 = OneForm(omega.coefficient * Z**m)
    else:
        raise ValueError("omega_hat must be 'same' or 'isometric'")
    second = MetricSpec(1 / Z, w2, m, punctures)
    return UnicityExample(first, second, punctures)


@dataclass(frozen=True)
class UnicityReport:
    m: int
    alphas: tuple
    complete_first: bool
    complete_second: bool
    shared: SharedValuesSummary
    punctures: tuple

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "alphas": _fmt_points(self.alphas),
            "punctures": _fmt_points(self.punctures),
            "complete": self.complete_first,
            "complete_hat": self.complete_second,
            "identical": self.shared.identical,
            **{k: v for k, v in self.shared.to_dict().items() if k != "identical"},
        }


def unicity_report(m: int, alphas: Sequence, *, omega_hat: str = "same") -> UnicityReport:
    ex = make_unicity_example(m, alphas, omega_hat=omega_hat)
    shared = shared_values(ex.first.g, ex.second.g, ex.punctures, m=m)
    return UnicityReport(
        m,
        tuple(complex(a) for a in alphas),
        is_complete(ex.first),
        is_complete(ex.second),
        shared,
        ex.punctures,
    )
