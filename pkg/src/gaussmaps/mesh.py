"""Triangulated planar domains, path integrals and conformal distances.

Meshes are built from a hexagonal lattice of spacing ``h`` anchored at the
domain center, points placed on the outer boundary, and graded log-polar
rings around each excluded puncture disk.  The point set is triangulated
with :class:`scipy.spatial.Delaunay` and triangles outside the region are
discarded.  Plane domains are truncated at ``R_max``; beyond a core disk
the rings keep a fixed number of points per circle, so the local edge
length grows in proportion to the radius.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order, dijkstra
from scipy.spatial import Delaunay

from .errors import DegenerateRegion, EmptyMesh, NoBoundary, ParseError, PoleOnPath
from .mero import INF, OneForm, as_point, is_inf
from .metric import MetricSpec, _conformal_factor, classify_completeness, local_exponent
from .parsing import format_point, parse_point
from .quadrature import DEFAULT_ORDER, DEFAULT_TOL, integrate_segment

KINDS = ("disk", "annulus", "rectangle", "plane")
DEFAULT_EXCLUSION = 1e-2
DEFAULT_EDGE = 0.05
RING_POINTS = 16
DISTANCE_RINGS = 3


@dataclass(frozen=True)
class DomainSpec:
    """A planar region with punctures.

    ``params`` depends on ``kind``: ``disk`` uses ``(R, cx, cy)``,
    ``annulus`` uses ``(r_in, r_out, cx, cy)``, ``rectangle`` uses
    ``(x0, x1, y0, y1)`` and ``plane`` uses ``(R_max,)``.  Punctures outside
    the region are ignored; for plane domains ``∞`` is always a puncture.
    """

    kind: str
    params: tuple
    punctures: tuple = ()
    exclusion: float = DEFAULT_EXCLUSION
    edge: float = DEFAULT_EDGE

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DegenerateRegion(f"unknown domain kind {self.kind!r}")
        if not self.edge > 0:
            raise DegenerateRegion("target edge length must be positive")
        if not self.exclusion > 0:
            raise DegenerateRegion("exclusion radius must be positive")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        object.__setattr__(self, "punctures", tuple(as_point(p) for p in self.punctures))
        p = self.params
        if self.kind == "disk" and not (len(p) == 3 and p[0] > 0):
            raise DegenerateRegion("disk needs a positive radius")
        if self.kind == "annulus" and not (len(p) == 4 and 0 < p[0] < p[1]):
            raise DegenerateRegion("annulus needs 0 < r_in < r_out")
        if self.kind == "rectangle" and not (len(p) == 4 and p[0] < p[1] and p[2] < p[3]):
            raise DegenerateRegion("rectangle needs x0 < x1 and y0 < y1")
        if self.kind == "plane" and not (len(p) == 1 and p[0] > 0):
            raise DegenerateRegion("plane needs a positive truncation radius")

    # constructors --------------------------------------------------------------
    @classmethod
    def disk(cls, radius=1.0, center=0j, **kw) -> "DomainSpec":
        c = complex(center)
        return cls("disk", (radius, c.real, c.imag), **kw)

    @classmethod
    def annulus(cls, r_in, r_out, center=0j, **kw) -> "DomainSpec":
        c = complex(center)
        return cls("annulus", (r_in, r_out, c.real, c.imag), **kw)

    @classmethod
    def rectangle(cls, x0, x1, y0, y1, **kw) -> "DomainSpec":
        return cls("rectangle", (x0, x1, y0, y1), **kw)

    @classmethod
    def plane(cls, punctures=(), r_max=None, **kw) -> "DomainSpec":
        pts = [as_point(p) for p in punctures]
        if r_max is None:
            finite = [abs(p) for p in pts if not is_inf(p)]
            top = max(finite, default=0.0)
            r_max = 10.0 * top if top > 0 else 10.0
        if not any(is_inf(p) for p in pts):
            pts.append(INF)
        return cls("plane", (r_max,), tuple(pts), **kw)

    @classmethod
    def from_text(cls, text: str, punctures=(), **kw) -> "DomainSpec":
        """Parse ``disk:R[,cx,cy]``, ``annulus:r_in,r_out``,
        ``rectangle:x0,x1,y0,y1`` or ``plane[:R_max]``."""
        kind, _, rest = text.strip().partition(":")
        kind = kind.strip().lower()
        try:
            vals = [float(v) for v in rest.split(",")] if rest.strip() else []
        except ValueError as exc:
            raise ParseError(f"bad domain parameters in {text!r}") from exc
        if kind == "disk":
            r = vals[0] if vals else 1.0
            c = complex(*vals[1:3]) if len(vals) >= 3 else 0j
            return cls.disk(r, c, punctures=punctures, **kw)
        if kind == "annulus" and len(vals) in (2, 4):
            c = complex(*vals[2:4]) if len(vals) == 4 else 0j
            return cls.annulus(vals[0], vals[1], c, punctures=punctures, **kw)
        if kind in ("rectangle", "rect", "square") and len(vals) == 4:
            return cls.rectangle(*vals, punctures=punctures, **kw)
        if kind == "plane" and len(vals) <= 1:
            return cls.plane(punctures, vals[0] if vals else None, **kw)
        raise ParseError(f"cannot parse domain {text!r}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "params": list(self.params),
            "punctures": [format_point(p, 17) for p in self.punctures],
            "exclusion": self.exclusion,
            "edge": self.edge,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DomainSpec":
        return cls(
            d["kind"],
            tuple(d["params"]),
            tuple(parse_point(p) for p in d.get("punctures", [])),
            d.get("exclusion", DEFAULT_EXCLUSION),
            d.get("edge", DEFAULT_EDGE),
        )

    # geometry ------------------------------------------------------------------
    @property
    def center(self) -> complex:
        p = self.params
        if self.kind == "disk":
            return complex(p[1], p[2])
        if self.kind == "annulus":
            return complex(p[2], p[3])
        if self.kind == "rectangle":
            return complex((p[0] + p[1]) / 2, (p[2] + p[3]) / 2)
        return 0j

    @property
    def bounded(self) -> bool:
        return self.kind != "plane"

    def in_outer(self, z: np.ndarray) -> np.ndarray:
        """Inside the outer boundary (holes not removed)."""
        p = self.params
        if self.kind == "disk":
            return np.abs(z - self.center) < p[0]
        if self.kind == "annulus":
            return np.abs(z - self.center) < p[1]
        if self.kind == "rectangle":
            return (z.real > p[0]) & (z.real < p[1]) & (z.imag > p[2]) & (z.imag < p[3])
        return np.abs(z) < p[0]

    def distance_to_outer(self, z: complex) -> float:
        p = self.params
        if self.kind != "rectangle":
            r = p[1] if self.kind == "annulus" else p[0]
            return r - abs(z - self.center)
        return min(z.real - p[0], p[1] - z.real, z.imag - p[2], p[3] - z.imag)

    def holes(self) -> list[tuple[complex, float, str]]:
        """Excluded disks ``(center, radius, kind)`` inside the region."""
        out = []
        if self.kind == "annulus":
            out.append((self.center, self.params[0], "inner"))
        for p in self.punctures:
            if is_inf(p):
                continue
            if self.kind == "annulus" and abs(p - self.center) <= self.params[0]:
                continue
            if bool(self.in_outer(np.array([p]))[0]):
                out.append((complex(p), self.exclusion, "puncture"))
        return out

    def interior_punctures(self) -> list:
        pts = [c for c, _, k in self.holes() if k == "puncture"]
        if self.kind == "plane":
            pts.append(INF)
        return pts

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        ok = self.in_outer(z)
        for c, r, _ in self.holes():
            ok &= np.abs(z - c) > r
        return ok


def domain_is_complete(spec: MetricSpec, domain: DomainSpec) -> bool:
    """Complete iff the domain is a punctured plane and every puncture is complete."""
    if domain.bounded:
        return False
    return all(r.complete_at for r in classify_completeness(spec, domain.interior_punctures()))


@dataclass(frozen=True)
class PathPolyline:
    points: tuple
    divergent: bool = False

    def __post_init__(self):
        pts = tuple(complex(p) for p in self.points)
        if len(pts) < 2:
            raise ValueError("a path needs at least two points")
        if any(a == b for a, b in zip(pts, pts[1:])):
            raise ValueError("consecutive path points must be distinct")
        object.__setattr__(self, "points", pts)

    @property
    def closed(self) -> bool:
        return abs(self.points[0] - self.points[-1]) <= 1e-14 * max(1.0, abs(self.points[0]))

    @classmethod
    def circle(cls, center=0j, radius=1.0, n: int = 128) -> "PathPolyline":
        t = np.linspace(0, 2 * np.pi, n + 1)
        pts = complex(center) + radius * np.exp(1j * t)
        pts[-1] = pts[0]
        return cls(tuple(pts))

    @classmethod
    def segment(cls, a, b, n: int = 1) -> "PathPolyline":
        return cls(tuple(np.linspace(complex(a), complex(b), n + 1)))

    def euclidean_length(self) -> float:
        p = np.array(self.points)
        return float(np.sum(np.abs(np.diff(p))))

    def to_csv(self) -> str:
        rows = ["re,im"] + [f"{p.real!r},{p.imag!r}" for p in self.points]
        return "\n".join(rows) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "PathPolyline":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if lines and lines[0].replace(" ", "") == "re,im":
            lines = lines[1:]
        return cls(tuple(complex(float(a), float(b)) for a, b in (ln.split(",") for ln in lines)))


# ---------------------------------------------------------------------------
# mesh construction


def _hex_lattice(center: complex, half_width: float, h: float) -> np.ndarray:
    dy = h * math.sqrt(3) / 2
    nj = int(math.ceil(half_width / dy)) + 1
    ni = int(math.ceil(half_width / h)) + 1
    j = np.arange(-nj, nj + 1)
    i = np.arange(-ni, ni + 1)
    jj, ii = np.meshgrid(j, i, indexing="ij")
    x = ii * h + (jj % 2) * (h / 2)
    y = jj * dy
    return center + (x + 1j * y).ravel()


def _circle(center: complex, r: float, n: int, phase: float = 0.0) -> np.ndarray:
    t = phase + 2 * np.pi * np.arange(n) / n
    return center + r * np.exp(1j * t)


def _graded_rings(center: complex, r0: float, h: float, r_limit: float):
    """Concentric circles from ``r0`` outward until their spacing reaches ``h``."""
    n = max(RING_POINTS, int(math.ceil(2 * np.pi * r0 / h)))
    rho = 1 + 2 * np.pi / n
    pts = [_circle(center, r0, n)]
    r = r0
    k = 0
    while 2 * np.pi * r / n < h:
        r_next = r * rho
        if r_next > r_limit:
            break
        r = r_next
        k += 1
        pts.append(_circle(center, r, n, phase=np.pi * (k % 2) / n))
    return np.concatenate(pts), r


def _nearest_gap(domain: DomainSpec, c: complex, holes) -> float:
    d = domain.distance_to_outer(c)
    for c2, r2, _ in holes:
        if c2 != c:
            d = min(d, abs(c2 - c) - r2)
    return d


def _outer_boundary(domain: DomainSpec, h: float) -> np.ndarray:
    p = domain.params
    if domain.kind == "rectangle":
        x0, x1, y0, y1 = p
        nx = max(2, int(math.ceil((x1 - x0) / h)))
        ny = max(2, int(math.ceil((y1 - y0) / h)))
        xs = np.linspace(x0, x1, nx + 1)
        ys = np.linspace(y0, y1, ny + 1)
        return np.concatenate(
            [xs + 1j * y0, x1 + 1j * ys[1:], xs[::-1][1:] + 1j * y1, x0 + 1j * ys[::-1][1:-1]]
        )
    r = p[1] if domain.kind == "annulus" else p[0]
    n = max(RING_POINTS, int(math.ceil(2 * np.pi * r / h)))
    return _circle(domain.center, r, n)


def _plane_points(domain: DomainSpec, h: float, holes):
    """Uniform core disk plus log-polar rings out to ``R_max``."""
    r_max = domain.params[0]
    finite = [abs(c) + r for c, r, _ in holes]
    r_core = min(r_max, max(1.0, 1.5 * max(finite, default=0.0)))
    lattice = _hex_lattice(0j, r_core, h)
    lattice = lattice[np.abs(lattice) < r_core - 0.5 * h]
    n = max(RING_POINTS, int(math.ceil(2 * np.pi * r_core / h)))
    rho = 1 + 2 * np.pi / n
    radii = [r_core]
    while radii[-1] * rho < r_max * (1 - 0.5 * (rho - 1)):
        radii.append(radii[-1] * rho)
    rings = [_circle(0j, r, n, phase=np.pi * (k % 2) / n) for k, r in enumerate(radii)]
    boundary = _circle(0j, r_max, n)
    return lattice, np.concatenate(rings), boundary


def build_mesh(domain: DomainSpec) -> "DomainMesh":
    """Triangulate ``domain`` (deterministic for a given spec)."""
    h = domain.edge
    holes = domain.holes()
    for c, r, kind in holes:
        gap = _nearest_gap(domain, c, holes)
        if kind == "puncture" and r > 0.4 * (gap + r):
            raise DegenerateRegion(
                f"exclusion disk at {format_point(c)} is too large for its surroundings"
            )
        if gap <= 0:
            raise DegenerateRegion(f"excluded disk at {format_point(c)} meets another boundary")

    if domain.kind == "plane":
        interior, rings, outer = _plane_points(domain, h, holes)
        interior = np.concatenate([interior, rings])
    else:
        p = domain.params
        if domain.kind == "rectangle":
            half = max(p[1] - p[0], p[3] - p[2])
        else:
            half = p[1] if domain.kind == "annulus" else p[0]
        interior = _hex_lattice(domain.center, half, h)
        outer = _outer_boundary(domain, h)
        inside = domain.in_outer(interior)
        if domain.kind == "rectangle":
            x0, x1, y0, y1 = p
            inside &= (
                (interior.real > x0 + 0.5 * h)
                & (interior.real < x1 - 0.5 * h)
                & (interior.imag > y0 + 0.5 * h)
                & (interior.imag < y1 - 0.5 * h)
            )
        else:
            r_out = p[1] if domain.kind == "annulus" else p[0]
            inside &= np.abs(interior - domain.center) < r_out - 0.5 * h
        interior = interior[inside]

    hole_pts = []
    for c, r, kind in holes:
        gap = _nearest_gap(domain, c, holes)
        ring_pts, r_last = _graded_rings(c, r, h, r + 0.45 * gap)
        interior = interior[np.abs(interior - c) > r_last + 0.5 * h]
        hole_pts.append(ring_pts)

    pts = np.concatenate([outer, *hole_pts, interior])
    if len(pts) < 3:
        raise DegenerateRegion("too few points to triangulate")
    tri = Delaunay(np.column_stack([pts.real, pts.imag]))
    simplices = tri.simplices
    a, b, c = (pts[simplices[:, k]] for k in range(3))
    probes = [(a + b + c) / 3, (a + b) / 2, (b + c) / 2, (c + a) / 2]
    keep = np.ones(len(simplices), dtype=bool)
    for q in probes:
        keep &= _inside_closed(domain, holes, q)
    simplices = simplices[keep]
    if len(simplices) == 0:
        raise DegenerateRegion("no triangles inside the region")
    used = np.unique(simplices)
    remap = -np.ones(len(pts), dtype=int)
    remap[used] = np.arange(len(used))
    verts = pts[used]
    tris = remap[simplices]
    a, b, c = (verts[tris[:, k]] for k in range(3))
    area = ((b - a).conjugate() * (c - a)).imag
    flip = area < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    return DomainMesh(verts, tris, domain, holes)


def _inside_closed(domain: DomainSpec, holes, z: np.ndarray) -> np.ndarray:
    tol = 1e-9 * max(1.0, domain.edge)
    p = domain.params
    if domain.kind == "rectangle":
        ok = (
            (z.real > p[0] - tol)
            & (z.real < p[1] + tol)
            & (z.imag > p[2] - tol)
            & (z.imag < p[3] + tol)
        )
    else:
        r = p[1] if domain.kind == "annulus" else p[0]
        ok = np.abs(z - domain.center) < r + tol
    for c, r, _ in holes:
        # chords of a hole circle lie slightly inside it
        ok &= np.abs(z - c) > r * math.cos(np.pi / RING_POINTS) * (1 - 1e-9)
    return ok


class DomainMesh:
    """Immutable triangle mesh of a :class:`DomainSpec`.

    Attributes
    ----------
    vertices : complex ndarray (V,)
    triangles : int ndarray (T, 3), counter-clockwise
    edges : int ndarray (E, 2), each undirected edge once
    boundary : bool ndarray (V,), true on topological boundary vertices
    boundary_kind : ndarray of str (V,), one of ``outer``, ``inner``,
        ``puncture``, ``truncation`` or ``""`` for interior vertices
    """

    def __init__(self, vertices, triangles, domain: DomainSpec, holes=None):
        self.vertices = np.asarray(vertices, dtype=complex)
        self.triangles = np.asarray(triangles, dtype=np.int64)
        self.domain = domain
        self.holes = list(holes if holes is not None else domain.holes())
        if len(self.vertices) == 0 or len(self.triangles) == 0:
            raise EmptyMesh("mesh has no triangles")
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        key = np.sort(e, axis=1)
        uniq, counts = np.unique(key, axis=0, return_counts=True)
        if np.any(counts > 2):
            raise DegenerateRegion("mesh is not edge-manifold")
        self.edges = uniq
        self.edge_lengths = np.abs(self.vertices[uniq[:, 1]] - self.vertices[uniq[:, 0]])
        bnd_edges = uniq[counts == 1]
        self.boundary_edges = bnd_edges
        self.boundary = np.zeros(len(self.vertices), dtype=bool)
        self.boundary[bnd_edges.ravel()] = True
        self.boundary_kind = self._classify_boundary()
        for arr in (self.vertices, self.triangles, self.edges, self.edge_lengths, self.boundary):
            arr.flags.writeable = False
        self.notes: list[str] = []
        if domain.kind == "plane":
            self.notes.append(
                f"plane domain truncated at R_max = {domain.params[0]:g}; "
                "distances to the truncation circle depend on this choice"
            )

    def _classify_boundary(self) -> np.ndarray:
        kinds = np.full(len(self.vertices), "", dtype=object)
        idx = np.nonzero(self.boundary)[0]
        z = self.vertices[idx]
        outer_kind = "truncation" if self.domain.kind == "plane" else "outer"
        d_outer = np.abs(np.array([self.domain.distance_to_outer(v) for v in z]))
        best = d_outer
        lab = np.full(len(idx), outer_kind, dtype=object)
        for c, r, kind in self.holes:
            d = np.abs(np.abs(z - c) - r)
            closer = d < best
            best = np.where(closer, d, best)
            lab[closer] = kind
        kinds[idx] = lab
        return kinds

    def __len__(self):
        return len(self.vertices)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def euler_characteristic(self) -> int:
        return len(self.vertices) - len(self.edges) + len(self.triangles)

    @property
    def simply_connected(self) -> bool:
        return self.euler_characteristic == 1

    def nearest_vertex(self, z) -> int:
        return int(np.argmin(np.abs(self.vertices - complex(z))))

    @cached_property
    def adjacency(self):
        """Symmetric CSR matrix with Euclidean edge lengths as weights."""
        n = len(self.vertices)
        i, j = self.edges[:, 0], self.edges[:, 1]
        w = self.edge_lengths
        m = coo_matrix((np.concatenate([w, w]), (np.concatenate([i, j]), np.concatenate([j, i]))), shape=(n, n))
        return m.tocsr()

    @cached_property
    def boundary_hops(self) -> np.ndarray:
        """Number of edges from each vertex to the nearest boundary vertex."""
        hop = self.adjacency.copy()
        hop.data[:] = 1.0
        src = np.nonzero(self.boundary)[0]
        d = dijkstra(hop, directed=False, indices=src, min_only=True)
        return d

    def interior_vertices(self, rings: int = 2) -> np.ndarray:
        """Indices of vertices more than ``rings`` edges from the boundary."""
        return np.nonzero(self.boundary_hops > rings)[0]

    def spanning_tree(self, root: int, method: str = "bfs"):
        """Parent array and processing order of a spanning tree.

        ``bfs`` uses breadth-first search; ``shortest`` uses Euclidean
        shortest paths.  Returns ``(order, parent)`` with ``parent[root] = -1``.
        """
        if method == "bfs":
            order, pred = breadth_first_order(self.adjacency, root, directed=False, return_predecessors=True)
        elif method == "shortest":
            dist, pred = dijkstra(self.adjacency, directed=False, indices=root, return_predecessors=True)
            order = np.argsort(dist, kind="stable")
            order = order[np.isfinite(dist[order])]
        else:
            raise ValueError(f"unknown tree method {method!r}")
        parent = np.asarray(pred, dtype=np.int64)
        parent[parent < 0] = -1
        parent[root] = -1
        if len(order) != len(self.vertices):
            raise DegenerateRegion("mesh is not connected")
        return np.asarray(order), parent

    # serialization ------------------------------------------------------------------
    def to_obj(self) -> str:
        lines = [f"# domain: {json.dumps(self.domain.to_dict())}"]
        lines += [f"v {float(z.real)!r} {float(z.imag)!r} 0.0" for z in self.vertices]
        lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in self.triangles]
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(
            {
                "domain": self.domain.to_dict(),
                "vertices": [[z.real, z.imag] for z in self.vertices],
                "triangles": self.triangles.tolist(),
                "boundary": self.boundary.tolist(),
                "boundary_kind": [str(k) for k in self.boundary_kind],
                "notes": self.notes,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "DomainMesh":
        d = json.loads(text)
        verts = np.array([complex(x, y) for x, y in d["vertices"]])
        return cls(verts, np.array(d["triangles"]), DomainSpec.from_dict(d["domain"]))


# ---------------------------------------------------------------------------
# distances


def _finite_boundary(mesh: DomainMesh, spec: MetricSpec) -> np.ndarray:
    """Boundary vertices at finite distance: puncture circles count only
    when the metric is incomplete at that puncture."""
    kinds = mesh.boundary_kind
    ok = mesh.boundary & (kinds != "puncture") & (kinds != "truncation")
    for c, r, kind in mesh.holes:
        if kind != "puncture":
            continue
        if local_exponent(spec.g, spec.omega, spec.m, c) > -1:
            near = np.abs(np.abs(mesh.vertices - c) - r) <= 1e-9 + 1e-6 * r
            ok |= mesh.boundary & near & (kinds == "puncture")
    if mesh.domain.kind == "plane":
        if local_exponent(spec.g, spec.omega, spec.m, INF) > -1:
            ok |= mesh.boundary & (kinds == "truncation")
    return np.nonzero(ok)[0]


def graph_edges(mesh: DomainMesh, rings: int = DISTANCE_RINGS) -> np.ndarray:
    """Mesh edges plus straight shortcuts to every vertex within ``rings`` hops.

    Plain edge paths on a near-hexagonal mesh only move in six directions and
    overestimate distances by up to 15%, independent of the edge length.
    Shortcuts reach far more directions.  A shortcut is dropped when its
    chord crosses an excluded disk, so no path jumps over a puncture.
    """
    key = int(rings)
    cache = mesh.__dict__.setdefault("_graph_edges", {})
    if key in cache:
        return cache[key]
    if rings <= 1:
        cache[key] = mesh.edges
        return mesh.edges
    hop = mesh.adjacency.copy()
    hop.data[:] = 1.0
    reach = hop.copy()
    for _ in range(rings - 1):
        reach = reach + reach @ hop
    reach = reach.tocoo()
    keep = reach.row < reach.col
    e = np.stack([reach.row[keep], reach.col[keep]], axis=1).astype(np.int64)
    z = mesh.vertices
    a, b = z[e[:, 0]], z[e[:, 1]]
    ok = np.ones(len(e), dtype=bool)
    d = b - a
    for c, r, _ in mesh.holes:
        t = np.clip(((c - a) * d.conjugate()).real / np.abs(d) ** 2, 0.0, 1.0)
        ok &= np.abs(a + t * d - c) > r * (1 - 1e-9)
    # the mesh edges themselves always stay
    n = mesh.n_vertices
    direct = np.isin(e[:, 0] * n + e[:, 1], mesh.edges[:, 0] * n + mesh.edges[:, 1])
    e = e[ok | direct]
    cache[key] = e
    return e


def metric_graph(mesh: DomainMesh, spec: MetricSpec, rings: int = DISTANCE_RINGS):
    """CSR matrix of metric lengths of :func:`graph_edges`.

    Each straight segment gets Simpson's rule ``|b-a|(λ(a) + 4λ(m) + λ(b))/6``.
    """
    e = graph_edges(mesh, rings)
    z = mesh.vertices
    a, b = z[e[:, 0]], z[e[:, 1]]
    lam_v = _conformal_factor(spec, z)
    lam_m = _conformal_factor(spec, 0.5 * (a + b))
    w = np.abs(b - a) * (lam_v[e[:, 0]] + 4 * lam_m + lam_v[e[:, 1]]) / 6
    n = mesh.n_vertices
    i, j = e[:, 0], e[:, 1]
    return coo_matrix((np.concatenate([w, w]), (np.concatenate([i, j]), np.concatenate([j, i]))), shape=(n, n)).tocsr()


def geodesic_distances_to_boundary(mesh: DomainMesh, spec: MetricSpec, rings: int = DISTANCE_RINGS) -> np.ndarray:
    """Distance from every vertex to the boundary in the metric of ``spec``.

    Boundary components that lie at infinite distance (complete punctures)
    are not sources; if none remain the result is all ``inf``.
    """
    if not np.any(mesh.boundary):
        raise NoBoundary("mesh has no boundary vertices")
    src = _finite_boundary(mesh, spec)
    if len(src) == 0:
        return np.full(mesh.n_vertices, np.inf)
    return dijkstra(metric_graph(mesh, spec, rings), directed=False, indices=src, min_only=True)


def geodesic_distance_to_boundary(mesh: DomainMesh, spec: MetricSpec, p: int) -> float:
    return float(geodesic_distances_to_boundary(mesh, spec)[p])


# ---------------------------------------------------------------------------
# path integrals


def _segment_distance(p: complex, a: complex, b: complex) -> float:
    d = b - a
    t = ((p - a) * d.conjugate()).real / (abs(d) ** 2)
    t = min(1.0, max(0.0, t))
    return abs(p - (a + t * d))


def _check_poles(points, poles, exclusion: float) -> None:
    for pole in poles:
        for a, b in zip(points, points[1:]):
            if _segment_distance(pole, a, b) < exclusion:
                raise PoleOnPath(f"path passes within {exclusion:g} of the pole {format_point(pole)}")


def form_poles(form: OneForm) -> list[complex]:
    coef = form.coefficient
    if coef.is_polynomial:
        return []
    return [p for p, k in coef.zeros_and_poles() if k < 0 and not is_inf(p)]


def integrate_form_along(
    path: PathPolyline,
    form: OneForm,
    *,
    order: int = DEFAULT_ORDER,
    tol: float = DEFAULT_TOL,
    exclusion: float = 1e-6,
) -> complex:
    """``∫ ω`` along the polyline by adaptive Gauss-Legendre quadrature."""
    if not isinstance(form, OneForm):
        form = OneForm(form, allow_zero=True)
    _check_poles(path.points, form_poles(form), exclusion)
    f = form.coefficient
    return sum(
        (integrate_segment(f, a, b, order=order, tol=tol) for a, b in zip(path.points, path.points[1:])),
        0j,
    )


def metric_length(path: PathPolyline, spec: MetricSpec, *, tol: float = DEFAULT_TOL, exclusion: float = 1e-12) -> float:
    """``∫ λ |dz|`` along the polyline."""
    poles = [p for p in spec.domain_punctures if not is_inf(p)]
    _check_poles(path.points, poles, exclusion)

    def lam(z):
        return _conformal_factor(spec, np.asarray(z, dtype=complex))

    total = 0.0
    for a, b in zip(path.points, path.points[1:]):
        total += integrate_segment(lam, a, b, tol=tol, arc=True).real
    return total


def divergent_length(spec: MetricSpec, start: complex, puncture, exclusion: float = DEFAULT_EXCLUSION) -> float:
    """Length of the straight ray from ``start`` into ``puncture``.

    The ray is integrated numerically up to the exclusion circle; the last
    piece uses the local exponent ``k``: infinite when ``k ≤ -1``, otherwise
    ``λ(ε) ε / (k + 1)``.  For ``∞`` the ray runs radially outward and the
    exclusion radius is measured in the chart ``w = 1/z``.
    """
    start = complex(start)
    k = local_exponent(spec.g, spec.omega, spec.m, puncture)
    if is_inf(puncture):
        u = start / abs(start) if start != 0 else 1.0
        end = u / exclusion
        body = metric_length(PathPolyline((start, end)), spec)
        lam_w = _conformal_factor(spec, np.array([end]))[0] * abs(end) ** 2
    else:
        p = complex(puncture)
        u = (start - p) / abs(start - p)
        end = p + exclusion * u
        body = metric_length(PathPolyline((start, end)), spec)
        lam_w = _conformal_factor(spec, np.array([end]))[0]
    if k <= -1:
        return math.inf
    return body + lam_w * exclusion / (k + 1)


def puncture_loops(mesh_or_domain, n: int = 256) -> list[tuple[complex, PathPolyline]]:
    """One closed polygon around each excluded disk of the domain.

    Each loop is a circle midway between the hole and its nearest
    neighbour, so it encloses exactly one puncture (or the annulus hole).
    """
    domain = mesh_or_domain.domain if isinstance(mesh_or_domain, DomainMesh) else mesh_or_domain
    holes = domain.holes()
    loops = []
    for c, r, _ in holes:
        gap = _nearest_gap(domain, c, holes)
        radius = r + 0.5 * gap
        loops.append((c, PathPolyline.circle(c, radius, n)))
    return loops


def period_check(mesh: DomainMesh, form: OneForm, loops: Sequence[PathPolyline] | None = None) -> list[complex]:
    """Period of ``form`` around each loop (default: :func:`puncture_loops`)."""
    if loops is None:
        loops = [lp for _, lp in puncture_loops(mesh)]
    return [integrate_form_along(lp, form) for lp in loops]
