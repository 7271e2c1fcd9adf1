"""Surfaces built from Weierstrass-type data on a mesh.

Five classes are supported:

``minimal``
    ``X = 2 Re ∫ (φ1, φ2, φ3)`` with ``φ1 = ½(1-g²)ω``,
    ``φ2 = (i/2)(1+g²)ω``, ``φ3 = gω``; induced metric ``(1+|g|²)²|ω|²``.
``cmc1`` (and ``cmc1-dual``)
    ``F⁻¹dF = [[g, -g²], [1, -g]] ω`` with ``F(z0) = I`` and ``f = F F*``,
    a point of hyperbolic space in the Hermitian model.
``maxface``
    ``f = Re ∫ (-2g, 1+g², i(1-g²)) ω`` in Lorentz-Minkowski 3-space
    (signature ``- + +``); singular where ``|g| = 1``.
``improper-affine``
    ``ψ = (G + F̄, (|G|²-|F|²)/2 + Re(GF - 2∫F dG))`` for holomorphic
    ``F, G``; Lagrangian Gauss map ``ν = dF/dG``.
``flat-front``
    ``𝓛⁻¹d𝓛 = [[0, θ], [ω, 0]]`` with ``f = 𝓛𝓛*``; ``ρ = θ/ω``.

Path integrals follow a spanning tree of the mesh from the base point.
Frames are integrated with classical RK4 on every tree edge, sub-stepped
where the generator is large, with one Richardson halving when the
determinant drifts by more than 1e-10, then rescaled to determinant 1.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import (
    ConstantHyperbolicGaussMap,
    DegenerateData,
    DegenerateGauss,
    EmptyMesh,
    ExactnessObstruction,
    InvalidMetric,
    NotSimplyConnected,
    PeriodObstruction,
    StepSizeUnderflow,
    UnsupportedChart,
)
from .mero import MeroExpr, OneForm, is_inf
from .mesh import DomainMesh, integrate_form_along, puncture_loops
from .metric import MetricSpec, conformal_factor
from .parsing import format_point

CLASSES = ("minimal", "cmc1", "cmc1-dual", "maxface", "improper-affine", "flat-front")
H3_CLASSES = ("cmc1", "cmc1-dual", "flat-front")
CHARTS = ("poincare-ball", "upper-half-space", "hermitian")
SINGULAR_TOL = 1e-6
DET_STEP_TOL = 1e-10
DET_FAIL_TOL = 1e-6
STEP_SCALE = 0.02
PERIOD_TOL = 1e-8


def _expr(x) -> MeroExpr | None:
    return None if x is None else MeroExpr.coerce(x)


def _form(x) -> OneForm | None:
    if x is None or isinstance(x, OneForm):
        return x
    return OneForm(x, allow_zero=True)


@dataclass(frozen=True)
class WData:
    """Weierstrass-type data for one surface class.

    ``g, omega`` are used by minimal, CMC-1 and maxface data; ``F, G`` by
    improper affine data; ``omega, theta`` by flat fronts.  For CMC-1 data
    an exact rational hyperbolic Gauss map may be supplied as
    ``hyperbolic_gauss``; it must belong to the base point ``z0``.
    """

    cls: str
    g: MeroExpr | None = None
    omega: OneForm | None = None
    F: MeroExpr | None = None
    G: MeroExpr | None = None
    theta: OneForm | None = None
    z0: complex = 0j
    hyperbolic_gauss: MeroExpr | None = None

    def __post_init__(self):
        if self.cls not in CLASSES:
            raise ValueError(f"unknown surface class {self.cls!r}")
        for name in ("g", "F", "G", "hyperbolic_gauss"):
            object.__setattr__(self, name, _expr(getattr(self, name)))
        for name in ("omega", "theta"):
            object.__setattr__(self, name, _form(getattr(self, name)))
        object.__setattr__(self, "z0", complex(self.z0))
        if self.cls in ("minimal", "cmc1", "cmc1-dual", "maxface"):
            if self.g is None or self.omega is None:
                raise DegenerateData(f"{self.cls} data needs g and omega")
            if self.omega.is_zero:
                raise DegenerateData("omega vanishes identically")
        elif self.cls == "improper-affine":
            if self.F is None or self.G is None:
                raise DegenerateData("improper affine data needs F and G")
            if self.G.is_constant:
                raise DegenerateData("G must be nonconstant so that ν = dF/dG is defined")
        else:
            if self.omega is None:
                raise DegenerateData("flat-front data needs omega")
            if self.omega.is_zero:
                raise DegenerateData("omega vanishes identically")
            if self.theta is None:
                object.__setattr__(self, "theta", OneForm(0, allow_zero=True))

    # constructors ------------------------------------------------------------
    @classmethod
    def minimal(cls, g, omega, z0=0j) -> "WData":
        return cls("minimal", g=g, omega=omega, z0=z0)

    @classmethod
    def cmc1(cls, g, omega, z0=0j, hyperbolic_gauss=None) -> "WData":
        return cls("cmc1", g=g, omega=omega, z0=z0, hyperbolic_gauss=hyperbolic_gauss)

    @classmethod
    def maxface(cls, g, omega, z0=0j) -> "WData":
        return cls("maxface", g=g, omega=omega, z0=z0)

    @classmethod
    def improper_affine(cls, F, G, z0=0j) -> "WData":
        return cls("improper-affine", F=F, G=G, z0=z0)

    @classmethod
    def flat_front(cls, omega, theta=None, z0=0j) -> "WData":
        return cls("flat-front", omega=omega, theta=theta, z0=z0)

    # derived quantities ----------------------------------------------------------
    @property
    def gauss_map(self) -> MeroExpr:
        """``g``, ``ν = dF/dG`` or ``ρ = θ/ω`` depending on the class."""
        if self.cls == "improper-affine":
            return self.F.derivative() / self.G.derivative()
        if self.cls == "flat-front":
            return self.theta.coefficient / self.omega.coefficient
        return self.g

    def lift_metric(self, punctures=None) -> MetricSpec:
        """The class's conformal metric as a :class:`MetricSpec`.

        ``(g, ω, 2)`` for minimal, CMC-1 and the maxface lift;
        ``(ν, √2 dG, 1)`` for improper affine fronts; ``(ρ, ω, 1)`` for
        flat fronts.
        """
        if self.cls == "improper-affine":
            return MetricSpec(self.gauss_map, OneForm(math.sqrt(2) * self.G.derivative()), 1, punctures)
        if self.cls == "flat-front":
            return MetricSpec(self.gauss_map, self.omega, 1, punctures)
        return MetricSpec(self.g, self.omega, 2, punctures)

    def hopf_coefficient(self) -> MeroExpr:
        """``q`` with ``Q = ω dg = q dz²``."""
        return self.omega.coefficient * self.g.derivative()

    def to_dict(self) -> dict:
        out = {"class": self.cls, "z0": format_point(self.z0, 17)}
        for name in ("g", "F", "G", "hyperbolic_gauss"):
            v = getattr(self, name)
            if v is not None:
                out[name] = v.to_text()
        for name in ("omega", "theta"):
            v = getattr(self, name)
            if v is not None:
                out[name] = v.coefficient.to_text()
        return out


@dataclass
class SurfaceModel:
    """A surface sampled at the vertices of a mesh.

    ``positions`` holds three real coordinates per vertex: Euclidean for
    minimal and affine surfaces, ``(x1, x2, x3)`` with time coordinate
    ``x1`` for maxfaces, and ``(x1, x2, x3)`` of the Minkowski model for
    hyperbolic classes (whose Hermitian matrices are in ``hermitian``).
    """

    cls: str
    data: WData
    mesh: DomainMesh
    positions: np.ndarray
    singular: np.ndarray
    metric: MetricSpec
    gauss: np.ndarray
    hermitian: np.ndarray | None = None
    frames: np.ndarray | None = None
    lift: np.ndarray | None = None
    hyperbolic_gauss: np.ndarray | None = None
    flags: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    @property
    def singular_count(self) -> int:
        return int(np.count_nonzero(self.singular))


# ---------------------------------------------------------------------------
# integration helpers


_GL_X, _GL_W = leggauss(8)


def _tree_layers(order: np.ndarray, parent: np.ndarray):
    depth = np.zeros(len(parent), dtype=np.int64)
    for v in order[1:]:
        depth[v] = depth[parent[v]] + 1
    layers = []
    srt = np.argsort(depth, kind="stable")
    bounds = np.searchsorted(depth[srt], np.arange(depth.max() + 2))
    for d in range(1, depth.max() + 1):
        layers.append(srt[bounds[d] : bounds[d + 1]])
    return layers


def _segment_integrals(exprs, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Fixed 8-point Gauss-Legendre integrals of each expr from ``a`` to ``b``."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    pts = mid[:, None] + half[:, None] * _GL_X[None, :]
    out = np.empty((len(a), len(exprs)), dtype=complex)
    for k, e in enumerate(exprs):
        out[:, k] = (e(pts) @ _GL_W) * half
    return out


def _start_path(mesh: DomainMesh, z0: complex, root: int):
    target = mesh.vertices[root]
    n = max(1, int(math.ceil(abs(target - z0) / mesh.domain.edge)))
    return np.linspace(z0, target, n + 1)


def tree_integrals(mesh: DomainMesh, exprs, z0: complex, method: str = "bfs") -> np.ndarray:
    """``∫_{z0}^{v} e(z) dz`` for every vertex ``v`` and expr ``e``.

    The path runs straight from ``z0`` to the nearest vertex, then along the
    spanning tree.
    """
    exprs = [MeroExpr.coerce(e) for e in exprs]
    root = mesh.nearest_vertex(z0)
    order, parent = mesh.spanning_tree(root, method)
    out = np.zeros((mesh.n_vertices, len(exprs)), dtype=complex)
    path = _start_path(mesh, complex(z0), root)
    if len(path) > 1 and path[0] != path[-1]:
        out[root] = _segment_integrals(exprs, path[:-1], path[1:]).sum(axis=0)
    child = order[1:]
    edge_int = np.zeros((mesh.n_vertices, len(exprs)), dtype=complex)
    edge_int[child] = _segment_integrals(exprs, mesh.vertices[parent[child]], mesh.vertices[child])
    for layer in _tree_layers(order, parent):
        out[layer] = out[parent[layer]] + edge_int[layer]
    return out


def _gen(entries, z: np.ndarray) -> np.ndarray:
    m = np.empty(z.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = entries[0](z)
    m[..., 0, 1] = entries[1](z)
    m[..., 1, 0] = entries[2](z)
    m[..., 1, 1] = entries[3](z)
    return m


def _rk4(entries, F: np.ndarray, za: np.ndarray, zb: np.ndarray, nsub: int) -> np.ndarray:
    dz = (zb - za) / nsub
    for s in range(nsub):
        z0 = za + s * dz
        zm = z0 + 0.5 * dz
        z1 = z0 + dz
        M0 = _gen(entries, z0) * dz[:, None, None]
        Mm = _gen(entries, zm) * dz[:, None, None]
        M1 = _gen(entries, z1) * dz[:, None, None]
        k1 = F @ M0
        k2 = (F + 0.5 * k1) @ Mm
        k3 = (F + 0.5 * k2) @ Mm
        k4 = (F + k3) @ M1
        F = F + (k1 + 2 * k2 + 2 * k3 + k4) / 6
    return F


def _det(F: np.ndarray) -> np.ndarray:
    return F[:, 0, 0] * F[:, 1, 1] - F[:, 0, 1] * F[:, 1, 0]


def _frame_step(entries, F: np.ndarray, za: np.ndarray, zb: np.ndarray, stats: dict) -> np.ndarray:
    size = np.linalg.norm(_gen(entries, 0.5 * (za + zb)).reshape(len(za), 4), axis=1)
    nsub = np.maximum(1, np.ceil(size * np.abs(zb - za) / STEP_SCALE)).astype(int)
    out = np.empty_like(F)
    for n in np.unique(nsub):
        sel = nsub == n
        full = _rk4(entries, F[sel], za[sel], zb[sel], int(n))
        det0 = _det(F[sel])
        drift = np.abs(_det(full) / det0 - 1)
        bad = drift > DET_STEP_TOL
        if np.any(bad):
            idx = np.nonzero(sel)[0][bad]
            half = _rk4(entries, F[idx], za[idx], zb[idx], 2 * int(n))
            full[bad] = half + (half - full[bad]) / 15
            drift[bad] = np.abs(_det(full[bad]) / det0[bad] - 1)
        stats["max_step_drift"] = max(stats.get("max_step_drift", 0.0), float(drift.max(initial=0.0)))
        if np.any(drift > DET_FAIL_TOL):
            raise StepSizeUnderflow("determinant drift stays above tolerance after halving")
        out[sel] = full
    d = _det(out)
    return out / np.sqrt(d)[:, None, None]


def tree_frames(mesh: DomainMesh, entries, z0: complex, method: str = "bfs"):
    """Integrate ``F' = F · M(z)`` with ``F(z0) = I`` over the mesh.

    ``entries`` are four rational functions ``(m11, m12, m21, m22)``.
    Returns the frames and a stats dict with the largest per-step relative
    determinant drift observed before rescaling.
    """
    entries = [MeroExpr.coerce(e) for e in entries]
    root = mesh.nearest_vertex(z0)
    order, parent = mesh.spanning_tree(root, method)
    stats: dict = {"max_step_drift": 0.0}
    frames = np.zeros((mesh.n_vertices, 2, 2), dtype=complex)
    start = np.eye(2, dtype=complex)[None]
    path = _start_path(mesh, complex(z0), root)
    for a, b in zip(path[:-1], path[1:]):
        if a != b:
            start = _frame_step(entries, start, np.array([a]), np.array([b]), stats)
    frames[root] = start[0]
    for layer in _tree_layers(order, parent):
        p = parent[layer]
        frames[layer] = _frame_step(entries, frames[p], mesh.vertices[p], mesh.vertices[layer], stats)
    return frames, stats


# ---------------------------------------------------------------------------
# preconditions


def _require_nonempty(mesh: DomainMesh):
    if mesh is None or mesh.n_vertices == 0:
        raise EmptyMesh("mesh is empty")


def _require_regular(spec: MetricSpec, mesh: DomainMesh, what: str):
    for p in spec.natural_punctures:
        if is_inf(p):
            continue
        if bool(mesh.domain.contains(np.array([p]))[0]):
            raise InvalidMetric(f"{what} degenerates at {format_point(p)} inside the domain")


def _require_no_poles(exprs, mesh: DomainMesh, what: str):
    for e in exprs:
        if e.is_polynomial:
            continue
        for p, k in e.zeros_and_poles():
            if k < 0 and not is_inf(p) and bool(mesh.domain.contains(np.array([p]))[0]):
                raise InvalidMetric(f"{what} has a pole at {format_point(p)} inside the domain")


def _check_real_periods(mesh: DomainMesh, exprs, err):
    loops = puncture_loops(mesh)
    for center, loop in loops:
        for e in exprs:
            per = integrate_form_along(loop, OneForm(e, allow_zero=True))
            scale = max(1.0, abs(per))
            if abs(per.real) > PERIOD_TOL * scale:
                raise err(
                    f"period around {format_point(center)} has real part {per.real:.3e}"
                )


def _require_simply_connected(mesh: DomainMesh):
    if not mesh.simply_connected:
        raise NotSimplyConnected(
            f"mesh Euler characteristic is {mesh.euler_characteristic}, not 1"
        )


def _rank_flag(gmap: MeroExpr, label: str) -> dict:
    return {"rigidity": label} if gmap.is_constant else {}


# ---------------------------------------------------------------------------
# builders


def minimal_forms(data: WData):
    g, w = data.g, data.omega.coefficient
    return (0.5 * (1 - g * g) * w, 0.5j * (1 + g * g) * w, g * w)


def build_minimal(data: WData, mesh: DomainMesh, *, tree: str = "bfs", singular_tol: float = SINGULAR_TOL) -> SurfaceModel:
    """Minimal surface ``X = 2 Re ∫ φ`` sampled on the mesh."""
    _require_nonempty(mesh)
    spec = data.lift_metric()
    _require_regular(spec, mesh, "the metric (1+|g|²)²|ω|²")
    forms = minimal_forms(data)
    _check_real_periods(mesh, forms, PeriodObstruction)
    X = 2 * tree_integrals(mesh, forms, data.z0, tree).real
    gz = data.g(mesh.vertices)
    return SurfaceModel(
        "minimal",
        data,
        mesh,
        X,
        np.zeros(mesh.n_vertices, dtype=bool),
        spec,
        np.asarray(gz),
        flags=_rank_flag(data.g, "plane"),
    )


def maxface_forms(data: WData):
    g, w = data.g, data.omega.coefficient
    return (-2 * g * w, (1 + g * g) * w, 1j * (1 - g * g) * w)


def build_maxface(data: WData, mesh: DomainMesh, *, tree: str = "bfs", singular_tol: float = SINGULAR_TOL) -> SurfaceModel:
    """Maxface ``f = Re ∫ (-2g, 1+g², i(1-g²)) ω`` in Minkowski 3-space."""
    _require_nonempty(mesh)
    if data.g.is_constant and abs(abs(complex(data.g.at(0))) - 1) <= singular_tol:
        raise DegenerateGauss("|g| ≡ 1: the surface is nowhere space-like")
    spec = data.lift_metric()
    _require_regular(spec, mesh, "the lift metric (1+|g|²)²|ω|²")
    forms = maxface_forms(data)
    _check_real_periods(mesh, forms, PeriodObstruction)
    f = tree_integrals(mesh, forms, data.z0, tree).real
    gz = np.asarray(data.g(mesh.vertices))
    singular = np.abs(np.abs(gz) - 1) <= singular_tol
    return SurfaceModel(
        "maxface",
        data,
        mesh,
        f,
        singular,
        spec,
        gz,
        flags=_rank_flag(data.g, "plane"),
        info={"induced_metric": "(1-|g|^2)^2 |omega|^2", "lift_metric": "(1+|g|^2)^2 |omega|^2"},
    )


def _cmc1_entries(g: MeroExpr, w: MeroExpr):
    return (g * w, -(g * g) * w, w, -g * w)


def hyperbolic_gauss_values(g: MeroExpr, frames: np.ndarray, z: np.ndarray) -> np.ndarray:
    """``G = dF11/dF21 = (F11 g + F12)/(F21 g + F22)`` per vertex."""
    gz = np.asarray(g(z))
    big = ~(np.abs(gz) <= 1)
    out = np.empty(len(z), dtype=complex)
    F = frames
    s = ~big
    num = F[s, 0, 0] * gz[s] + F[s, 0, 1]
    den = F[s, 1, 0] * gz[s] + F[s, 1, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        out[s] = num / den
    if np.any(big):
        gh = np.asarray(g.reciprocal()(z[big]))
        num = F[big, 0, 0] + F[big, 0, 1] * gh
        den = F[big, 1, 0] + F[big, 1, 1] * gh
        with np.errstate(divide="ignore", invalid="ignore"):
            out[big] = num / den
    out[~np.isfinite(out)] = complex(np.inf, 0)
    return out


def hermitian_to_minkowski(f: np.ndarray) -> np.ndarray:
    """``(x0, x1, x2, x3)`` from ``f = [[x0+x3, x1+i x2], [x1-i x2, x0-x3]]``."""
    x0 = 0.5 * (f[:, 0, 0] + f[:, 1, 1]).real
    x3 = 0.5 * (f[:, 0, 0] - f[:, 1, 1]).real
    x1 = f[:, 0, 1].real
    x2 = f[:, 0, 1].imag
    return np.column_stack([x0, x1, x2, x3])


def build_cmc1(data: WData, mesh: DomainMesh, *, tree: str = "bfs", singular_tol: float = SINGULAR_TOL) -> SurfaceModel:
    """CMC-1 surface ``f = F F*`` from the holomorphic null frame ``F``."""
    _require_nonempty(mesh)
    _require_simply_connected(mesh)
    spec = data.lift_metric()
    _require_regular(spec, mesh, "the metric (1+|g|²)²|ω|²")
    entries = _cmc1_entries(data.g, data.omega.coefficient)
    _require_no_poles(entries, mesh, "the frame generator")
    frames, stats = tree_frames(mesh, entries, data.z0, tree)
    herm = frames @ np.conj(np.swapaxes(frames, 1, 2))
    mink = hermitian_to_minkowski(herm)
    G = hyperbolic_gauss_values(data.g, frames, mesh.vertices)
    det = _det(frames)
    flags = {}
    if data.g.is_constant:
        flags["rigidity"] = "horosphere"
    model = SurfaceModel(
        data.cls,
        data,
        mesh,
        mink[:, 1:],
        np.zeros(mesh.n_vertices, dtype=bool),
        spec,
        np.asarray(data.g(mesh.vertices)),
        hermitian=herm,
        frames=frames,
        hyperbolic_gauss=G,
        flags=flags,
        info={
            "max_step_det_drift": stats["max_step_drift"],
            "max_det_error": float(np.max(np.abs(det - 1))),
        },
    )
    return model


def dual_cmc1(data: WData) -> WData:
    """Exact dual data ``(G, -Q/dG)`` with ``Q = ω dg``.

    Requires the rational hyperbolic Gauss map ``data.hyperbolic_gauss``.
    The result records ``g`` as its own hyperbolic Gauss map, so applying
    the dual twice returns the original data.
    """
    if data.cls not in ("cmc1", "cmc1-dual"):
        raise ValueError("dual data is defined for CMC-1 data only")
    G = data.hyperbolic_gauss
    if data.g.is_constant or G is None and data.g.derivative().is_zero:
        raise ConstantHyperbolicGaussMap("Q = ω dg vanishes: the surface is a horosphere")
    if G is None:
        raise ValueError("no rational hyperbolic Gauss map is known for this data")
    if G.is_constant:
        raise ConstantHyperbolicGaussMap("G is constant: the dual is undefined")
    q = data.hopf_coefficient()
    w_dual = -q / G.derivative()
    cls = "cmc1-dual" if data.cls == "cmc1" else "cmc1"
    return WData(cls, g=G, omega=OneForm(w_dual), z0=data.z0, hyperbolic_gauss=data.g)


def numeric_dual(g: MeroExpr, omega_hat: np.ndarray, frames: np.ndarray, z: np.ndarray):
    """Dual data ``(G, ω̂♯)`` at sample points from frames.

    With ``B = F21 g + F22`` one has ``dG = dg / B²`` and so
    ``ω̂♯ = -ω̂ g' / G' = -B² ω̂``; the dual frame is ``F⁻¹``.
    """
    gz = np.asarray(g(z)) if isinstance(g, MeroExpr) else np.asarray(g)
    F = frames
    A = F[:, 0, 0] * gz + F[:, 0, 1]
    B = F[:, 1, 0] * gz + F[:, 1, 1]
    return A / B, -(B**2) * omega_hat


def dual_dual_factor(data: WData, model: SurfaceModel, idx: np.ndarray) -> np.ndarray:
    """Conformal factor of the numerically double-dualized data at ``idx``."""
    z = model.mesh.vertices[idx]
    F = model.frames[idx]
    w = np.asarray(data.omega.coefficient(z))
    G, w1 = numeric_dual(data.g, w, F, z)
    Finv = np.linalg.inv(F)
    g2, w2 = numeric_dual(G, w1, Finv, z)
    return (1 + np.abs(g2) ** 2) * np.abs(w2)


def cmc1_second_fundamental_form(data: WData, z) -> np.ndarray:
    """``h = -Q - Q̄ + ds²`` as symmetric 2x2 matrices in ``(dx, dy)``."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    lam2 = np.asarray(conformal_factor(data.lift_metric(), z)) ** 2
    q = np.asarray(data.hopf_coefficient()(z))
    h = np.empty(z.shape + (2, 2))
    h[..., 0, 0] = lam2 - 2 * q.real
    h[..., 1, 1] = lam2 + 2 * q.real
    h[..., 0, 1] = h[..., 1, 0] = 2 * q.imag
    return h


def build_improper_affine(data: WData, mesh: DomainMesh, *, tree: str = "bfs", singular_tol: float = SINGULAR_TOL) -> SurfaceModel:
    """Improper affine front ``ψ`` with its Lagrangian lift ``(G + F̄, F̄ - G)``."""
    _require_nonempty(mesh)
    F, G = data.F, data.G
    _require_no_poles((F, G), mesh, "F or G")
    dG = G.derivative()
    spec = data.lift_metric()
    _require_regular(spec, mesh, "|dF|² + |dG|²")
    z = mesh.vertices
    Fz, Gz = np.asarray(F(z)), np.asarray(G(z))
    FdG = F * dG
    if F.is_polynomial and G.is_polynomial:
        H = FdG.antiderivative()
        integral = np.asarray(H(z)) - complex(H.at(data.z0))
    else:
        _check_real_periods(mesh, [FdG], ExactnessObstruction)
        integral = tree_integrals(mesh, [FdG], data.z0, tree)[:, 0]
    x = Gz + np.conj(Fz)
    height = 0.5 * (np.abs(Gz) ** 2 - np.abs(Fz) ** 2) + (Gz * Fz - 2 * integral).real
    nu = data.gauss_map
    nuz = np.asarray(nu(z))
    n = np.conj(Fz) - Gz
    flags = {}
    if nu.is_constant and nu.is_zero:
        flags["rigidity"] = "elliptic paraboloid"
    elif nu.is_constant:
        flags["rigidity"] = "constant Lagrangian Gauss map"
    return SurfaceModel(
        "improper-affine",
        data,
        mesh,
        np.column_stack([x.real, x.imag, height]),
        np.abs(np.abs(nuz) - 1) <= singular_tol,
        spec,
        nuz,
        lift=np.column_stack([x.real, x.imag, n.real, n.imag]),
        flags=flags,
    )


def build_flat_front(data: WData, mesh: DomainMesh, *, tree: str = "bfs", singular_tol: float = SINGULAR_TOL) -> SurfaceModel:
    """Flat front ``f = 𝓛𝓛*`` from ``𝓛⁻¹d𝓛 = [[0, θ], [ω, 0]]``."""
    _require_nonempty(mesh)
    _require_simply_connected(mesh)
    w, t = data.omega.coefficient, data.theta.coefficient
    _require_no_poles((w, t), mesh, "ω or θ")
    spec = data.lift_metric()
    _require_regular(spec, mesh, "|ω|² + |θ|²")
    zero = MeroExpr.constant(0)
    frames, stats = tree_frames(mesh, (zero, t, w, zero), data.z0, tree)
    herm = frames @ np.conj(np.swapaxes(frames, 1, 2))
    mink = hermitian_to_minkowski(herm)
    rho = data.gauss_map
    rz = np.asarray(rho(mesh.vertices))
    flags = {}
    if rho.is_constant:
        flags["rigidity"] = "horosphere or hyperbolic cylinder"
    return SurfaceModel(
        "flat-front",
        data,
        mesh,
        mink[:, 1:],
        np.abs(np.abs(rz) - 1) <= singular_tol,
        spec,
        rz,
        hermitian=herm,
        frames=frames,
        flags=flags,
        info={
            "max_step_det_drift": stats["max_step_drift"],
            "max_det_error": float(np.max(np.abs(_det(frames) - 1))),
        },
    )


BUILDERS = {
    "minimal": build_minimal,
    "cmc1": build_cmc1,
    "cmc1-dual": build_cmc1,
    "maxface": build_maxface,
    "improper-affine": build_improper_affine,
    "flat-front": build_flat_front,
}


def build_surface(data: WData, mesh: DomainMesh, **kw) -> SurfaceModel:
    return BUILDERS[data.cls](data, mesh, **kw)


# ---------------------------------------------------------------------------
# first fundamental form


def vertex_gradients(mesh: DomainMesh, values: np.ndarray) -> np.ndarray:
    """Least-squares gradients over each vertex's one-ring.

    ``values`` has shape ``(V, k)`` (real or complex); the result has shape
    ``(V, 2, k)`` holding ``∂x`` and ``∂y``.  On the symmetric hexagonal
    ring the estimate is second-order accurate.
    """
    vals = np.asarray(values)
    if vals.ndim == 1:
        vals = vals[:, None]
    e = mesh.edges
    i = np.concatenate([e[:, 0], e[:, 1]])
    j = np.concatenate([e[:, 1], e[:, 0]])
    d = mesh.vertices[j] - mesh.vertices[i]
    D = np.column_stack([d.real, d.imag])
    dv = vals[j] - vals[i]
    n = mesh.n_vertices
    A = np.zeros((n, 2, 2))
    np.add.at(A, i, D[:, :, None] * D[:, None, :])
    B = np.zeros((n, 2, vals.shape[1]), dtype=vals.dtype)
    np.add.at(B, i, D[:, :, None] * dv[:, None, :])
    return np.linalg.solve(A, B)


def _bilinear(u: np.ndarray, v: np.ndarray, signature) -> np.ndarray:
    s = np.asarray(signature, dtype=float)
    return np.real(np.sum(s * u * np.conj(v), axis=-1))


def numeric_first_fundamental_form(model: SurfaceModel) -> np.ndarray:
    """``(E, F, G)`` per vertex from finite differences of the immersion.

    Coordinates and bilinear form per class: Euclidean 3-space for minimal
    surfaces; signature ``(-, +, +)`` for maxfaces; ``(-, +, +, +)`` on the
    Minkowski model of hyperbolic space for CMC-1 surfaces; the Lagrangian
    lift in Euclidean 4-space for improper affine fronts; and the frame
    ``𝓛`` with the left-invariant norm ``|𝓛⁻¹ d𝓛|²`` for flat fronts.
    """
    cls = model.cls
    if cls == "flat-front":
        L = model.frames.reshape(-1, 4)
        grad = vertex_gradients(model.mesh, L)
        Linv = np.linalg.inv(model.frames)
        Mx = Linv @ grad[:, 0, :].reshape(-1, 2, 2)
        My = Linv @ grad[:, 1, :].reshape(-1, 2, 2)
        ux, uy = Mx.reshape(-1, 4), My.reshape(-1, 4)
        sig = (1, 1, 1, 1)
    else:
        if cls == "minimal":
            X, sig = model.positions, (1, 1, 1)
        elif cls == "maxface":
            X, sig = model.positions, (-1, 1, 1)
        elif cls in ("cmc1", "cmc1-dual"):
            X, sig = hermitian_to_minkowski(model.hermitian), (-1, 1, 1, 1)
        else:
            X, sig = model.lift, (1, 1, 1, 1)
        grad = vertex_gradients(model.mesh, X)
        ux, uy = grad[:, 0, :], grad[:, 1, :]
    E = _bilinear(ux, ux, sig)
    F = _bilinear(ux, uy, sig)
    G = _bilinear(uy, uy, sig)
    return np.column_stack([E, F, G])


def closed_form_metric(model: SurfaceModel, z=None) -> np.ndarray:
    """The class's conformal factor squared at ``z`` (default: all vertices).

    Minimal and CMC-1: ``(1+|g|²)²|ω̂|²``; maxface: ``(1-|g|²)²|ω̂|²``;
    improper affine: ``2(1+|ν|²)|G'|²``; flat front: ``(1+|ρ|²)|ω̂|²``.
    """
    z = model.mesh.vertices if z is None else np.asarray(z, dtype=complex)
    if model.cls == "maxface":
        g = np.asarray(model.data.g(z))
        return (1 - np.abs(g) ** 2) ** 2 * np.abs(np.asarray(model.data.omega(z))) ** 2
    return np.asarray(conformal_factor(model.metric, z)) ** 2


def metric_errors(model: SurfaceModel, rings: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Relative deviation of the numeric first fundamental form from the
    closed form at vertices more than ``rings`` edges from the boundary.

    Returns ``(vertex indices, errors)`` with error
    ``max(|E-λ²|, |G-λ²|, |F|) / λ²``.
    """
    idx = model.mesh.interior_vertices(rings)
    efg = numeric_first_fundamental_form(model)[idx]
    lam2 = closed_form_metric(model, model.mesh.vertices[idx])
    err = np.max(np.abs(np.column_stack([efg[:, 0] - lam2, efg[:, 1], efg[:, 2] - lam2])), axis=1) / lam2
    return idx, err


# ---------------------------------------------------------------------------
# export


def chart_coordinates(model: SurfaceModel, chart: str = "poincare-ball") -> np.ndarray:
    """Three coordinates per vertex for visualization.

    Hyperbolic classes use ``poincare-ball`` ``(x1, x2, x3)/(1 + x0)`` or
    ``upper-half-space`` ``(Re f12/f22, Im f12/f22, 1/f22)``; other classes
    only support their native coordinates (``chart="native"``).
    """
    if model.cls not in H3_CLASSES:
        if chart not in ("native", None):
            raise UnsupportedChart(f"{model.cls} surfaces are exported in native coordinates")
        return model.positions
    f = model.hermitian
    if chart == "poincare-ball":
        x = hermitian_to_minkowski(f)
        return x[:, 1:] / (1 + x[:, :1])
    if chart == "upper-half-space":
        f12, f22 = f[:, 0, 1], f[:, 1, 1].real
        w = f12 / f22
        return np.column_stack([w.real, w.imag, 1 / f22])
    if chart == "hermitian":
        return hermitian_to_minkowski(f)[:, 1:]
    raise UnsupportedChart(f"unknown chart {chart!r}")


def default_chart(model: SurfaceModel) -> str:
    return "poincare-ball" if model.cls in H3_CLASSES else "native"


def export_mesh(model: SurfaceModel, fmt: str = "obj", chart: str | None = None) -> bytes:
    """Serialize a sampled surface as OBJ or CSV bytes."""
    if model is None or model.mesh is None or model.mesh.n_vertices == 0 or len(model.positions) == 0:
        raise EmptyMesh("nothing to export")
    chart = chart or default_chart(model)
    P = chart_coordinates(model, chart)
    if fmt == "obj":
        lines = [f"# class: {model.cls}", f"# chart: {chart}"]
        sing = np.nonzero(model.singular)[0]
        lines.append("# singular: " + " ".join(str(i + 1) for i in sing))
        lines += [f"v {x!r} {y!r} {z!r}" for x, y, z in P.tolist()]
        lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in model.mesh.triangles]
        return ("\n".join(lines) + "\n").encode()
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["re", "im", "x", "y", "z", "singular"])
        for v, (x, y, z), s in zip(model.mesh.vertices.tolist(), P.tolist(), model.singular.tolist()):
            w.writerow([repr(v.real), repr(v.imag), repr(x), repr(y), repr(z), int(s)])
        return buf.getvalue().encode()
    raise ValueError(f"unknown export format {fmt!r}")
