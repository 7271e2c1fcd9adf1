"""Named example data.

Each entry stores its data as expression strings so that it can be written
out as a reusable JSON config.  ``punctures`` are the points removed from
the sphere for the class's conformal metric; ``domain`` is the planar
region used when a surface is built.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import UnknownEntry
from .mesh import DomainSpec
from .metric import MetricSpec
from .parsing import parse_expr, parse_form, parse_points
from .surfaces import WData


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    cls: str
    data: dict
    domain: str
    punctures: tuple
    m: int
    note: str
    partner: dict = field(default_factory=dict)

    def wdata(self) -> WData:
        d = self.data
        kw = {}
        for key in ("g", "F", "G", "hyperbolic_gauss"):
            if key in d:
                kw[key] = parse_expr(d[key])
        if "omega" in d:
            kw["omega"] = parse_form(d["omega"])
        if "theta" in d:
            kw["theta"] = parse_form(d["theta"], allow_zero=True)
        if "z0" in d:
            kw["z0"] = complex(parse_points(d["z0"])[0])
        return WData(self.cls, **kw)

    def punctures_list(self) -> list:
        return parse_points(",".join(self.punctures)) if self.punctures else []

    def metric(self) -> MetricSpec:
        return self.wdata().lift_metric(self.punctures_list())

    def partner_metric(self) -> MetricSpec | None:
        if not self.partner:
            return None
        return MetricSpec(
            parse_expr(self.partner["g"]),
            parse_form(self.partner["omega"]),
            self.m,
            self.punctures_list(),
        )

    def domain_spec(self, edge: float | None = None) -> DomainSpec:
        kw = {} if edge is None else {"edge": edge}
        return DomainSpec.from_text(self.domain, self.punctures_list(), **kw)

    def to_config(self) -> dict:
        out = {
            "name": self.name,
            "class": self.cls,
            "data": dict(self.data),
            "domain": self.domain,
            "punctures": list(self.punctures),
            "m": self.m,
            "note": self.note,
        }
        if self.partner:
            out["partner"] = dict(self.partner)
        return out


def _entry(name, cls, data, domain, punctures, m, note, partner=None) -> CatalogEntry:
    return CatalogEntry(name, cls, data, domain, tuple(punctures), m, note, partner or {})


_UNICITY_OMEGA = "1/(z*(z-2)*(2*z-1))"

ENTRIES = (
    _entry(
        "enneper", "minimal", {"g": "z", "omega": "1"}, "disk:1", ["inf"], 2,
        "Enneper surface: complete on the plane, g omits only inf.",
    ),
    _entry(
        "catenoid", "minimal", {"g": "z", "omega": "1/z^2", "z0": "1"}, "annulus:0.2,2", ["0", "inf"], 2,
        "Catenoid: complete on the twice punctured sphere, g omits 0 and inf.",
    ),
    _entry(
        "plane", "minimal", {"g": "0.5", "omega": "1"}, "disk:1", ["inf"], 2,
        "Constant g: the surface is a plane and the curvature vanishes.",
    ),
    _entry(
        "sharpness", "minimal", {"g": "z", "omega": _UNICITY_OMEGA, "z0": "-1"}, "disk:0.4,-1,0",
        ["0", "2", "0.5", "inf"], 2,
        "g = z on the sphere minus {0, 2, 1/2, inf} with a complete metric: exactly m + 2 = 4 omitted values.",
    ),
    _entry(
        "unicity-m2", "minimal", {"g": "z", "omega": _UNICITY_OMEGA, "z0": "-1"}, "disk:0.4,-1,0",
        ["0", "2", "0.5", "inf"], 2,
        "g = z and g_hat = 1/z share m + 4 = 6 values without being equal.",
        {"g": "1/z", "omega": _UNICITY_OMEGA},
    ),
    _entry(
        "horosphere", "cmc1", {"g": "0", "omega": "1"}, "disk:1", ["inf"], 2,
        "CMC-1 surface with constant g: a horosphere.",
    ),
    _entry(
        "enneper-cousin", "cmc1", {"g": "z", "omega": "1"}, "disk:0.5", ["inf"], 2,
        "CMC-1 counterpart of the Enneper data.",
    ),
    _entry(
        "cmc1-rational-G", "cmc1",
        {"g": "z", "omega": "2/z^2", "z0": "1", "hyperbolic_gauss": "(2*z^3+1)/(z^3+2)"},
        "disk:0.5,1,0", ["0", "inf"], 2,
        "CMC-1 data whose hyperbolic Gauss map is the rational function (2z^3+1)/(z^3+2).",
    ),
    _entry(
        "maxface-enneper", "maxface", {"g": "z", "omega": "1"}, "disk:2", ["inf"], 2,
        "Maximal Enneper-type face; singular along |z| = 1.",
    ),
    _entry(
        "lorentz-catenoid", "maxface", {"g": "z", "omega": "1/z^2", "z0": "1"}, "annulus:0.3,3", ["0", "inf"], 2,
        "Maximal catenoid; singular along |z| = 1.",
    ),
    _entry(
        "elliptic-paraboloid", "improper-affine", {"F": "0", "G": "z"}, "disk:1", ["inf"], 1,
        "nu vanishes identically: the front is an elliptic paraboloid.",
    ),
    _entry(
        "affine-nu-z", "improper-affine", {"F": "z^2/2", "G": "z"}, "disk:2", ["inf"], 1,
        "Improper affine front with nu = z; singular along |z| = 1.",
    ),
    _entry(
        "horosphere-front", "flat-front", {"omega": "1", "theta": "0"}, "disk:1", ["inf"], 1,
        "Flat front with rho = 0: a horosphere.",
    ),
    _entry(
        "hyperbolic-cylinder", "flat-front", {"omega": "1/z", "theta": "0.5/z", "z0": "1"},
        "rectangle:0.5,2,-0.5,0.5", ["0", "inf"], 1,
        "Flat front with constant rho = 1/2: a hyperbolic cylinder.",
    ),
    _entry(
        "flat-front-rho-z", "flat-front", {"omega": "1", "theta": "z"}, "disk:2", ["inf"], 1,
        "Flat front with rho = z; singular along |z| = 1.",
    ),
)

CATALOG = {e.name: e for e in ENTRIES}


def get_entry(name: str) -> CatalogEntry:
    try:
        return CATALOG[name]
    except KeyError:
        raise UnknownEntry(f"no catalog entry named {name!r}") from None


def entry_from_config(cfg: dict) -> CatalogEntry:
    """Inverse of :meth:`CatalogEntry.to_config`."""
    return CatalogEntry(
        cfg.get("name", "custom"),
        cfg["class"],
        dict(cfg["data"]),
        cfg.get("domain", "disk:1"),
        tuple(cfg.get("punctures", [])),
        int(cfg.get("m", 2)),
        cfg.get("note", ""),
        dict(cfg.get("partner", {})),
    )


def listing() -> list[dict]:
    return [{"name": e.name, "class": e.cls, "note": e.note} for e in ENTRIES]


