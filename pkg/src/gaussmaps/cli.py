"""Command-line front end.

Exit codes: 0 success, 2 usage, 3 mathematical precondition, 4 I/O.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis
from .catalog import CatalogEntry, entry_from_config, get_entry, listing
from .errors import GaussMapError, MathError, UnknownEntry
from .mero import INF, is_inf
from .mesh import DomainSpec, build_mesh, domain_is_complete
from .metric import (
    MetricSpec,
    RamificationProfile,
    classify_completeness,
    conformal_factor,
    contains_point,
    curvature_bound_field,
    gaussian_curvature,
    natural_punctures,
)
from .parsing import format_point, parse_expr, parse_form, parse_point, parse_points
from .surfaces import CHARTS, CLASSES, SINGULAR_TOL, build_surface, default_chart, export_mesh

EXIT_OK, EXIT_USAGE, EXIT_MATH, EXIT_IO = 0, 2, 3, 4


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers


def _points(text: str | None) -> list:
    return parse_points(text) if text else []


def _merge_punctures(given, extra) -> list:
    out = list(given)
    for p in extra:
        if not contains_point(out, p):
            out.append(p)
    return out


def _targets(text: str) -> list[tuple]:
    """``alpha:nu`` pairs separated by commas; ``nu`` may be ``inf``."""
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        a, sep, nu = item.rpartition(":")
        if not sep:
            raise UsageError(f"target {item!r} is not of the form alpha:nu")
        nu = nu.strip().lower()
        out.append((parse_point(a), INF if nu in ("inf", "oo") else int(nu)))
    if not out:
        raise UsageError("no targets given")
    return out


def _entry_from_args(args) -> CatalogEntry:
    if getattr(args, "config", None):
        return entry_from_config(json.loads(Path(args.config).read_text()))
    if getattr(args, "catalog", None):
        return get_entry(args.catalog)
    cls = args.cls
    if cls is None:
        raise UsageError("give --class, --catalog or --config")
    data = {}
    for key in ("g", "omega", "F", "G", "theta", "z0"):
        v = getattr(args, key, None)
        if v is not None:
            data[key] = v
    need = {
        "minimal": ("g", "omega"),
        "cmc1": ("g", "omega"),
        "cmc1-dual": ("g", "omega"),
        "maxface": ("g", "omega"),
        "improper-affine": ("F", "G"),
        "flat-front": ("omega",),
    }[cls]
    missing = [k for k in need if k not in data]
    if missing:
        raise UsageError(f"class {cls} needs " + ", ".join("--" + k for k in missing))
    return CatalogEntry("custom", cls, data, args.domain or "disk:1", tuple(_split(args.punctures)), args.m, "")


def _split(text: str | None) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()] if text else []


def _entry_metric(entry: CatalogEntry) -> MetricSpec:
    w = entry.wdata()
    base = w.lift_metric
    try:
        return base(entry.punctures_list())
    except MathError:
        probe = base(None)
        return base(_merge_punctures(entry.punctures_list(), probe.natural_punctures))


def _completeness(spec: MetricSpec) -> dict:
    reports = classify_completeness(spec)
    return {
        "complete": all(r.complete_at for r in reports),
        "punctures": [r.to_dict() for r in reports],
    }


def _emit(args, payload: dict, out=None) -> None:
    out = out or sys.stdout
    if args.json:
        out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        out.write(_table(payload))


def _table(payload, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    for key in sorted(payload):
        value = payload[key]
        if isinstance(value, dict):
            lines.append(f"{pad}{key}:")
            lines.append(_table(value, indent + 1).rstrip("\n"))
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            lines.append(f"{pad}{key}:")
            for item in value:
                lines.append(f"{pad}  -")
                lines.append(_table(item, indent + 2).rstrip("\n"))
        else:
            lines.append(f"{pad}{key}: {json.dumps(value)}")
    return "\n".join(lines) + "\n"


def _out_dir(args) -> Path:
    path = Path(args.out or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# commands


def cmd_build(args) -> dict:
    entry = _entry_from_args(args)
    spec = _entry_metric(entry)
    domain = DomainSpec.from_text(entry.domain, spec.domain_punctures, edge=args.resolution)
    mesh = build_mesh(domain)
    model = build_surface(entry.wdata(), mesh, singular_tol=args.tolerance or SINGULAR_TOL)
    chart = args.chart or default_chart(model)
    out = _out_dir(args)
    stem = args.name or entry.name
    files = {}
    for fmt in ("obj", "csv"):
        path = out / f"{stem}.{fmt}"
        path.write_bytes(export_mesh(model, fmt, chart))
        files[fmt] = str(path)
    report = {
        "name": entry.name,
        "class": entry.cls,
        "data": entry.wdata().to_dict(),
        "m": spec.m,
        "domain": domain.to_dict(),
        "domain_complete": domain_is_complete(spec, domain),
        "vertices": mesh.n_vertices,
        "triangles": mesh.n_triangles,
        "singular_count": model.singular_count,
        "flags": model.flags,
        "info": {k: v for k, v in model.info.items() if isinstance(v, (int, float, str, bool))},
        "chart": chart,
        **_completeness(spec),
    }
    path = out / f"{stem}.json"
    files["json"] = str(path)
    report["files"] = files
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return report


def cmd_export(args) -> dict:
    entry = _entry_from_args(args)
    spec = _entry_metric(entry)
    domain = DomainSpec.from_text(entry.domain, spec.domain_punctures, edge=args.resolution)
    mesh = build_mesh(domain)
    out = _out_dir(args)
    stem = args.name or entry.name
    if args.format == "mesh-json":
        path = out / f"{stem}.mesh.json"
        path.write_text(mesh.to_json())
        return {"file": str(path), "vertices": mesh.n_vertices}
    model = build_surface(entry.wdata(), mesh, singular_tol=args.tolerance or SINGULAR_TOL)
    chart = args.chart or default_chart(model)
    path = out / f"{stem}.{args.format}"
    path.write_bytes(export_mesh(model, args.format, chart))
    return {"file": str(path), "chart": chart, "vertices": mesh.n_vertices, "singular_count": model.singular_count}


def cmd_catalog(args) -> dict:
    if not args.entry:
        return {"entries": listing(), "count": len(listing())}
    entry = get_entry(args.entry)
    cfg = entry.to_config()
    if args.out:
        path = _out_dir(args) / f"{entry.name}.json"
        path.write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n")
        cfg = {**cfg, "file": str(path)}
    return cfg


def _metric_from_args(args, punctures=None) -> MetricSpec:
    if args.g is None or args.omega is None:
        raise UsageError("--g and --omega are required")
    g, omega = parse_expr(args.g), parse_form(args.omega)
    pts = _merge_punctures(_points(args.punctures) if punctures is None else punctures,
                           natural_punctures(g, omega, args.m))
    return MetricSpec(g, omega, args.m, pts)


def an_omitted(args) -> dict:
    if args.g is None:
        raise UsageError("--g is required")
    return analysis.omitted_values(parse_expr(args.g), _points(args.punctures), args.m).to_dict()


def an_ramify(args) -> dict:
    spec = _metric_from_args(args)
    return analysis.ramification_verdict(spec, RamificationProfile(tuple(_targets(args.targets)))).to_dict()


def an_islands(args) -> dict:
    if args.g is None:
        raise UsageError("--g is required")
    g = parse_expr(args.g)
    spec = _metric_from_args(args) if args.omega else None
    punct = spec.domain_punctures if spec else _points(args.punctures)
    domain = DomainSpec.from_text(args.domain or "disk:1", punct, edge=args.resolution)
    mesh = build_mesh(domain)
    if args.targets:
        return analysis.islands_verdict(g, mesh, _targets(args.targets), args.eps, args.m, spec).to_dict()
    if args.alpha is None:
        raise UsageError("give --alpha or --targets")
    alpha = parse_point(args.alpha)
    eps = args.eps if args.eps is not None else analysis.default_eps([alpha])
    return analysis.find_islands(g, mesh, alpha, eps).to_dict()


def an_unicity(args) -> dict:
    if args.g is not None or args.gh is not None:
        if args.g is None or args.gh is None:
            raise UsageError("--g and --gh go together")
        summary = analysis.shared_values(
            parse_expr(args.g), parse_expr(args.gh), _points(args.punctures),
            _points(args.candidates) or None, args.m,
        )
        return summary.to_dict()
    if not args.alphas:
        raise UsageError("give --alphas (example generator) or --g and --gh")
    alphas = [complex(p) for p in _points(args.alphas) if not is_inf(p)]
    return analysis.unicity_report(args.m, alphas, omega_hat=args.omega_hat).to_dict()


def an_curvature(args) -> dict:
    spec = _metric_from_args(args)
    out = {"m": spec.m, **_completeness(spec)}
    pts = [p for p in _points(args.points) if not is_inf(p)]
    if pts:
        z = np.array(pts, dtype=complex)
        lam = np.atleast_1d(conformal_factor(spec, z))
        K = np.atleast_1d(gaussian_curvature(spec, z))
        out["samples"] = [
            {"z": format_point(p), "conformal_factor": float(a), "curvature": float(k)}
            for p, a, k in zip(pts, lam, K)
        ]
    if args.domain:
        domain = DomainSpec.from_text(args.domain, spec.domain_punctures, edge=args.resolution)
        mesh = build_mesh(domain)
        field = curvature_bound_field(spec, mesh)
        finite = field[np.isfinite(field)]
        out["bound_field"] = {
            "vertices": mesh.n_vertices,
            "max": float(finite.max()) if len(finite) else None,
            "mean": float(finite.mean()) if len(finite) else None,
        }
    return out


ANALYSES = {
    "omitted": an_omitted,
    "ramify": an_ramify,
    "islands": an_islands,
    "unicity": an_unicity,
    "curvature": an_curvature,
}


def cmd_analyze(args) -> dict:
    return ANALYSES[args.analysis](args)


# ---------------------------------------------------------------------------
# parser


def _globals(parser, suppress: bool) -> None:
    d = argparse.SUPPRESS
    parser.add_argument("--out", default=d if suppress else None, help="output directory")
    parser.add_argument("--resolution", type=float, default=d if suppress else 0.05,
                        help="target mesh edge length (default 0.05)")
    parser.add_argument("--tolerance", type=float, default=d if suppress else None,
                        help="singular-set tolerance for builds")
    parser.add_argument("--json", action="store_true", default=d if suppress else False,
                        help="emit JSON instead of a table")


def _data_flags(p) -> None:
    p.add_argument("--class", dest="cls", choices=CLASSES)
    p.add_argument("--catalog", help="use a catalog entry")
    p.add_argument("--config", help="use a JSON config written by 'catalog NAME --out DIR'")
    p.add_argument("--g")
    p.add_argument("--omega")
    p.add_argument("--F")
    p.add_argument("--G")
    p.add_argument("--theta")
    p.add_argument("--z0")
    p.add_argument("--domain", help="disk:R[,cx,cy] | annulus:a,b | rectangle:x0,x1,y0,y1 | plane[:R]")
    p.add_argument("--punctures", help="comma separated, e.g. 0,inf")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--chart", choices=("native", *CHARTS))
    p.add_argument("--name", help="output file stem")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gaussmaps", description=__doc__.splitlines()[0])
    _globals(parser, False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a surface and write OBJ, CSV and a JSON report")
    _globals(p, True)
    _data_flags(p)

    p = sub.add_parser("export", help="write one mesh file for a surface")
    _globals(p, True)
    _data_flags(p)
    p.add_argument("--format", choices=("obj", "csv", "mesh-json"), default="obj")

    p = sub.add_parser("catalog", help="list catalog entries or write one as a config")
    _globals(p, True)
    p.add_argument("entry", nargs="?")

    p = sub.add_parser("analyze", help="value-distribution analyses")
    asub = p.add_subparsers(dest="analysis", required=True)
    for name in ANALYSES:
        q = asub.add_parser(name)
        _globals(q, True)
        q.add_argument("--g")
        q.add_argument("--omega")
        q.add_argument("--m", type=int, default=2)
        q.add_argument("--punctures")
        if name in ("ramify", "islands"):
            q.add_argument("--targets", help="alpha:nu pairs, e.g. 0:2,1:2,inf:inf")
        if name == "islands":
            q.add_argument("--alpha")
            q.add_argument("--eps", type=float)
            q.add_argument("--domain")
        if name == "unicity":
            q.add_argument("--alphas")
            q.add_argument("--gh")
            q.add_argument("--candidates")
            q.add_argument("--omega-hat", choices=("same", "isometric"), default="same")
        if name == "curvature":
            q.add_argument("--points")
            q.add_argument("--domain")
    return parser


COMMANDS = {"build": cmd_build, "export": cmd_export, "catalog": cmd_catalog, "analyze": cmd_analyze}


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        payload = COMMANDS[args.command](args)
    except (UsageError, UnknownEntry) as exc:
        sys.stderr.write(f"gaussmaps: error: {exc.args[0] if exc.args else exc}\n")
        return EXIT_USAGE
    except MathError as exc:
        sys.stderr.write(f"gaussmaps: {type(exc).__name__}: {exc}\n")
        return EXIT_MATH
    except OSError as exc:
        sys.stderr.write(f"gaussmaps: I/O error: {exc}\n")
        return EXIT_IO
    except (GaussMapError, ValueError) as exc:
        sys.stderr.write(f"gaussmaps: error: {exc}\n")
        return EXIT_USAGE
    _emit(args, payload)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
