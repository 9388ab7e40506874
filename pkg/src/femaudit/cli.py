"""Command-line front end.

Commands: ``check`` (validate a model and its constraint set),
``audit`` (solve every combination and write reports + VTK files),
``reactions`` (superstructure wrench sweep), ``export`` (canonical mesh
and quality report). The model is one JSON document with a versioned
schema; parsing is strict, unknown keys are errors.

Exit codes: 0 success / all PASS, 1 audit FAIL, 2 errors, 3 rigid-body
modes detected.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

from . import __version__
from .audit import (
    AuditCriteria,
    AuditReport,
    audit,
    export_vtk,
    hotspot_table,
    summary_json,
    write_report,
)
from .constraints import (
    DirichletBC,
    RevoluteJoint,
    RigidCoupling,
    build_transformation,
    check_rigid_body_constrained,
)
from .element import Material
from .errors import (
    ConstraintError,
    FemAuditError,
    MissingLayout,
    ModelFileError,
)
from .loads import (
    DEFAULT_GRAVITY,
    Combination,
    GravityLoad,
    InterfaceWrench,
    LoadCase,
    LoadCategory,
    NodalForce,
    WrenchLoad,
    combine,
    governing_combination,
)
from .mesh_io import parse_mesh, serialize_mesh, validate_mesh
from .reactions import (
    BoomMass,
    PlatformMass,
    PointWrench,
    SuperstructureLayout,
    sweep_csv,
    sweep_envelope,
)
from .system import assemble, solve

MODEL_SCHEMA_VERSION = 1


# --- strict schema helpers ---------------------------------------------------

def _obj(value, where, required=(), optional=()):
    if not isinstance(value, dict):
        raise ModelFileError("expected an object", where)
    unknown = sorted(set(value) - set(required) - set(optional))
    if unknown:
        raise ModelFileError(f"unknown keys {unknown}", where)
    missing = sorted(k for k in required if k not in value)
    if missing:
        raise ModelFileError(f"missing required keys {missing}", where)
    return value


def _num(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ModelFileError("expected a number", where)
    return float(value)


def _int(value, where):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ModelFileError("expected an integer", where)
    return value


def _str(value, where):
    if not isinstance(value, str) or not value:
        raise ModelFileError("expected a non-empty string", where)
    return value


def _vec3(value, where):
    if not isinstance(value, list) or len(value) != 3:
        raise ModelFileError("expected a list of 3 numbers", where)
    return tuple(_num(v, f"{where}[{i}]") for i, v in enumerate(value))


def _list(value, where):
    if not isinstance(value, list):
        raise ModelFileError("expected a list", where)
    return value


# --- model file --------------------------------------------------------------

@dataclass
class ParsedModel:
    path: Path
    description: str
    units: str
    mesh_ref: str
    mesh: object
    gravity: tuple[float, float, float]
    materials: dict[str, Material]
    dirichlet: list[DirichletBC]
    couplings: list[RigidCoupling]
    joints: list[RevoluteJoint]
    load_cases: list[LoadCase]
    combinations: list[Combination]
    criteria: AuditCriteria
    layout: SuperstructureLayout | None
    hotspot_count: int
    digests: dict[str, str]


def _parse_materials(section, where):
    materials = {}
    if not isinstance(section, dict) or not section:
        raise ModelFileError("expected a non-empty object", where)
    for key, entry in section.items():
        w = f"{where}.{key}"
        _obj(entry, w, required=("E", "nu"),
             optional=("name", "rho", "yield_strength"))
        kwargs = dict(E=_num(entry["E"], f"{w}.E"),
                      nu=_num(entry["nu"], f"{w}.nu"))
        if "rho" in entry:
            kwargs["rho"] = _num(entry["rho"], f"{w}.rho")
        if "yield_strength" in entry:
            kwargs["yield_strength"] = _num(entry["yield_strength"],
                                            f"{w}.yield_strength")
        name = entry.get("name", key)
        try:
            materials[key] = Material(_str(name, f"{w}.name"), **kwargs)
        except ValueError as err:
            raise ModelFileError(str(err), w) from None
    return materials


def _parse_constraints(section, where):
    _obj(section, where, optional=("dirichlet", "couplings", "joints"))
    dirichlet, couplings, joints = [], [], []
    for i, entry in enumerate(_list(section.get("dirichlet", []), f"{where}.dirichlet")):
        w = f"{where}.dirichlet[{i}]"
        _obj(entry, w, required=("target", "axes"), optional=("value",))
        axes = tuple(_str(a, f"{w}.axes") for a in _list(entry["axes"], f"{w}.axes"))
        value = _num(entry.get("value", 0.0), f"{w}.value")
        try:
            dirichlet.append(DirichletBC(_str(entry["target"], f"{w}.target"),
                                         axes, value))
        except (ValueError, ConstraintError) as err:
            raise ModelFileError(str(err), w) from None
    for i, entry in enumerate(_list(section.get("couplings", []), f"{where}.couplings")):
        w = f"{where}.couplings[{i}]"
        _obj(entry, w, required=("name", "node_set", "reference"))
        try:
            couplings.append(RigidCoupling(
                _str(entry["name"], f"{w}.name"),
                _str(entry["node_set"], f"{w}.node_set"),
                _vec3(entry["reference"], f"{w}.reference")))
        except (ValueError, ConstraintError) as err:
            raise ModelFileError(str(err), w) from None
    for i, entry in enumerate(_list(section.get("joints", []), f"{where}.joints")):
        w = f"{where}.joints[{i}]"
        _obj(entry, w, required=("name", "coupling_a", "coupling_b", "axis"))
        try:
            joints.append(RevoluteJoint(
                _str(entry["name"], f"{w}.name"),
                _str(entry["coupling_a"], f"{w}.coupling_a"),
                _str(entry["coupling_b"], f"{w}.coupling_b"),
                _vec3(entry["axis"], f"{w}.axis")))
        except (ValueError, ConstraintError) as err:
            raise ModelFileError(str(err), w) from None
    return dirichlet, couplings, joints


_WRENCH_KEYS = ("Fx", "Fy", "Fz", "Mx", "My", "Mz")


def _parse_load_cases(section, where, gravity):
    cases = []
    for i, entry in enumerate(_list(section, where)):
        w = f"{where}[{i}]"
        _obj(entry, w, required=("name", "category", "constituents"))
        name = _str(entry["name"], f"{w}.name")
        raw_cat = _str(entry["category"], f"{w}.category")
        try:
            category = LoadCategory(raw_cat)
        except ValueError:
            valid = ", ".join(c.value for c in LoadCategory)
            raise ModelFileError(
                f"unknown category {raw_cat!r} (expected one of: {valid})",
                f"{w}.category") from None
        constituents = []
        for j, c in enumerate(_list(entry["constituents"], f"{w}.constituents")):
            cw = f"{w}.constituents[{j}]"
            kind = _str(_obj(c, cw, required=("type",),
                             optional=("g", "node_set", "total", "coupling")
                             + _WRENCH_KEYS).get("type"), f"{cw}.type")
            try:
                if kind == "gravity":
                    _obj(c, cw, required=("type",), optional=("g",))
                    g = _vec3(c["g"], f"{cw}.g") if "g" in c else gravity
                    constituents.append(GravityLoad(g))
                elif kind == "nodal_force":
                    _obj(c, cw, required=("type", "node_set", "total"))
                    constituents.append(NodalForce(
                        _str(c["node_set"], f"{cw}.node_set"),
                        _vec3(c["total"], f"{cw}.total")))
                elif kind == "wrench":
                    _obj(c, cw, required=("type", "coupling"),
                         optional=_WRENCH_KEYS)
                    components = {k: _num(c[k], f"{cw}.{k}")
                                  for k in _WRENCH_KEYS if k in c}
                    constituents.append(WrenchLoad(
                        _str(c["coupling"], f"{cw}.coupling"),
                        InterfaceWrench(**components)))
                else:
                    raise ModelFileError(
                        f"unknown constituent type {kind!r} (expected "
                        f"gravity, nodal_force or wrench)", f"{cw}.type")
            except ValueError as err:
                raise ModelFileError(str(err), cw) from None
        try:
            cases.append(LoadCase(name, category, tuple(constituents)))
        except (TypeError, ValueError) as err:
            raise ModelFileError(str(err), w) from None
    return cases


def _parse_combinations(section, where, cases):
    by_name = {c.name: c for c in cases}
    combos = []
    for i, entry in enumerate(_list(section, where)):
        w = f"{where}[{i}]"
        _obj(entry, w, required=("name", "case_class", "cases"),
             optional=("permissible",))
        pairs = []
        for j, pair in enumerate(_list(entry["cases"], f"{w}.cases")):
            pw = f"{w}.cases[{j}]"
            if not isinstance(pair, list) or len(pair) != 2:
                raise ModelFileError("expected a [case name, weight] pair", pw)
            cname = _str(pair[0], f"{pw}[0]")
            if cname not in by_name:
                raise ModelFileError(f"unknown load case {cname!r}", pw)
            pairs.append((by_name[cname], _num(pair[1], f"{pw}[1]")))
        permissible = (_num(entry["permissible"], f"{w}.permissible")
                       if "permissible" in entry else None)
        try:
            combos.append(Combination(
                _str(entry["name"], f"{w}.name"),
                _str(entry["case_class"], f"{w}.case_class"),
                tuple(pairs), permissible=permissible))
        except (TypeError, ValueError) as err:
            raise ModelFileError(str(err), w) from None
    return combos


def _parse_criteria(section, where):
    if section is None:
        return AuditCriteria()
    _obj(section, where,
         optional=("class_permissible", "deflection_limit", "classification"))
    table = None
    if "class_permissible" in section:
        raw = section["class_permissible"]
        if not isinstance(raw, dict):
            raise ModelFileError("expected an object", f"{where}.class_permissible")
        table = {k: _num(v, f"{where}.class_permissible.{k}")
                 for k, v in raw.items()}
    limit = None
    if section.get("deflection_limit") is not None:
        limit = _num(section["deflection_limit"], f"{where}.deflection_limit")
    labels = tuple(_str(v, f"{where}.classification")
                   for v in _list(section.get("classification", []),
                                  f"{where}.classification"))
    try:
        return AuditCriteria(class_permissible=table, deflection_limit=limit,
                             classification=labels)
    except ValueError as err:
        raise ModelFileError(str(err), where) from None


def _parse_layout(section, where):
    if section is None:
        return None
    _obj(section, where, required=("items",),
         optional=("slew_origin", "boom_direction", "pivot_height",
                   "point_wrenches"))
    items = []
    for i, entry in enumerate(_list(section["items"], f"{where}.items")):
        w = f"{where}.items[{i}]"
        kind = _str(_obj(entry, w, required=("type", "name", "mass"),
                         optional=("position", "lever", "offset")).get("type"),
                    f"{w}.type")
        try:
            if kind == "platform":
                _obj(entry, w, required=("type", "name", "mass", "position"))
                items.append(PlatformMass(
                    _str(entry["name"], f"{w}.name"),
                    _num(entry["mass"], f"{w}.mass"),
                    _vec3(entry["position"], f"{w}.position")))
            elif kind == "boom":
                _obj(entry, w, required=("type", "name", "mass", "lever"),
                     optional=("offset",))
                items.append(BoomMass(
                    _str(entry["name"], f"{w}.name"),
                    _num(entry["mass"], f"{w}.mass"),
                    _num(entry["lever"], f"{w}.lever"),
                    _num(entry.get("offset", 0.0), f"{w}.offset")))
            else:
                raise ModelFileError(
                    f"unknown item type {kind!r} (expected platform or boom)",
                    f"{w}.type")
        except ValueError as err:
            raise ModelFileError(str(err), w) from None
    wrenches = []
    for i, entry in enumerate(_list(section.get("point_wrenches", []),
                                    f"{where}.point_wrenches")):
        w = f"{where}.point_wrenches[{i}]"
        _obj(entry, w, required=("name", "lever"),
             optional=("offset", "force", "moment"))
        try:
            wrenches.append(PointWrench(
                _str(entry["name"], f"{w}.name"),
                _num(entry["lever"], f"{w}.lever"),
                _num(entry.get("offset", 0.0), f"{w}.offset"),
                _vec3(entry.get("force", [0, 0, 0]), f"{w}.force"),
                _vec3(entry.get("moment", [0, 0, 0]), f"{w}.moment")))
        except ValueError as err:
            raise ModelFileError(str(err), w) from None
    try:
        return SuperstructureLayout(
            items=tuple(items),
            slew_origin=_vec3(section.get("slew_origin", [0, 0, 0]),
                              f"{where}.slew_origin"),
            boom_direction=_vec3(section.get("boom_direction", [1, 0, 0]),
                                 f"{where}.boom_direction"),
            pivot_height=_num(section.get("pivot_height", 0.0),
                              f"{where}.pivot_height"),
            point_wrenches=tuple(wrenches))
    except (TypeError, ValueError) as err:
        raise ModelFileError(str(err), where) from None


def load_model(path) -> ParsedModel:
    """Read and validate a model file plus the mesh it references."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as err:
        raise ModelFileError(f"cannot read model file: {err}") from None
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as err:
        raise ModelFileError(f"invalid JSON: {err}") from None

    _obj(doc, "model",
         required=("schema_version", "units", "mesh", "materials"),
         optional=("description", "gravity", "constraints", "load_cases",
                   "combinations", "criteria", "layout", "output"))
    version = _int(doc["schema_version"], "model.schema_version")
    if version != MODEL_SCHEMA_VERSION:
        raise ModelFileError(
            f"unsupported schema_version {version} "
            f"(this toolkit reads version {MODEL_SCHEMA_VERSION})",
            "model.schema_version")
    units = _str(doc["units"], "model.units")
    if units not in ("m", "mm"):
        raise ModelFileError(f"units must be 'm' or 'mm', got {units!r}",
                             "model.units")

    mesh_ref = _str(doc["mesh"], "model.mesh")
    mesh_path = (path.parent / mesh_ref).resolve()
    try:
        mesh_bytes = mesh_path.read_bytes()
    except OSError as err:
        raise ModelFileError(f"cannot read mesh file: {err}", "model.mesh") from None
    mesh = parse_mesh(mesh_bytes.decode("utf-8", errors="strict"), units)

    gravity = (_vec3(doc["gravity"], "model.gravity")
               if "gravity" in doc else DEFAULT_GRAVITY)
    materials = _parse_materials(doc["materials"], "model.materials")
    for key in materials:
        if key != "*" and key not in mesh.volume_group_names():
            raise ModelFileError(
                f"material group {key!r} does not exist in the mesh "
                f"(volume groups: {sorted(mesh.volume_group_names())})",
                f"model.materials.{key}")

    dirichlet, couplings, joints = _parse_constraints(
        doc.get("constraints", {}), "model.constraints")
    cases = _parse_load_cases(doc.get("load_cases", []),
                              "model.load_cases", gravity)
    combos = _parse_combinations(doc.get("combinations", []),
                                 "model.combinations", cases)
    criteria = _parse_criteria(doc.get("criteria"), "model.criteria")
    layout = _parse_layout(doc.get("layout"), "model.layout")

    hotspots = 10
    if "output" in doc:
        out = _obj(doc["output"], "model.output", optional=("hotspots",))
        if "hotspots" in out:
            hotspots = _int(out["hotspots"], "model.output.hotspots")
            if hotspots < 1:
                raise ModelFileError("expected a positive integer",
                                     "model.output.hotspots")

    digests = {
        "model": hashlib.sha256(raw).hexdigest(),
        "mesh": hashlib.sha256(mesh_bytes).hexdigest(),
    }
    return ParsedModel(
        path=path,
        description=str(doc.get("description", "")),
        units=units, mesh_ref=mesh_ref, mesh=mesh, gravity=gravity,
        materials=materials, dirichlet=dirichlet, couplings=couplings,
        joints=joints, load_cases=cases, combinations=combos,
        criteria=criteria, layout=layout, hotspot_count=hotspots,
        digests=digests)


# --- shared command plumbing -------------------------------------------------

def _build(model: ParsedModel):
    transformation = build_transformation(
        model.mesh, model.dirichlet,
        couplings=model.couplings, joints=model.joints)
    return transformation


def _thread_count(n_jobs: int) -> int:
    raw = os.environ.get("AUDIT_THREADS", "").strip()
    default = max(1, min(n_jobs, os.cpu_count() or 1))
    if not raw:
        return default
    try:
        cap = int(raw)
    except ValueError:
        raise ModelFileError(
            f"AUDIT_THREADS must be an integer, got {raw!r}") from None
    return max(1, min(default, cap))


def _slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", name)


def _model_echo(model: ParsedModel) -> dict:
    return {
        "model_file": model.path.name,
        "description": model.description,
        "units": model.units,
        "mesh": model.mesh_ref,
        "n_nodes": model.mesh.n_nodes,
        "n_elements": model.mesh.n_elements,
        "gravity": list(model.gravity),
        "materials": {
            key: {"name": m.name, "E": m.E, "nu": m.nu, "rho": m.rho,
                  "yield_strength": m.yield_strength}
            for key, m in sorted(model.materials.items())
        },
        "load_cases": [c.name for c in model.load_cases],
        "combinations": [c.name for c in model.combinations],
    }


def _validate_statics(model: ParsedModel, transformation) -> list[str]:
    """Resolve every load target; returns human-readable notes."""
    notes = []
    for case in model.load_cases:
        combine([(case, 1.0)], model.mesh, model.materials, transformation)
    quality = validate_mesh(model.mesh)
    if quality.degenerate_count:
        raise ModelFileError(
            f"mesh has {quality.degenerate_count} degenerate elements")
    if quality.unreferenced_nodes:
        notes.append(f"note: {quality.unreferenced_nodes} unreferenced nodes")
    return notes


# --- commands ----------------------------------------------------------------

def cmd_check(args) -> int:
    model = load_model(args.model)
    mesh = model.mesh
    print(f"mesh: {mesh.n_nodes} nodes, {mesh.n_elements} elements "
          f"({model.units}), groups: "
          + (", ".join(sorted(mesh.groups)) or "none"))
    transformation = _build(model)
    n_pre = transformation.n_ext - transformation.n_masters
    print(f"constraints: {transformation.n_masters} master DOFs, "
          f"{n_pre} dependent/prescribed, "
          f"{len(model.couplings)} couplings, {len(model.joints)} joints")
    for note in _validate_statics(model, transformation):
        print(note)
    print(f"loads: {len(model.load_cases)} cases, "
          f"{len(model.combinations)} combinations")
    ok, modes = check_rigid_body_constrained(mesh, transformation)
    if not ok:
        for label in modes:
            print(f"rigid mode: {label}")
        print("check failed: structure is not fully constrained")
        return 3
    print("rigid-body check: constrained")
    print("ok")
    return 0


def cmd_audit(args) -> int:
    model = load_model(args.model)
    if not model.combinations:
        raise ModelFileError("model declares no combinations to audit")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    transformation = _build(model)
    _validate_statics(model, transformation)
    ok, modes = check_rigid_body_constrained(model.mesh, transformation)
    if not ok:
        for label in modes:
            print(f"rigid mode: {label}")
        print("audit aborted: structure is not fully constrained")
        return 3

    K, op = assemble(model.mesh, model.materials)
    vectors = [combine(c.cases, model.mesh, model.materials, transformation)
               for c in model.combinations]
    threads = _thread_count(len(vectors))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            solutions = list(pool.map(
                lambda f: solve(K, f, transformation, method=args.solver),
                vectors))
    else:
        solutions = [solve(K, f, transformation, method=args.solver)
                     for f in vectors]

    summaries = []
    hotspots = []
    for i, (combo, sol) in enumerate(zip(model.combinations, solutions)):
        s = audit(model.mesh, op, sol, combo, model.criteria)
        summaries.append(s)
        hotspots.append((combo.name,
                         tuple(hotspot_table(model.mesh, op, sol, args.top))))
        stem = f"{i + 1:02d}_{_slug(combo.name)}"
        export_vtk(model.mesh, op, sol, out_dir / f"{stem}.vtk",
                   scale=args.scale,
                   title=f"femaudit combination {combo.name}")
        (out_dir / f"{stem}.summary.json").write_text(
            summary_json(s), encoding="utf-8")
        print(f"combination {combo.name}: {s.verdict} "
              f"(utilization {s.utilization:.4f})")

    governing = governing_combination(summaries)
    report = AuditReport(
        model=_model_echo(model), criteria=model.criteria,
        summaries=tuple(summaries), governing=governing,
        version=__version__, digests=model.digests,
        hotspots=tuple(hotspots))
    write_report(report, out_dir / "report.json", out_dir / "report.txt")
    print(f"governing combination: {governing}")
    print(f"verdict: {report.verdict}")
    print(f"report: {out_dir / 'report.json'}")
    return 0 if report.verdict == "PASS" else 1


def cmd_reactions(args) -> int:
    model = load_model(args.model)
    if model.layout is None:
        raise MissingLayout(
            "model file has no layout section; reactions need one")
    result = sweep_envelope(model.layout, args.psi, args.phi,
                            g=model.gravity)
    text = sweep_csv(result)
    best = result.governing
    summary = ("governing pose: slew %g deg, luff %g deg, "
               "|M| = %.6g N*m" % (best.pose.slew_deg, best.pose.luff_deg,
                                   best.moment_norm))
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "reactions.csv").write_text(text, encoding="utf-8")
        print(f"wrote {out_dir / 'reactions.csv'} ({len(result.rows)} rows)")
        print(summary)
    else:
        sys.stdout.write(text)
        print(summary, file=sys.stderr)
    return 0


def cmd_export(args) -> int:
    model = load_model(args.model)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "mesh_canonical.msh").write_text(
        serialize_mesh(model.mesh), encoding="utf-8")
    quality = validate_mesh(model.mesh)
    doc = asdict(quality)
    doc["aspect_histogram"] = dict(quality.aspect_histogram)
    (out_dir / "quality.json").write_text(
        json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {out_dir / 'mesh_canonical.msh'} and {out_dir / 'quality.json'}")
    return 0


# --- argument parsing --------------------------------------------------------

def _grid(text: str):
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError("angle grid is empty")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"angle grid must be comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="femaudit",
        description="Finite-element design audit for bulk-handling "
                    "machine structures")
    parser.add_argument("--version", action="version",
                        version=f"femaudit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="validate model, mesh and constraints")
    p_check.add_argument("model", help="model JSON file")
    p_check.set_defaults(func=cmd_check)

    p_audit = sub.add_parser("audit", help="solve all combinations and audit")
    p_audit.add_argument("model", help="model JSON file")
    p_audit.add_argument("--out", required=True, help="output directory")
    p_audit.add_argument("--solver", choices=("direct", "cg"),
                         default="direct", help="linear solver")
    p_audit.add_argument("--scale", type=float, default=0.0,
                         help="deformation magnification for exported VTK "
                              "coordinates (results are unaffected)")
    p_audit.add_argument("--top", type=int, default=10,
                         help="hotspot rows per combination in the report")
    p_audit.set_defaults(func=cmd_audit)

    p_re = sub.add_parser("reactions", help="slew-bearing wrench sweep")
    p_re.add_argument("model", help="model JSON file (needs a layout section)")
    p_re.add_argument("--psi", required=True, type=_grid,
                      help="slew angles in degrees, comma-separated "
                           "(write --psi=-110,0,110 when the grid starts "
                           "with a negative value)")
    p_re.add_argument("--phi", required=True, type=_grid,
                      help="luff angles in degrees, comma-separated")
    p_re.add_argument("--out", help="output directory (default: CSV to stdout)")
    p_re.set_defaults(func=cmd_reactions)

    p_exp = sub.add_parser("export", help="canonical mesh + quality report")
    p_exp.add_argument("model", help="model JSON file")
    p_exp.add_argument("--out", required=True, help="output directory")
    p_exp.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ModelFileError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except FemAuditError as err:
        print(f"error: {err.__class__.__name__}: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
