"""Design-audit verdicts and artifact emission.

The audit turns a solved displacement field into a pass/fail statement:
element von Mises maxima against a permissible stress, deflection
against a limit, hotspot localization, and deterministic report and
VTK output. Verdicts use unaveraged element-constant stresses; nodal
averages appear only in the visualization output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from numpy.typing import NDArray

from .errors import IoFailure
from .loads import DEFAULT_PERMISSIBLE
from .mesh_io import Mesh
from .system import ElementOperator, Solution

_CASE_CLASSES = ("I", "II", "III")

REPORT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class AuditCriteria:
    """Audit thresholds.

    ``class_permissible`` maps a combination class ("I", "II", "III") to
    its permissible stress [Pa]; classes not listed fall back to the
    default allowable, and the summary flags that. ``deflection_limit``
    of None disables the deflection check (also flagged).
    ``classification`` carries equipment class labels for the report.
    """

    class_permissible: Mapping[str, float] | None = None
    deflection_limit: float | None = None
    classification: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.class_permissible is not None:
            for cls, value in self.class_permissible.items():
                if cls not in _CASE_CLASSES:
                    raise ValueError(f"unknown combination class {cls!r}")
                if not np.isfinite(value) or value <= 0:
                    raise ValueError(
                        f"permissible stress for class {cls} must be positive")
        if self.deflection_limit is not None:
            if not np.isfinite(self.deflection_limit) or self.deflection_limit <= 0:
                raise ValueError("deflection limit must be positive")

    def permissible_for(self, combination) -> tuple[float, bool]:
        """(permissible stress, True when no explicit value applied)."""
        if getattr(combination, "permissible", None) is not None:
            return float(combination.permissible), False
        table = self.class_permissible or {}
        if combination.case_class in table:
            return float(table[combination.case_class]), False
        return DEFAULT_PERMISSIBLE, True


@dataclass(frozen=True)
class GroupMax:
    group: str
    von_mises: float
    element: int


@dataclass(frozen=True)
class AuditSummary:
    """Verdict for one combination.

    PASS requires utilization <= 1 and, when a deflection limit is set,
    max deflection within it. Ties in the maxima resolve to the lowest
    element or node id.
    """

    name: str
    case_class: str
    max_von_mises: float
    max_vm_element: int
    max_vm_centroid: tuple[float, float, float]
    max_deflection: float
    max_deflection_node: int
    permissible: float
    permissible_defaulted: bool
    utilization: float
    deflection_limit: float | None
    verdict: str
    flags: tuple[str, ...]
    group_max: tuple[GroupMax, ...]


def _argmax_lowest_id(values: NDArray, ids: NDArray) -> int:
    """Index of the maximum; exact ties resolve to the lowest id."""
    top = values.max()
    candidates = np.flatnonzero(values == top)
    return int(candidates[np.argmin(ids[candidates])])


def audit(
    mesh: Mesh,
    op: ElementOperator,
    solution: Solution,
    combination,
    criteria: AuditCriteria,
) -> AuditSummary:
    """Audit one solved combination against the criteria.

    ``combination`` needs ``name``, ``case_class`` and ``permissible``
    attributes (a :class:`~femaudit.loads.Combination` in practice).
    """
    vm = op.von_mises(solution.u_mesh)
    k = _argmax_lowest_id(vm, mesh.elem_ids)
    centroid = mesh.centroids()[k]

    disp = solution.displacements()
    mags = np.linalg.norm(disp, axis=1)
    p = _argmax_lowest_id(mags, mesh.node_ids)

    permissible, defaulted = criteria.permissible_for(combination)
    utilization = float(vm[k]) / permissible

    flags = []
    if defaulted:
        flags.append(
            "permissible stress defaulted to %.17g Pa" % DEFAULT_PERMISSIBLE)
    limit = criteria.deflection_limit
    if limit is None:
        flags.append("deflection check skipped (no limit configured)")
        deflection_ok = True
    else:
        deflection_ok = mags[p] <= limit

    group_rows = []
    for gname in sorted(mesh.volume_group_names()):
        idx = mesh.element_set(gname)
        if idx.size == 0:
            continue
        j = idx[_argmax_lowest_id(vm[idx], mesh.elem_ids[idx])]
        group_rows.append(GroupMax(gname, float(vm[j]),
                                   int(mesh.elem_ids[j])))

    verdict = "PASS" if (utilization <= 1.0 and deflection_ok) else "FAIL"
    return AuditSummary(
        name=combination.name,
        case_class=combination.case_class,
        max_von_mises=float(vm[k]),
        max_vm_element=int(mesh.elem_ids[k]),
        max_vm_centroid=(float(centroid[0]), float(centroid[1]),
                         float(centroid[2])),
        max_deflection=float(mags[p]),
        max_deflection_node=int(mesh.node_ids[p]),
        permissible=permissible,
        permissible_defaulted=defaulted,
        utilization=utilization,
        deflection_limit=limit,
        verdict=verdict,
        flags=tuple(flags),
        group_max=tuple(group_rows),
    )


@dataclass(frozen=True)
class HotspotRow:
    element: int
    von_mises: float
    centroid: tuple[float, float, float]
    group: str


def hotspot_table(
    mesh: Mesh, op: ElementOperator, solution: Solution, n: int,
) -> list[HotspotRow]:
    """Top-n elements by von Mises, descending; ties by element id."""
    if n < 1:
        raise ValueError("hotspot count must be >= 1")
    vm = op.von_mises(solution.u_mesh)
    order = np.lexsort((mesh.elem_ids, -vm))[: min(n, mesh.n_elements)]
    centroids = mesh.centroids()
    return [
        HotspotRow(
            element=int(mesh.elem_ids[k]),
            von_mises=float(vm[k]),
            centroid=(float(centroids[k, 0]), float(centroids[k, 1]),
                      float(centroids[k, 2])),
            group=mesh.elem_group[k] or "",
        )
        for k in order
    ]


def _g17(x: float) -> str:
    return "%.17g" % x


def vtk_text(
    mesh: Mesh,
    op: ElementOperator,
    solution: Solution,
    scale: float = 0.0,
    title: str = "femaudit results",
) -> str:
    """Legacy ASCII VTK unstructured grid with results attached.

    Points are written at x + scale·u (scale 0 keeps the reference
    shape); point data carries the displacement vectors and a
    volume-weighted nodal von Mises average, cell data the element
    von Mises values the audit verdict is based on.
    """
    disp = solution.displacements()
    coords = mesh.coords + scale * disp
    vm = op.von_mises(solution.u_mesh)

    weighted = np.zeros(mesh.n_nodes)
    volume_sum = np.zeros(mesh.n_nodes)
    vols = op.vols
    np.add.at(weighted, mesh.conn.reshape(-1), np.repeat(vm * vols, 4))
    np.add.at(volume_sum, mesh.conn.reshape(-1), np.repeat(vols, 4))
    nodal = np.where(volume_sum > 0,
                     weighted / np.maximum(volume_sum, 1e-300), 0.0)

    out = []
    out.append("# vtk DataFile Version 3.0")
    out.append(title)
    out.append("ASCII")
    out.append("DATASET UNSTRUCTURED_GRID")
    out.append(f"POINTS {mesh.n_nodes} double")
    for row in coords:
        out.append(" ".join(_g17(v) for v in row))
    out.append(f"CELLS {mesh.n_elements} {5 * mesh.n_elements}")
    for row in mesh.conn:
        out.append("4 %d %d %d %d" % tuple(row))
    out.append(f"CELL_TYPES {mesh.n_elements}")
    out.extend(["10"] * mesh.n_elements)
    out.append(f"POINT_DATA {mesh.n_nodes}")
    out.append("VECTORS displacement double")
    for row in disp:
        out.append(" ".join(_g17(v) for v in row))
    out.append("SCALARS von_mises_nodal double 1")
    out.append("LOOKUP_TABLE default")
    out.extend(_g17(v) for v in nodal)
    out.append(f"CELL_DATA {mesh.n_elements}")
    out.append("SCALARS von_mises double 1")
    out.append("LOOKUP_TABLE default")
    out.extend(_g17(v) for v in vm)
    return "\n".join(out) + "\n"


def export_vtk(
    mesh: Mesh,
    op: ElementOperator,
    solution: Solution,
    path,
    scale: float = 0.0,
    title: str = "femaudit results",
) -> None:
    text = vtk_text(mesh, op, solution, scale=scale, title=title)
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    except OSError as err:
        raise IoFailure(f"cannot write VTK file {path}: {err}") from None


@dataclass(frozen=True)
class AuditReport:
    """Everything the audit produced, ready for serialization.

    ``hotspots`` holds (combination name, rows) pairs so a reviewer can
    tell a localized spike from a structural maximum.
    """

    model: dict
    criteria: AuditCriteria
    summaries: tuple[AuditSummary, ...]
    governing: str
    version: str
    digests: dict[str, str]
    hotspots: tuple[tuple[str, tuple[HotspotRow, ...]], ...] = ()

    @property
    def verdict(self) -> str:
        return "PASS" if all(s.verdict == "PASS" for s in self.summaries) else "FAIL"


def _summary_dict(s: AuditSummary) -> dict:
    return {
        "name": s.name,
        "case_class": s.case_class,
        "max_von_mises_pa": s.max_von_mises,
        "max_vm_element": s.max_vm_element,
        "max_vm_centroid": list(s.max_vm_centroid),
        "max_deflection_m": s.max_deflection,
        "max_deflection_node": s.max_deflection_node,
        "permissible_pa": s.permissible,
        "permissible_defaulted": s.permissible_defaulted,
        "utilization": s.utilization,
        "deflection_limit_m": s.deflection_limit,
        "verdict": s.verdict,
        "flags": list(s.flags),
        "group_max": [
            {"group": g.group, "von_mises_pa": g.von_mises,
             "element": g.element}
            for g in s.group_max
        ],
    }


def summary_json(s: AuditSummary) -> str:
    """Single combination summary as deterministic JSON text."""
    return json.dumps(_summary_dict(s), indent=2) + "\n"


def report_dict(report: AuditReport) -> dict:
    """Stable-ordered plain dict of the whole report."""
    return {
        "report": "design-audit",
        "schema_version": REPORT_SCHEMA_VERSION,
        "toolkit": {"name": "femaudit", "version": report.version},
        "inputs": {"digests": dict(sorted(report.digests.items()))},
        "model": report.model,
        "criteria": {
            "class_permissible": dict(
                sorted((report.criteria.class_permissible or {}).items())),
            "deflection_limit_m": report.criteria.deflection_limit,
            "classification": list(report.criteria.classification),
        },
        "combinations": [_summary_dict(s) for s in report.summaries],
        "hotspots": {
            name: [
                {"element": r.element, "von_mises_pa": r.von_mises,
                 "centroid": list(r.centroid), "group": r.group}
                for r in rows
            ]
            for name, rows in report.hotspots
        },
        "governing_combination": report.governing,
        "verdict": report.verdict,
    }


def report_json(report: AuditReport) -> str:
    return json.dumps(report_dict(report), indent=2) + "\n"


def report_text(report: AuditReport) -> str:
    """Human-readable rendering with the same content as the JSON."""
    lines = []
    lines.append("DESIGN AUDIT REPORT")
    lines.append(f"toolkit: femaudit {report.version}")
    if report.criteria.classification:
        lines.append("classification: " + ", ".join(report.criteria.classification))
    for name, digest in sorted(report.digests.items()):
        lines.append(f"input {name}: sha256 {digest}")
    lines.append("")
    lines.append(f"verdict: {report.verdict}")
    lines.append(f"governing combination: {report.governing}")
    lines.append("")
    for s in report.summaries:
        lines.append(f"combination {s.name} (class {s.case_class}): {s.verdict}")
        lines.append("  max von Mises   %s Pa (element %d at %s, %s, %s)" % (
            _g17(s.max_von_mises), s.max_vm_element,
            _g17(s.max_vm_centroid[0]), _g17(s.max_vm_centroid[1]),
            _g17(s.max_vm_centroid[2])))
        suffix = " [defaulted]" if s.permissible_defaulted else ""
        lines.append("  permissible     %s Pa%s" % (_g17(s.permissible), suffix))
        lines.append("  utilization     %s" % _g17(s.utilization))
        if s.deflection_limit is None:
            lines.append("  max deflection  %s m (node %d), no limit set" % (
                _g17(s.max_deflection), s.max_deflection_node))
        else:
            lines.append("  max deflection  %s m (node %d), limit %s m" % (
                _g17(s.max_deflection), s.max_deflection_node,
                _g17(s.deflection_limit)))
        for g in s.group_max:
            lines.append("  group %-14s max %s Pa (element %d)" % (
                g.group, _g17(g.von_mises), g.element))
        for flag in s.flags:
            lines.append("  note: %s" % flag)
        lines.append("")
    for name, rows in report.hotspots:
        lines.append(f"hotspots for {name}:")
        for r in rows:
            lines.append("  element %-8d %s Pa  group %s" % (
                r.element, _g17(r.von_mises), r.group or "-"))
        lines.append("")
    return "\n".join(lines)


def write_report(report: AuditReport, json_path, text_path=None) -> None:
    """Serialize the report; both renderings are deterministic."""
    try:
        with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(report_json(report))
        if text_path is not None:
            with open(text_path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(report_text(report))
    except OSError as err:
        raise IoFailure(f"cannot write report: {err}") from None
