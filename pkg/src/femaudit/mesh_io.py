"""Tetrahedral mesh ingestion, validation and region indexing.

Reads the MSH ASCII 2.2 subset ($MeshFormat / $PhysicalNames / $Nodes /
$Elements): 4-node tetrahedra carry volume group tags, and lower-dimension
elements (points, lines, triangles) only contribute their nodes to named
node sets used for constraint and load targeting. Anything else is
rejected with a clear error.

Internally everything is SI (meters); the caller states the file's length
unit and coordinates are converted on ingest. Element connectivity is
canonicalized to positive signed volume so downstream code never sees an
inverted tetrahedron.

Meshes are immutable after construction and safe to share across threads
for read-only use.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .element import _gradients_stacked
from .errors import (
    DanglingReference,
    MalformedSection,
    UnknownGroup,
    UnsupportedElementType,
    UnsupportedVersion,
)

#: Gmsh element type -> node count, for the lower-dimension types whose
#: nodes feed node sets. Type 4 (TET4) is the only solid type accepted.
_NODESET_TYPES = {15: 1, 1: 2, 2: 3, 8: 3, 9: 6}
_TET4_TYPE = 4

#: Supported length units for ingest conversion to meters.
LENGTH_UNITS = {"m": 1.0, "mm": 1e-3}

#: Aspect-ratio histogram bin edges (longest edge / smallest altitude).
ASPECT_BINS = (1.0, 1.5, 2.0, 3.0, 5.0, 10.0)


@dataclass(frozen=True)
class Node:
    """One mesh node: file id and coordinates [m]."""

    id: int
    x: float
    y: float
    z: float


@dataclass(frozen=True)
class Tet4Element:
    """One 4-node tetrahedron: file id, node file ids, region tag name."""

    id: int
    nodes: tuple[int, int, int, int]
    group: str


@dataclass(frozen=True)
class PhysicalGroup:
    """Named region: a volume (element set) or a node set.

    kind is "volume" for element groups and "surface-node-set" for node
    collections; members holds internal 0-based indices, sorted.
    """

    tag: int
    name: str
    kind: str  # "volume" | "surface-node-set"
    members: tuple[int, ...] = field(repr=False)


class Mesh:
    """Immutable tetrahedral mesh with named regions.

    Attributes:
        node_ids: (n,) file node ids.
        coords: (n, 3) node coordinates [m].
        elem_ids: (m,) file element ids.
        conn: (m, 4) 0-based connectivity, positive-volume orientation.
        elem_group: (m,) group name per element ("" if untagged).
        groups: name -> PhysicalGroup.
    """

    def __init__(
        self,
        node_ids: NDArray[np.int64],
        coords: NDArray[np.float64],
        elem_ids: NDArray[np.int64],
        conn: NDArray[np.int64],
        elem_group: list[str],
        groups: dict[str, PhysicalGroup],
    ):
        self.node_ids = np.ascontiguousarray(node_ids, dtype=np.int64)
        self.coords = np.ascontiguousarray(coords, dtype=np.float64)
        self.elem_ids = np.ascontiguousarray(elem_ids, dtype=np.int64)
        self.conn = np.ascontiguousarray(conn, dtype=np.int64)
        self.elem_group = list(elem_group)
        self.groups = dict(groups)
        self._node_index = {int(i): k for k, i in enumerate(self.node_ids)}
        self._elem_index = {int(i): k for k, i in enumerate(self.elem_ids)}
        self._orient()
        for arr in (self.node_ids, self.coords, self.elem_ids, self.conn):
            arr.setflags(write=False)

    # -- construction ------------------------------------------------------

    @classmethod
    def from_arrays(
        cls,
        coords: NDArray[np.float64],
        conn: NDArray[np.int64],
        groups: dict[str, PhysicalGroup] | None = None,
        elem_group: list[str] | None = None,
    ) -> "Mesh":
        """Build a mesh from raw arrays with 1-based sequential file ids."""
        coords = np.asarray(coords, dtype=float)
        conn = np.asarray(conn, dtype=np.int64)
        n, m = coords.shape[0], conn.shape[0]
        return cls(
            node_ids=np.arange(1, n + 1, dtype=np.int64),
            coords=coords,
            elem_ids=np.arange(1, m + 1, dtype=np.int64),
            conn=conn,
            elem_group=elem_group if elem_group is not None else [""] * m,
            groups=groups or {},
        )

    def _orient(self):
        """Flip node order where the signed volume is negative."""
        if self.n_elements == 0:
            return
        _, vols = _gradients_stacked(self.coords[self.conn])
        flip = vols < 0.0
        if np.any(flip):
            self.conn[flip] = self.conn[flip][:, [0, 1, 3, 2]]

    # -- basic queries -----------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return self.coords.shape[0]

    @property
    def n_elements(self) -> int:
        return self.conn.shape[0]

    def node(self, node_id: int) -> Node:
        k = self._node_index[int(node_id)]
        x, y, z = self.coords[k]
        return Node(id=int(node_id), x=float(x), y=float(y), z=float(z))

    def element(self, elem_id: int) -> Tet4Element:
        k = self._elem_index[int(elem_id)]
        return Tet4Element(
            id=int(elem_id),
            nodes=tuple(int(self.node_ids[j]) for j in self.conn[k]),
            group=self.elem_group[k],
        )

    def node_index(self, node_id: int) -> int:
        try:
            return self._node_index[int(node_id)]
        except KeyError:
            raise DanglingReference(f"node id {node_id} not in mesh") from None

    def volumes(self) -> NDArray[np.float64]:
        """Signed element volumes [m^3] (>= 0 after orientation)."""
        _, vols = _gradients_stacked(self.coords[self.conn])
        return vols

    def centroids(self) -> NDArray[np.float64]:
        """(m, 3) element centroids [m]."""
        return self.coords[self.conn].mean(axis=1)

    # -- group access ------------------------------------------------------

    def group(self, name: str) -> PhysicalGroup:
        try:
            return self.groups[name]
        except KeyError:
            raise UnknownGroup(
                f"unknown group {name!r}; defined: {sorted(self.groups)}"
            ) from None

    def node_set(self, name: str) -> NDArray[np.int64]:
        """Internal node indices of a node-set group."""
        g = self.group(name)
        if g.kind != "surface-node-set":
            raise UnknownGroup(f"group {name!r} is a {g.kind}, not a node set")
        return np.asarray(g.members, dtype=np.int64)

    def element_set(self, name: str) -> NDArray[np.int64]:
        """Internal element indices of a volume group."""
        g = self.group(name)
        if g.kind != "volume":
            raise UnknownGroup(f"group {name!r} is a {g.kind}, not a volume group")
        return np.asarray(g.members, dtype=np.int64)

    def volume_group_names(self) -> list[str]:
        return [g.name for g in self.groups.values() if g.kind == "volume"]

    def __repr__(self) -> str:
        return (f"Mesh(nodes={self.n_nodes}, elements={self.n_elements}, "
                f"groups={sorted(self.groups)})")


def resolve_group(mesh: Mesh, name: str) -> set[int]:
    """File ids of the nodes or elements in a named group.

    Volume groups resolve to element ids, node sets to node ids,
    exactly as tagged in the mesh file.
    """
    g = mesh.group(name)
    if g.kind == "volume":
        return {int(mesh.elem_ids[k]) for k in g.members}
    return {int(mesh.node_ids[k]) for k in g.members}


# --------------------------------------------------------------------------
# MSH ASCII 2.2 reader
# --------------------------------------------------------------------------


def parse_mesh(text: str, length_unit: str = "m") -> Mesh:
    """Parse MSH ASCII 2.2 content into a Mesh.

    Args:
        text: full file content.
        length_unit: unit of the file's coordinates ("m" or "mm");
            converted to meters on ingest.

    Raises:
        UnsupportedVersion: not MSH ASCII 2.2.
        MalformedSection: structural problem, with the line number.
        UnsupportedElementType: solid elements other than TET4.
        DanglingReference: element refers to an undefined node id.
    """
    if length_unit not in LENGTH_UNITS:
        raise ValueError(f"length_unit must be one of {sorted(LENGTH_UNITS)}")
    scale = LENGTH_UNITS[length_unit]

    lines = text.splitlines()
    sections = _split_sections(lines)

    if "MeshFormat" not in sections:
        raise MalformedSection("missing $MeshFormat section")
    fmt_lines, fmt_start = sections["MeshFormat"]
    if not fmt_lines:
        raise MalformedSection("empty $MeshFormat section", fmt_start)
    fmt = fmt_lines[0][1].split()
    if len(fmt) != 3:
        raise MalformedSection("malformed $MeshFormat header", fmt_lines[0][0])
    if fmt[0] != "2.2":
        raise UnsupportedVersion(f"MSH version {fmt[0]} not supported; need ASCII 2.2")
    if fmt[1] != "0":
        raise UnsupportedVersion("binary MSH files are not supported; need ASCII 2.2")

    phys_names = _parse_physical_names(sections)
    node_ids, coords = _parse_nodes(sections, scale)
    node_index = {}
    for k, nid in enumerate(node_ids):
        if nid in node_index:
            raise MalformedSection(f"duplicate node id {nid}")
        node_index[nid] = k

    return _parse_elements(sections, phys_names, node_ids, coords, node_index)


def _split_sections(lines: list[str]) -> dict[str, tuple[list[tuple[int, str]], int]]:
    """Split into sections: name -> ((lineno, text) body lines, header lineno)."""
    sections: dict[str, tuple[list[tuple[int, str]], int]] = {}
    current: str | None = None
    body: list[tuple[int, str]] = []
    start = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("$"):
            if line.startswith("$End"):
                if current is None or line != f"$End{current}":
                    raise MalformedSection(f"unexpected {line}", lineno)
                sections[current] = (body, start)
                current, body = None, []
            else:
                if current is not None:
                    raise MalformedSection(
                        f"section ${current} not closed before {line}", lineno)
                current = line[1:]
                start = lineno
                body = []
        else:
            if current is None:
                raise MalformedSection(f"content outside any section: {line!r}", lineno)
            body.append((lineno, line))
    if current is not None:
        raise MalformedSection(f"section ${current} never closed", start)
    return sections


def _parse_physical_names(sections) -> dict[tuple[int, int], str]:
    if "PhysicalNames" not in sections:
        return {}
    body, start = sections["PhysicalNames"]
    if not body:
        raise MalformedSection("empty $PhysicalNames section", start)
    try:
        count = int(body[0][1])
    except ValueError:
        raise MalformedSection("bad $PhysicalNames count", body[0][0]) from None
    if count != len(body) - 1:
        raise MalformedSection(
            f"$PhysicalNames declares {count} entries, found {len(body) - 1}", body[0][0])
    names: dict[tuple[int, int], str] = {}
    seen: set[str] = set()
    for lineno, line in body[1:]:
        parts = line.split(None, 2)
        if len(parts) != 3 or not (parts[2].startswith('"') and parts[2].endswith('"')):
            raise MalformedSection(f"bad physical name entry {line!r}", lineno)
        try:
            dim, tag = int(parts[0]), int(parts[1])
        except ValueError:
            raise MalformedSection(f"bad physical name entry {line!r}", lineno) from None
        name = parts[2][1:-1]
        if name in seen:
            raise MalformedSection(f"duplicate physical name {name!r}", lineno)
        seen.add(name)
        names[(dim, tag)] = name
    return names


def _parse_nodes(sections, scale):
    if "Nodes" not in sections:
        raise MalformedSection("missing $Nodes section")
    body, start = sections["Nodes"]
    if not body:
        raise MalformedSection("empty $Nodes section", start)
    try:
        count = int(body[0][1])
    except ValueError:
        raise MalformedSection("bad $Nodes count", body[0][0]) from None
    if count != len(body) - 1:
        raise MalformedSection(
            f"$Nodes declares {count} nodes, found {len(body) - 1}", body[0][0])
    ids = np.empty(count, dtype=np.int64)
    coords = np.empty((count, 3), dtype=np.float64)
    for k, (lineno, line) in enumerate(body[1:]):
        parts = line.split()
        if len(parts) != 4:
            raise MalformedSection(f"bad node line {line!r}", lineno)
        try:
            nid = int(parts[0])
            xyz = [float(p) for p in parts[1:]]
        except ValueError:
            raise MalformedSection(f"bad node line {line!r}", lineno) from None
        if nid <= 0:
            raise MalformedSection(f"node id must be positive, got {nid}", lineno)
        if not all(np.isfinite(xyz)):
            raise MalformedSection(f"non-finite coordinate in {line!r}", lineno)
        ids[k] = nid
        coords[k] = xyz
    return list(map(int, ids)), coords * scale


def _parse_elements(sections, phys_names, node_ids, coords, node_index) -> Mesh:
    if "Elements" not in sections:
        raise MalformedSection("missing $Elements section")
    body, start = sections["Elements"]
    if not body:
        raise MalformedSection("empty $Elements section", start)
    try:
        count = int(body[0][1])
    except ValueError:
        raise MalformedSection("bad $Elements count", body[0][0]) from None
    if count != len(body) - 1:
        raise MalformedSection(
            f"$Elements declares {count} elements, found {len(body) - 1}", body[0][0])

    elem_ids: list[int] = []
    conn_rows: list[list[int]] = []
    elem_tags: list[int] = []
    # physical tags are per-dimension in MSH: key node sets by (dim, tag)
    nodeset_members: dict[tuple[int, int], set[int]] = {}
    seen_eids: set[int] = set()
    type_dims = {15: 0, 1: 1, 2: 2, 8: 1, 9: 2}

    for lineno, line in body[1:]:
        parts = line.split()
        try:
            nums = [int(p) for p in parts]
        except ValueError:
            raise MalformedSection(f"bad element line {line!r}", lineno) from None
        if len(nums) < 3:
            raise MalformedSection(f"bad element line {line!r}", lineno)
        eid, etype, ntags = nums[0], nums[1], nums[2]
        if eid in seen_eids:
            raise MalformedSection(f"duplicate element id {eid}", lineno)
        seen_eids.add(eid)
        tags = nums[3:3 + ntags]
        node_refs = nums[3 + ntags:]
        phys = tags[0] if tags else 0

        if etype == _TET4_TYPE:
            if len(node_refs) != 4:
                raise MalformedSection(
                    f"tet element {eid} has {len(node_refs)} nodes", lineno)
            if len(set(node_refs)) != 4:
                raise MalformedSection(
                    f"tet element {eid} repeats a node id", lineno)
            row = []
            for ref in node_refs:
                if ref not in node_index:
                    raise DanglingReference(
                        f"element {eid} references undefined node id {ref}")
                row.append(node_index[ref])
            elem_ids.append(eid)
            conn_rows.append(row)
            elem_tags.append(phys)
        elif etype in _NODESET_TYPES:
            if len(node_refs) != _NODESET_TYPES[etype]:
                raise MalformedSection(
                    f"element {eid} (type {etype}) has {len(node_refs)} nodes", lineno)
            for ref in node_refs:
                if ref not in node_index:
                    raise DanglingReference(
                        f"element {eid} references undefined node id {ref}")
            if phys:
                key = (type_dims[etype], phys)
                nodeset_members.setdefault(key, set()).update(
                    node_index[r] for r in node_refs)
        else:
            raise UnsupportedElementType(
                f"element {eid} has unsupported type {etype}; "
                f"only TET4 solids (type 4) and lower-dimension tags are read")

    # group assembly: volumes from tet tags, node sets from lower-dim tags
    groups: dict[str, PhysicalGroup] = {}
    elem_group_names: list[str] = []
    vol_members: dict[int, list[int]] = {}
    for k, tag in enumerate(elem_tags):
        if tag:
            vol_members.setdefault(tag, []).append(k)
    for tag in sorted(vol_members):
        name = phys_names.get((3, tag), f"volume_{tag}")
        groups[name] = PhysicalGroup(tag=tag, name=name, kind="volume",
                                     members=tuple(sorted(vol_members[tag])))
    for dim, tag in sorted(nodeset_members):
        name = phys_names.get((dim, tag), f"nodeset_{tag}")
        if name in groups:
            name = f"nodeset_d{dim}_{tag}"
        if name in groups:
            raise MalformedSection(f"group name {name!r} defined twice")
        groups[name] = PhysicalGroup(
            tag=tag, name=name, kind="surface-node-set",
            members=tuple(sorted(nodeset_members[(dim, tag)])))
    # named volume groups with no elements are kept, empty
    for (dim, tag), name in phys_names.items():
        if name in groups:
            continue
        kind = "volume" if dim == 3 else "surface-node-set"
        groups[name] = PhysicalGroup(tag=tag, name=name, kind=kind, members=())

    tag_to_name = {g.tag: g.name for g in groups.values() if g.kind == "volume"}
    for tag in elem_tags:
        elem_group_names.append(tag_to_name.get(tag, ""))

    return Mesh(
        node_ids=np.asarray(node_ids, dtype=np.int64),
        coords=coords,
        elem_ids=np.asarray(elem_ids, dtype=np.int64),
        conn=np.asarray(conn_rows, dtype=np.int64).reshape(len(conn_rows), 4),
        elem_group=elem_group_names,
        groups=groups,
    )


# --------------------------------------------------------------------------
# Canonical serialization (round-trip support, always meters)
# --------------------------------------------------------------------------


def serialize_mesh(mesh: Mesh) -> str:
    """Write the mesh back as MSH ASCII 2.2, coordinates in meters.

    Node sets are emitted as 1-node point elements so they survive the
    round trip; parse(serialize(mesh)) reproduces coordinates bit-exactly
    and connectivity exactly.
    """
    out: list[str] = ["$MeshFormat", "2.2 0 8", "$EndMeshFormat"]

    # emit groups in name order so serialization is canonical
    by_name = sorted(mesh.groups.values(), key=lambda g: g.name)
    vol_groups = [g for g in by_name if g.kind == "volume"]
    set_groups = [g for g in by_name if g.kind == "surface-node-set"]
    used = {g.tag for g in vol_groups}
    set_tags: dict[str, int] = {}
    next_tag = max(used, default=0)
    for g in set_groups:
        tag = g.tag
        if tag in used:
            next_tag += 1
            tag = next_tag
        used.add(tag)
        set_tags[g.name] = tag

    if vol_groups or set_groups:
        out.append("$PhysicalNames")
        out.append(str(len(vol_groups) + len(set_groups)))
        for g in vol_groups:
            out.append(f'3 {g.tag} "{g.name}"')
        for g in set_groups:
            out.append(f'0 {set_tags[g.name]} "{g.name}"')
        out.append("$EndPhysicalNames")

    out.append("$Nodes")
    out.append(str(mesh.n_nodes))
    for nid, (x, y, z) in zip(mesh.node_ids, mesh.coords):
        out.append(f"{nid} {x:.17g} {y:.17g} {z:.17g}")
    out.append("$EndNodes")

    name_to_tag = {g.name: g.tag for g in vol_groups}
    point_count = sum(len(g.members) for g in set_groups)
    out.append("$Elements")
    out.append(str(mesh.n_elements + point_count))
    for eid, row, gname in zip(mesh.elem_ids, mesh.conn, mesh.elem_group):
        tag = name_to_tag.get(gname, 0)
        nodes = " ".join(str(int(mesh.node_ids[j])) for j in row)
        out.append(f"{eid} 4 2 {tag} {tag} {nodes}")
    next_eid = int(mesh.elem_ids.max()) + 1 if mesh.n_elements else 1
    for g in set_groups:
        tag = set_tags[g.name]
        for k in g.members:
            out.append(f"{next_eid} 15 2 {tag} {tag} {int(mesh.node_ids[k])}")
            next_eid += 1
    out.append("$EndElements")
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# Quality reporting
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class QualityReport:
    """Deterministic mesh quality summary."""

    n_nodes: int
    n_elements: int
    min_volume: float
    max_volume: float
    mean_volume: float
    total_volume: float
    aspect_histogram: tuple[tuple[str, int], ...]
    degenerate_count: int
    unreferenced_nodes: int


def validate_mesh(mesh: Mesh, degeneracy_rel_tol: float = 1e-12) -> QualityReport:
    """Volume statistics, aspect-ratio histogram and degeneracy count.

    An element is degenerate when its volume is at or below
    degeneracy_rel_tol times the mean element volume. Reporting only;
    never raises.
    """
    vols = mesh.volumes()
    mean = float(vols.mean()) if len(vols) else 0.0
    degenerate = int(np.sum(vols <= degeneracy_rel_tol * mean)) if len(vols) else 0

    aspect = _aspect_ratios(mesh, vols)
    edges = ASPECT_BINS
    labels = [f"[{edges[i]:g},{edges[i + 1]:g})" for i in range(len(edges) - 1)]
    labels.append(f"[{edges[-1]:g},inf)")
    counts = [0] * len(labels)
    for a in aspect:
        for i in range(len(edges) - 1):
            if a < edges[i + 1]:
                counts[i] += 1
                break
        else:
            counts[-1] += 1

    referenced = np.zeros(mesh.n_nodes, dtype=bool)
    if mesh.n_elements:
        referenced[mesh.conn.ravel()] = True
    for g in mesh.groups.values():
        if g.kind == "surface-node-set":
            referenced[np.asarray(g.members, dtype=np.int64)] = True

    return QualityReport(
        n_nodes=mesh.n_nodes,
        n_elements=mesh.n_elements,
        min_volume=float(vols.min()) if len(vols) else 0.0,
        max_volume=float(vols.max()) if len(vols) else 0.0,
        mean_volume=mean,
        total_volume=float(vols.sum()) if len(vols) else 0.0,
        aspect_histogram=tuple(zip(labels, counts)),
        degenerate_count=degenerate,
        unreferenced_nodes=int(np.sum(~referenced)),
    )


def _aspect_ratios(mesh: Mesh, vols: NDArray[np.float64]) -> NDArray[np.float64]:
    """Longest edge over smallest altitude per element; inf for degenerate."""
    p = mesh.coords[mesh.conn]  # (m, 4, 3)
    pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    edge_len = np.stack(
        [np.linalg.norm(p[:, i] - p[:, j], axis=1) for i, j in pairs], axis=1)
    longest = edge_len.max(axis=1)
    # altitude_i = 3 V / area(face opposite i)
    faces = [(1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2)]
    areas = np.stack(
        [0.5 * np.linalg.norm(
            np.cross(p[:, b] - p[:, a], p[:, c] - p[:, a]), axis=1)
         for a, b, c in faces], axis=1)
    max_area = areas.max(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        min_alt = 3.0 * vols / max_area
        ar = np.where(min_alt > 0, longest / np.where(min_alt > 0, min_alt, 1.0), np.inf)
    return ar
