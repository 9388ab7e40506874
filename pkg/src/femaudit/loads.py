"""Load taxonomy, load vectors and standards combinations.

Loads are grouped in three categories (main / additional / special) and
declared as cases; a combination is a weighted list of cases checked
against one permissible stress. Vectors use the extended DOF layout of
the active :class:`~femaudit.constraints.Transformation`.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union

import numpy as np
from numpy.typing import NDArray

from .constraints import Transformation
from .element import Material
from .errors import MismatchedModel
from .mesh_io import Mesh
from .system import _element_materials

DEFAULT_GRAVITY = (0.0, 0.0, -9.81)

# the paper's allowable for the audited machine class; used whenever a
# combination does not state its own limit (and flagged in the report)
DEFAULT_PERMISSIBLE = 240e6


class LoadCategory(Enum):
    DEAD_LOAD = "DeadLoad"
    MATERIAL_LOAD = "MaterialLoad"
    INCRUSTATION = "Incrustation"
    NORMAL_DIGGING = "NormalDigging"
    WIND_IN_SERVICE = "WindInService"
    ABNORMAL_DIGGING = "AbnormalDigging"
    SNOW_ICE = "SnowIce"
    FRICTION = "Friction"
    SKEWING = "Skewing"
    WIND_OUT_OF_SERVICE = "WindOutOfService"
    SEISMIC = "Seismic"
    BUFFER_EFFECT = "BufferEffect"
    BLOCKING_OF_TRAVEL = "BlockingOfTravel"

    @property
    def group(self) -> str:
        """"main", "additional" or "special"."""
        return _CATEGORY_GROUP[self]


_CATEGORY_GROUP = {
    LoadCategory.DEAD_LOAD: "main",
    LoadCategory.MATERIAL_LOAD: "main",
    LoadCategory.INCRUSTATION: "main",
    LoadCategory.NORMAL_DIGGING: "main",
    LoadCategory.WIND_IN_SERVICE: "additional",
    LoadCategory.ABNORMAL_DIGGING: "additional",
    LoadCategory.SNOW_ICE: "additional",
    LoadCategory.FRICTION: "additional",
    LoadCategory.SKEWING: "additional",
    LoadCategory.WIND_OUT_OF_SERVICE: "special",
    LoadCategory.SEISMIC: "special",
    LoadCategory.BUFFER_EFFECT: "special",
    LoadCategory.BLOCKING_OF_TRAVEL: "special",
}


def _check_vec3(value, what: str) -> NDArray[np.float64]:
    v = np.asarray(value, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"{what} must be a 3-vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{what} must be finite, got {value!r}")
    return v


@dataclass(frozen=True)
class GravityLoad:
    """Self-weight of every element under the acceleration vector g."""

    g: tuple[float, float, float] = DEFAULT_GRAVITY

    def __post_init__(self) -> None:
        _check_vec3(self.g, "gravity vector")


@dataclass(frozen=True)
class NodalForce:
    """A total force split evenly over the nodes of a named node set."""

    node_set: str
    total: tuple[float, float, float]

    def __post_init__(self) -> None:
        if not self.node_set:
            raise ValueError("node set name must be non-empty")
        _check_vec3(self.total, "nodal force total")


@dataclass(frozen=True)
class InterfaceWrench:
    """Force [N] and moment [N·m] resultant at a coupling reference."""

    Fx: float = 0.0
    Fy: float = 0.0
    Fz: float = 0.0
    Mx: float = 0.0
    My: float = 0.0
    Mz: float = 0.0

    def __post_init__(self) -> None:
        for name in ("Fx", "Fy", "Fz", "Mx", "My", "Mz"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"wrench component {name} must be finite")

    def as_array(self) -> NDArray[np.float64]:
        return np.array([self.Fx, self.Fy, self.Fz,
                         self.Mx, self.My, self.Mz], dtype=float)


@dataclass(frozen=True)
class WrenchLoad:
    """An :class:`InterfaceWrench` applied at a named rigid coupling."""

    coupling: str
    wrench: InterfaceWrench

    def __post_init__(self) -> None:
        if not self.coupling:
            raise ValueError("coupling name must be non-empty")
        if not isinstance(self.wrench, InterfaceWrench):
            raise TypeError("wrench must be an InterfaceWrench")


Constituent = Union[GravityLoad, NodalForce, WrenchLoad]


@dataclass(frozen=True)
class LoadCase:
    name: str
    category: LoadCategory
    constituents: tuple[Constituent, ...]

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("load case name must be non-empty")
        if not isinstance(self.category, LoadCategory):
            raise TypeError(f"not a load category: {self.category!r}")
        for c in self.constituents:
            if not isinstance(c, (GravityLoad, NodalForce, WrenchLoad)):
                raise TypeError(f"not a load constituent: {c!r}")


_CASE_CLASSES = ("I", "II", "III")


@dataclass(frozen=True)
class Combination:
    """Weighted load cases audited against one permissible stress.

    Case class I covers main loads, II main plus additional, III main
    plus special. ``permissible=None`` selects the default allowable,
    which downstream reports flag as assumed rather than given.
    """

    name: str
    case_class: str
    cases: tuple[tuple[LoadCase, float], ...]
    permissible: float | None = None

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("combination name must be non-empty")
        if self.case_class not in _CASE_CLASSES:
            raise ValueError(
                f"case class must be one of {_CASE_CLASSES}, "
                f"got {self.case_class!r}")
        for case, weight in self.cases:
            if not isinstance(case, LoadCase):
                raise TypeError(f"not a load case: {case!r}")
            if not np.isfinite(weight):
                raise ValueError(f"weight for case {case.name!r} must be finite")
        if self.permissible is not None:
            if not np.isfinite(self.permissible) or self.permissible <= 0:
                raise ValueError("permissible stress must be positive")

    @property
    def permissible_stress(self) -> float:
        return DEFAULT_PERMISSIBLE if self.permissible is None else float(self.permissible)

    @property
    def permissible_defaulted(self) -> bool:
        return self.permissible is None


def gravity_vector(
    mesh: Mesh,
    materials: dict[str, Material] | None,
    g=DEFAULT_GRAVITY,
) -> NDArray[np.float64]:
    """Self-weight load vector on the mesh DOFs (length 3·n_nodes).

    Each element contributes rho·V·g, split equally to its four nodes,
    so the resultant equals the exact weight of the meshed volume.
    """
    gv = _check_vec3(g, "gravity vector")
    table, index = _element_materials(mesh, materials)
    rho = np.array([m.rho for m in table], dtype=float)[index]
    share = (rho * mesh.volumes())[:, None] * (gv[None, :] / 4.0)
    f = np.zeros((mesh.n_nodes, 3))
    np.add.at(f, mesh.conn.reshape(-1), np.repeat(share, 4, axis=0))
    return f.reshape(-1)


def nodal_force_vector(
    mesh: Mesh, node_set: str, total,
) -> NDArray[np.float64]:
    """Even split of a total force over a node set, on the mesh DOFs."""
    tv = _check_vec3(total, "nodal force total")
    nodes = mesh.node_set(node_set)
    if nodes.size == 0:
        raise ValueError(f"node set {node_set!r} is empty")
    f = np.zeros((mesh.n_nodes, 3))
    f[nodes] = tv / nodes.size
    return f.reshape(-1)


def wrench_vector(
    transformation: Transformation, coupling: str, wrench: InterfaceWrench,
) -> NDArray[np.float64]:
    """Extended load vector with the wrench on a coupling's reference DOFs.

    After elimination the wrench reaches the slave nodes statically
    equivalently: their force resultant is (Fx, Fy, Fz) and their moment
    about the reference point is (Mx, My, Mz).
    """
    info = transformation.coupling(coupling)
    f = np.zeros(transformation.n_ext)
    f[info.ref_dofs] = wrench.as_array()
    return f


def case_vector(
    case: LoadCase,
    mesh: Mesh,
    materials: dict[str, Material] | None,
    transformation: Transformation,
) -> NDArray[np.float64]:
    """Resolve one load case to an extended load vector."""
    n_mesh = 3 * mesh.n_nodes
    if transformation.n_mesh_dofs != n_mesh:
        raise MismatchedModel(
            f"transformation built for {transformation.n_mesh_dofs} mesh DOFs, "
            f"mesh has {n_mesh}")
    f = np.zeros(transformation.n_ext)
    for c in case.constituents:
        if isinstance(c, GravityLoad):
            f[:n_mesh] += gravity_vector(mesh, materials, c.g)
        elif isinstance(c, NodalForce):
            f[:n_mesh] += nodal_force_vector(mesh, c.node_set, c.total)
        else:
            f += wrench_vector(transformation, c.coupling, c.wrench)
    return f


def combine(
    weighted_cases: Sequence[tuple[LoadCase, float]],
    mesh: Mesh,
    materials: dict[str, Material] | None,
    transformation: Transformation,
) -> NDArray[np.float64]:
    """Exact weighted sum of case vectors.

    Terms are accumulated in a content-derived order so the result is
    bit-identical under permutation of the input list.
    """
    rows = []
    for case, weight in weighted_cases:
        if not np.isfinite(weight):
            raise ValueError(f"weight for case {case.name!r} must be finite")
        v = case_vector(case, mesh, materials, transformation)
        v *= float(weight)
        rows.append(v)
    f = np.zeros(transformation.n_ext)
    for i in sorted(range(len(rows)), key=lambda i: rows[i].tobytes()):
        f += rows[i]
    return f


def combination_vector(
    combo: Combination,
    mesh: Mesh,
    materials: dict[str, Material] | None,
    transformation: Transformation,
) -> NDArray[np.float64]:
    return combine(combo.cases, mesh, materials, transformation)


def governing_combination(results) -> str:
    """Name of the maximum-utilization entry; ties keep declaration order.

    Accepts any sequence of objects with ``name`` and ``utilization``
    attributes (audit summaries in practice).
    """
    items = list(results)
    if not items:
        raise ValueError("no combinations to compare")
    best = items[0]
    for r in items[1:]:
        if r.utilization > best.utilization:
            best = r
    return best.name
