"""Finite-element design audit for welded machine structures."""

from .audit import (
    AuditCriteria,
    AuditReport,
    AuditSummary,
    HotspotRow,
    audit,
    export_vtk,
    hotspot_table,
    report_json,
    report_text,
    vtk_text,
    write_report,
)
from .constraints import (
    DirichletBC,
    RevoluteJoint,
    RigidCoupling,
    Transformation,
    build_transformation,
    check_rigid_body_constrained,
)
from .element import DEFAULT_STEEL, Material, elasticity_matrix, von_mises
from .errors import FemAuditError
from .loads import (
    DEFAULT_GRAVITY,
    DEFAULT_PERMISSIBLE,
    Combination,
    GravityLoad,
    InterfaceWrench,
    LoadCase,
    LoadCategory,
    NodalForce,
    WrenchLoad,
    combination_vector,
    combine,
    governing_combination,
)
from .mesh_io import Mesh, parse_mesh, resolve_group, serialize_mesh, validate_mesh
from .reactions import (
    BoomMass,
    PlatformMass,
    PointWrench,
    PoseAngles,
    SuperstructureLayout,
    compute_wrench,
    sweep_csv,
    sweep_envelope,
)
from .system import Solution, assemble, solve, superpose

__version__ = "0.1.0"

__all__ = [
    "AuditCriteria",
    "AuditReport",
    "AuditSummary",
    "BoomMass",
    "Combination",
    "DEFAULT_GRAVITY",
    "DEFAULT_PERMISSIBLE",
    "DEFAULT_STEEL",
    "DirichletBC",
    "FemAuditError",
    "GravityLoad",
    "HotspotRow",
    "InterfaceWrench",
    "LoadCase",
    "LoadCategory",
    "Material",
    "Mesh",
    "NodalForce",
    "PlatformMass",
    "PointWrench",
    "PoseAngles",
    "RevoluteJoint",
    "RigidCoupling",
    "Solution",
    "SuperstructureLayout",
    "Transformation",
    "WrenchLoad",
    "__version__",
    "assemble",
    "audit",
    "build_transformation",
    "check_rigid_body_constrained",
    "combination_vector",
    "combine",
    "compute_wrench",
    "elasticity_matrix",
    "export_vtk",
    "governing_combination",
    "hotspot_table",
    "parse_mesh",
    "report_json",
    "report_text",
    "resolve_group",
    "serialize_mesh",
    "solve",
    "superpose",
    "sweep_csv",
    "sweep_envelope",
    "validate_mesh",
    "von_mises",
    "vtk_text",
    "write_report",
]
