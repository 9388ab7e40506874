"""Exception hierarchy for the femaudit toolkit.

Every error raised by the library derives from FemAuditError so callers
(and the CLI) can catch the whole family and map it to a diagnostic.
"""


class FemAuditError(Exception):
    """Base class for all femaudit errors."""


# --- mesh ingestion ---------------------------------------------------------

class MeshError(FemAuditError):
    """Base class for mesh-file problems."""


class UnsupportedVersion(MeshError):
    """Mesh file is not MSH ASCII 2.2."""


class MalformedSection(MeshError):
    """A mesh-file section could not be parsed; carries the line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnsupportedElementType(MeshError):
    """Element type other than TET4 / ignorable lower-dimension tags."""


class DanglingReference(MeshError):
    """Element or group references a node/element id that does not exist."""


class UnknownGroup(FemAuditError):
    """Named physical group is not defined on the mesh."""


# --- element / material -----------------------------------------------------

class DegenerateElement(FemAuditError):
    """Tetrahedron with (near-)zero volume; no valid gradients."""


class MissingMaterial(FemAuditError):
    """A volume group has no material assigned."""


# --- constraints ------------------------------------------------------------

class ConstraintError(FemAuditError):
    """Base class for constraint-definition problems."""


class ConflictingConstraints(ConstraintError):
    """A DOF is constrained by more than one master relation."""


class UnresolvedTarget(ConstraintError):
    """Constraint target does not resolve against the mesh."""


class UnknownCoupling(ConstraintError):
    """Load references a rigid coupling that is not defined."""


# --- solve ------------------------------------------------------------------

class SolveError(FemAuditError):
    """Base class for solver failures."""


class NotPositiveDefinite(SolveError):
    """Reduced stiffness is singular/indefinite (mechanism or bad mesh)."""


class NoConvergence(SolveError):
    """Iterative solver exceeded its iteration cap."""


class MismatchedModel(FemAuditError):
    """Fields/vectors from different models were combined."""


# --- superstructure statics -------------------------------------------------

class EmptyLayout(FemAuditError):
    """Superstructure layout has no mass items."""


class MissingLayout(FemAuditError):
    """Model file has no superstructure layout section."""


# --- model file / output ----------------------------------------------------

class ModelFileError(FemAuditError):
    """Model file fails schema validation; carries a JSON-path-ish location."""

    def __init__(self, message: str, where: str | None = None):
        self.where = where
        if where:
            message = f"{where}: {message}"
        super().__init__(message)


class IoFailure(FemAuditError):
    """Output artifact could not be written."""
