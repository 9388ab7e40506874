"""Kinematic constraints by master-slave elimination.

The model's unknowns live in an extended DOF space: three translations per
mesh node, laid out node-major (dof = 3 * node_index + axis), followed by
six DOFs (ux, uy, uz, rx, ry, rz) for each rigid coupling's reference, in
coupling declaration order. All constraints are reduced to the affine form

    u_full = T @ u_master + u_prescribed

so a symmetric positive definite stiffness stays symmetric positive
definite after reduction (A = T' K T). Three constraint kinds exist:

* DirichletBC: prescribes DOFs of a node set, or of a coupling reference
  (including its rotations).
* RigidCoupling: every node of a node set follows the reference rigidly,
  u_slave = u_ref + theta_ref x (x_slave - x_ref).
* RevoluteJoint: ties two coupling references together except for the
  relative rotation about a common axis.

Resolution is a short substitution chain: joint-dependent reference DOFs
are expressed over the free side, coupling slaves over their (possibly
joint-resolved) references, and prescribed values fold in as constants.
Contradictory prescriptions raise ConflictingConstraints instead of
silently picking a winner.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from numpy.typing import NDArray

from .errors import (
    ConflictingConstraints,
    ConstraintError,
    UnknownCoupling,
    UnresolvedTarget,
)
from .mesh_io import Mesh

#: translation axis -> component
AXES = {"x": 0, "y": 1, "z": 2}
#: coupling reference axis -> component in its 6-DOF block
REF_AXES = {"x": 0, "y": 1, "z": 2, "rx": 3, "ry": 4, "rz": 5}

_AXIS_UNIT_TOL = 1e-12


@dataclass(frozen=True)
class DirichletBC:
    """Prescribed displacement on a node set or a coupling reference.

    Args:
        target: node-set group name, or the name of a RigidCoupling.
        axes: subset of {x, y, z} for node sets; couplings additionally
            allow {rx, ry, rz}.
        value: prescribed value for every listed axis [m, or rad for
            rotations]. Defaults to fixed (0).
    """

    target: str
    axes: tuple[str, ...]
    value: float = 0.0

    def __post_init__(self):
        if not self.axes:
            raise ConstraintError(f"DirichletBC on {self.target!r} lists no axes")
        for a in self.axes:
            if a not in REF_AXES:
                raise ConstraintError(f"unknown axis {a!r} (use x,y,z,rx,ry,rz)")
        if len(set(self.axes)) != len(self.axes):
            raise ConstraintError(f"DirichletBC on {self.target!r} repeats an axis")
        if not np.isfinite(self.value):
            raise ConstraintError("prescribed value must be finite")


@dataclass(frozen=True)
class RigidCoupling:
    """Rigid link from a reference point to every node of a node set.

    Slave nodes move as u = u_ref + theta_ref x (x - x_ref); loads applied
    to the reference spread to the set, and the reference's six DOFs are
    the only independent unknowns of the group.
    """

    name: str
    node_set: str
    reference: tuple[float, float, float]

    def __post_init__(self):
        ref = np.asarray(self.reference, dtype=float)
        if ref.shape != (3,) or not np.all(np.isfinite(ref)):
            raise ConstraintError(
                f"coupling {self.name!r} reference must be a finite 3-vector")


@dataclass(frozen=True)
class RevoluteJoint:
    """Hinge between two couplings: only relative rotation about axis is free.

    Both coupling references must sit at the same point (the hinge center).
    The unit axis must be given to within 1e-12.
    """

    name: str
    coupling_a: str
    coupling_b: str
    axis: tuple[float, float, float]

    def __post_init__(self):
        ax = np.asarray(self.axis, dtype=float)
        if ax.shape != (3,) or not np.all(np.isfinite(ax)):
            raise ConstraintError(f"joint {self.name!r} axis must be a 3-vector")
        if abs(np.linalg.norm(ax) - 1.0) > _AXIS_UNIT_TOL:
            raise ConstraintError(
                f"joint {self.name!r} axis must be a unit vector "
                f"(|axis| = {np.linalg.norm(ax):.17g})")
        if self.coupling_a == self.coupling_b:
            raise ConstraintError(
                f"joint {self.name!r} connects coupling {self.coupling_a!r} to itself")


@dataclass(frozen=True)
class CouplingInfo:
    """Resolved bookkeeping for one coupling inside a Transformation."""

    name: str
    ref_base: int  # first extended DOF of the 6-DOF reference block
    slave_nodes: NDArray[np.int64] = field(repr=False)
    slave_coords: NDArray[np.float64] = field(repr=False)
    reference: NDArray[np.float64] = field(repr=False)
    prescribed_axes: tuple[str, ...] = ()

    @property
    def ref_dofs(self) -> NDArray[np.int64]:
        return np.arange(self.ref_base, self.ref_base + 6, dtype=np.int64)

    @property
    def slave_dofs(self) -> NDArray[np.int64]:
        return (3 * self.slave_nodes[:, None] + np.arange(3)[None, :]).ravel()


class Transformation:
    """Affine map u_full = T @ u_master + u_prescribed over the extended space.

    Attributes:
        n_mesh_dofs: 3 * number of mesh nodes.
        n_ext: total extended DOFs (mesh + 6 per coupling).
        masters: ascending extended DOF indices that remain independent.
        T: (n_ext, n_masters) CSR matrix.
        u_prescribed: (n_ext,) constant part.
        couplings: CouplingInfo per coupling, declaration order.
        dirichlet_mesh_dofs: prescribed mesh DOFs, ascending.
    """

    def __init__(self, n_mesh_dofs, n_ext, masters, T, u_prescribed,
                 couplings, dirichlet_mesh_dofs, dirichlet_values):
        self.n_mesh_dofs = int(n_mesh_dofs)
        self.n_ext = int(n_ext)
        self.masters = masters
        self.T = T
        self.u_prescribed = u_prescribed
        self.couplings = list(couplings)
        self.dirichlet_mesh_dofs = dirichlet_mesh_dofs
        self.dirichlet_values = dirichlet_values
        self._by_name = {c.name: c for c in self.couplings}

    @property
    def n_masters(self) -> int:
        return int(self.T.shape[1])

    def coupling(self, name: str) -> CouplingInfo:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownCoupling(
                f"unknown coupling {name!r}; defined: {sorted(self._by_name)}"
            ) from None

    def expand(self, u_master: NDArray[np.float64]) -> NDArray[np.float64]:
        """Full extended displacement from the master vector."""
        if u_master.shape != (self.n_masters,):
            raise ValueError(
                f"expected master vector of length {self.n_masters}, "
                f"got {u_master.shape}")
        return self.T @ u_master + self.u_prescribed

    def mesh_part(self, u_full: NDArray[np.float64]) -> NDArray[np.float64]:
        return u_full[: self.n_mesh_dofs]


def build_transformation(
    mesh: Mesh,
    dirichlet: list[DirichletBC] = (),
    couplings: list[RigidCoupling] = (),
    joints: list[RevoluteJoint] = (),
) -> Transformation:
    """Resolve all constraints into a single affine elimination map.

    Raises:
        UnresolvedTarget: a BC or coupling names an unknown node set.
        UnknownCoupling: a joint or BC names an unknown coupling.
        ConflictingConstraints: a DOF is claimed twice (two couplings, a
            prescription on a slave, a joint-dependent DOF prescribed, or
            a coupling driven by two joints).
    """
    n_mesh = 3 * mesh.n_nodes
    coupling_infos: list[CouplingInfo] = []
    by_name: dict[str, int] = {}
    for i, c in enumerate(couplings):
        if c.name in by_name:
            raise ConflictingConstraints(f"coupling {c.name!r} declared twice")
        by_name[c.name] = i
        try:
            nodes = mesh.node_set(c.node_set)
        except Exception as err:
            raise UnresolvedTarget(
                f"coupling {c.name!r}: {err}") from None
        if len(nodes) == 0:
            raise UnresolvedTarget(
                f"coupling {c.name!r} names empty node set {c.node_set!r}")
        slave_nodes = np.sort(np.asarray(nodes, dtype=np.int64))
        coupling_infos.append(CouplingInfo(
            name=c.name, ref_base=n_mesh + 6 * i,
            slave_nodes=slave_nodes,
            slave_coords=mesh.coords[slave_nodes],
            reference=np.asarray(c.reference, dtype=float)))
    n_ext = n_mesh + 6 * len(coupling_infos)

    # -- prescriptions: extended dof -> value ------------------------------
    prescribed: dict[int, float] = {}
    coupling_prescribed_axes: dict[str, list[str]] = {c.name: [] for c in coupling_infos}

    def _prescribe(dof: int, value: float, what: str):
        if dof in prescribed and prescribed[dof] != value:
            raise ConflictingConstraints(
                f"{what}: DOF prescribed twice with different values "
                f"({prescribed[dof]:g} vs {value:g})")
        prescribed[dof] = value

    for bc in dirichlet:
        if bc.target in by_name:
            info = coupling_infos[by_name[bc.target]]
            for a in bc.axes:
                _prescribe(info.ref_base + REF_AXES[a], bc.value,
                           f"BC on coupling {bc.target!r} axis {a}")
                coupling_prescribed_axes[bc.target].append(a)
        else:
            try:
                nodes = mesh.node_set(bc.target)
            except Exception as err:
                raise UnresolvedTarget(f"boundary condition: {err}") from None
            for a in bc.axes:
                if a not in AXES:
                    raise ConstraintError(
                        f"axis {a!r} is only valid on couplings, not node "
                        f"set {bc.target!r}")
                for k in nodes:
                    _prescribe(3 * int(k) + AXES[a], bc.value,
                               f"BC on node set {bc.target!r} axis {a}")

    # -- joints: dependent reference DOFs over the free side ---------------
    # resolution: dof -> (masters {dof: coeff}, const)
    resolution: dict[int, tuple[dict[int, float], float]] = {}

    def _term(dof: int) -> tuple[dict[int, float], float]:
        """Expression for a DOF: substitutes prescriptions and resolutions."""
        if dof in prescribed:
            return {}, prescribed[dof]
        if dof in resolution:
            combo, const = resolution[dof]
            return dict(combo), const
        return {dof: 1.0}, 0.0

    joint_driven: set[str] = set()
    for j in joints:
        for cname in (j.coupling_a, j.coupling_b):
            if cname not in by_name:
                raise UnknownCoupling(
                    f"joint {j.name!r} names unknown coupling {cname!r}")
        a = coupling_infos[by_name[j.coupling_a]]
        b = coupling_infos[by_name[j.coupling_b]]
        if b.name in joint_driven:
            raise ConflictingConstraints(
                f"coupling {b.name!r} is driven by two joints")
        joint_driven.add(b.name)
        gap = np.linalg.norm(a.reference - b.reference)
        scale = max(1.0, float(np.linalg.norm(a.reference)))
        if gap > 1e-9 * scale:
            raise ConstraintError(
                f"joint {j.name!r}: coupling references are {gap:g} m apart; "
                f"a hinge needs a common center")
        axis = np.asarray(j.axis, dtype=float)
        k = int(np.argmax(np.abs(axis)))  # rotation component kept free
        dep_rot = [c for c in range(3) if c != k]
        dependents = [b.ref_base + c for c in range(3)]
        dependents += [b.ref_base + 3 + c for c in dep_rot]
        for dof in dependents:
            if dof in prescribed:
                raise ConflictingConstraints(
                    f"joint {j.name!r} drives a DOF of coupling {b.name!r} "
                    f"that is also prescribed")
            if dof in resolution:
                raise ConflictingConstraints(
                    f"joint {j.name!r}: DOF of coupling {b.name!r} already dependent")
        # translations: u_b = u_a
        for c in range(3):
            combo, const = _term(a.ref_base + c)
            resolution[b.ref_base + c] = (combo, const)
        # rotations: theta_b = theta_a + s * axis with s eliminated through
        # component k: theta_b[j] = theta_a[j] + (axis[j]/axis[k]) * (theta_bk - theta_ak)
        ratio = {c: axis[c] / axis[k] for c in dep_rot}
        for c in dep_rot:
            combo: dict[int, float] = {}
            const = 0.0
            for src, w in ((a.ref_base + 3 + c, 1.0),
                           (a.ref_base + 3 + k, -ratio[c]),
                           (b.ref_base + 3 + k, ratio[c])):
                if w == 0.0:
                    continue
                sub_combo, sub_const = _term(src)
                for m, cw in sub_combo.items():
                    combo[m] = combo.get(m, 0.0) + w * cw
                const += w * sub_const
            resolution[b.ref_base + 3 + c] = (combo, const)

    # -- couplings: slave node DOFs over their reference -------------------
    owned: dict[int, str] = {}
    for info in coupling_infos:
        ref_terms = [_term(info.ref_base + c) for c in range(6)]
        for node in info.slave_nodes:
            node = int(node)
            if node in owned:
                raise ConflictingConstraints(
                    f"node id {int(mesh.node_ids[node])} is a slave of both "
                    f"couplings {owned[node]!r} and {info.name!r}")
            owned[node] = info.name
            d = mesh.coords[node] - info.reference
            # u_s = u_ref + theta x d, written per component
            rows = (
                ((0, 1.0), (4, d[2]), (5, -d[1])),   # x: uy_rot terms
                ((1, 1.0), (5, d[0]), (3, -d[2])),   # y
                ((2, 1.0), (3, d[1]), (4, -d[0])),   # z
            )
            for comp, terms in enumerate(rows):
                dof = 3 * node + comp
                if dof in prescribed:
                    raise ConflictingConstraints(
                        f"DOF of node id {int(mesh.node_ids[node])} is both "
                        f"prescribed and a slave of coupling {info.name!r}")
                combo: dict[int, float] = {}
                const = 0.0
                for c, w in terms:
                    if w == 0.0:
                        continue
                    sub_combo, sub_const = ref_terms[c]
                    for m, cw in sub_combo.items():
                        combo[m] = combo.get(m, 0.0) + w * cw
                    const += w * sub_const
                resolution[dof] = (combo, const)

    # -- fold remaining prescriptions in as constants -----------------------
    for dof, value in prescribed.items():
        if dof in resolution:
            continue  # joint-dependent conflicts were raised above
        resolution[dof] = ({}, value)

    # -- assemble T and u_prescribed ----------------------------------------
    dependent = np.fromiter(resolution.keys(), dtype=np.int64,
                            count=len(resolution))
    mask = np.ones(n_ext, dtype=bool)
    mask[dependent] = False
    masters = np.flatnonzero(mask).astype(np.int64)
    col_of = np.full(n_ext, -1, dtype=np.int64)
    col_of[masters] = np.arange(len(masters))

    rows = [masters]
    cols = [col_of[masters]]
    data = [np.ones(len(masters))]
    u_p = np.zeros(n_ext)
    for dof, (combo, const) in resolution.items():
        u_p[dof] = const
        for m, w in combo.items():
            if col_of[m] < 0:
                raise ConstraintError(
                    f"internal: master DOF {m} resolved as dependent")
            rows.append(np.array([dof]))
            cols.append(np.array([col_of[m]]))
            data.append(np.array([w]))
    T = sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_ext, len(masters))).tocsr()

    infos = [
        CouplingInfo(
            name=i.name, ref_base=i.ref_base, slave_nodes=i.slave_nodes,
            slave_coords=i.slave_coords, reference=i.reference,
            prescribed_axes=tuple(coupling_prescribed_axes[i.name]))
        for i in coupling_infos
    ]
    mesh_mask = (dependent < n_mesh) if len(dependent) else np.zeros(0, bool)
    dirichlet_mesh = np.sort(np.fromiter(
        (d for d in prescribed if d < n_mesh), dtype=np.int64))
    return Transformation(
        n_mesh_dofs=n_mesh, n_ext=n_ext, masters=masters, T=T,
        u_prescribed=u_p, couplings=infos,
        dirichlet_mesh_dofs=dirichlet_mesh,
        dirichlet_values={d: v for d, v in prescribed.items()})


_MODE_LABELS = ("translation x", "translation y", "translation z",
                "rotation x", "rotation y", "rotation z")


def check_rigid_body_constrained(
    mesh: Mesh, transformation: Transformation, tol: float = 1e-10,
) -> tuple[bool, list[str]]:
    """Whether the constraints block all rigid-body motion, without a stiffness.

    Builds the six rigid motions of the extended space (couplings included),
    projects each onto the reachable subspace range(T), and reports the
    combinations reproduced exactly: those cost no elastic energy and make
    the reduced system singular. Returns (True, []) when every rigid mode
    is blocked; otherwise (False, labels) with labels like "translation x"
    or "rotation z" for each free combination.
    """
    t = transformation
    n = mesh.n_nodes
    centroid = mesh.coords.mean(axis=0) if n else np.zeros(3)
    vecs = np.zeros((t.n_ext, 6))
    for d in range(3):
        vecs[np.arange(n) * 3 + d, d] = 1.0
    rel = mesh.coords - centroid
    for d in range(3):
        e = np.zeros(3)
        e[d] = 1.0
        spin = np.cross(np.broadcast_to(e, (n, 3)), rel)
        vecs[: 3 * n, 3 + d] = spin.ravel()
    for info in t.couplings:
        rrel = info.reference - centroid
        for d in range(3):
            vecs[info.ref_base + d, d] = 1.0
        for d in range(3):
            e = np.zeros(3)
            e[d] = 1.0
            vecs[info.ref_base: info.ref_base + 3, 3 + d] = np.cross(e, rrel)
            vecs[info.ref_base + 3 + d, 3 + d] = 1.0

    norms = np.linalg.norm(vecs, axis=0)
    norms[norms == 0.0] = 1.0
    vecs = vecs / norms

    if t.n_masters == 0:
        return True, []
    gram = (t.T.T @ t.T).tocsc()
    lu = spla.splu(gram)
    proj = t.T @ np.column_stack([lu.solve(t.T.T @ vecs[:, i]) for i in range(6)])
    resid = vecs - proj
    g = resid.T @ resid
    w, v = np.linalg.eigh(g)
    free = v[:, w < tol]  # columns: free combinations, coefficient space
    if free.shape[1] == 0:
        return True, []

    # a free combination with any rotation content is rotational freedom
    # (e.g. spinning about an off-centroid pin mixes in translation);
    # only rotation-free combinations count as free translations
    labels: set[str] = set()

    def _claim(u, k, offset):
        # one distinct axis per singular direction, strongest match first
        taken: set[int] = set()
        for i in range(k):
            for ax in np.argsort(-np.abs(u[:, i])):
                if int(ax) not in taken:
                    taken.add(int(ax))
                    labels.add(_MODE_LABELS[offset + int(ax)])
                    break

    rot = free[3:, :]
    u_rot, s_rot, vt_rot = np.linalg.svd(rot, full_matrices=True)
    k_rot = int(np.sum(s_rot > 1e-6))
    _claim(u_rot, k_rot, offset=3)
    null_combo = vt_rot.T[:, k_rot:]  # combinations with no rotation part
    if null_combo.shape[1]:
        tra = free[:3, :] @ null_combo
        u_tra, s_tra, _ = np.linalg.svd(tra, full_matrices=False)
        _claim(u_tra, int(np.sum(s_tra > 1e-6)), offset=0)
    return False, sorted(labels, key=_MODE_LABELS.index)
