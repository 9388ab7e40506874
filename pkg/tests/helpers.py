"""Shared test utilities: surface traction loads via tributary areas."""

from collections import Counter

import numpy as np


def boundary_faces(mesh):
    """Faces belonging to exactly one tetrahedron, as sorted node triples."""
    count = Counter()
    for row in mesh.conn:
        a, b, c, d = (int(x) for x in row)
        for face in ((a, b, c), (a, b, d), (a, c, d), (b, c, d)):
            count[tuple(sorted(face))] += 1
    return [f for f, n in count.items() if n == 1]


def traction_forces(mesh, node_set_name, traction):
    """Consistent nodal forces for a uniform traction on a boundary patch.

    Every boundary face whose three nodes lie in the named set receives
    area * traction, split equally to its corners (exact for constant
    traction on linear triangles).
    """
    traction = np.asarray(traction, dtype=float)
    members = set(int(k) for k in mesh.node_set(node_set_name))
    f = np.zeros(3 * mesh.n_nodes)
    for face in boundary_faces(mesh):
        if not all(k in members for k in face):
            continue
        p0, p1, p2 = mesh.coords[list(face)]
        area = 0.5 * np.linalg.norm(np.cross(p1 - p0, p2 - p0))
        for k in face:
            f[3 * k: 3 * k + 3] += traction * (area / 3.0)
    return f


def extend(f_mesh, transformation):
    """Pad a mesh-length load vector to the extended DOF space."""
    out = np.zeros(transformation.n_ext)
    out[: transformation.n_mesh_dofs] = f_mesh
    return out
