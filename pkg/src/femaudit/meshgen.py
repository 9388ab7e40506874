"""Structured tetrahedral mesh generation for tests and small demo models.

Boxes are built on a regular grid, each cell split into six tetrahedra
around the main cell diagonal. Neighboring cells share face diagonals, so
the mesh is conforming at any resolution.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from numpy.typing import NDArray

from .mesh_io import Mesh, PhysicalGroup

#: Six-tet split of a unit cell; vertex bits are x + 2y + 4z.
_CELL_TETS = (
    (0, 1, 3, 7),
    (0, 3, 2, 7),
    (0, 2, 6, 7),
    (0, 6, 4, 7),
    (0, 4, 5, 7),
    (0, 5, 1, 7),
)


def box_grid(
    nx: int, ny: int, nz: int,
    lx: float, ly: float, lz: float,
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0),
) -> tuple[NDArray[np.float64], NDArray[np.int64]]:
    """Grid coordinates and tet connectivity for an axis-aligned box.

    Returns (coords (n,3), conn (m,4)) with m = 6 * nx * ny * nz.
    """
    if min(nx, ny, nz) < 1:
        raise ValueError("need at least one cell per direction")
    xs = np.linspace(origin[0], origin[0] + lx, nx + 1)
    ys = np.linspace(origin[1], origin[1] + ly, ny + 1)
    zs = np.linspace(origin[2], origin[2] + lz, nz + 1)
    X, Y, Z = np.meshgrid(xs, ys, zs, indexing="ij")
    coords = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)

    def vid(i, j, k):
        return (i * (ny + 1) + j) * (nz + 1) + k

    cells = []
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                corner = [
                    vid(i, j, k), vid(i + 1, j, k),
                    vid(i, j + 1, k), vid(i + 1, j + 1, k),
                    vid(i, j, k + 1), vid(i + 1, j, k + 1),
                    vid(i, j + 1, k + 1), vid(i + 1, j + 1, k + 1),
                ]
                for tet in _CELL_TETS:
                    cells.append([corner[v] for v in tet])
    return coords, np.asarray(cells, dtype=np.int64)


def box_mesh(
    nx: int, ny: int, nz: int,
    lx: float, ly: float, lz: float,
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0),
    volume_name: str = "body",
    node_sets: dict[str, Callable[[NDArray[np.float64]], NDArray[np.bool_]]] | None = None,
) -> Mesh:
    """Conforming tet mesh of a box, with optional predicate node sets.

    Args:
        nx, ny, nz: cells per direction (6 tets per cell).
        lx, ly, lz: box dimensions [m].
        origin: minimum corner.
        volume_name: name for the single volume group.
        node_sets: name -> predicate over (n, 3) coords returning a mask.
    """
    coords, conn = box_grid(nx, ny, nz, lx, ly, lz, origin)
    groups: dict[str, PhysicalGroup] = {
        volume_name: PhysicalGroup(
            tag=1, name=volume_name, kind="volume",
            members=tuple(range(conn.shape[0]))),
    }
    tag = 1
    for name, pred in (node_sets or {}).items():
        mask = np.asarray(pred(coords), dtype=bool)
        tag += 1
        groups[name] = PhysicalGroup(
            tag=tag, name=name, kind="surface-node-set",
            members=tuple(int(i) for i in np.flatnonzero(mask)))
    return Mesh.from_arrays(coords, conn, groups=groups,
                            elem_group=[volume_name] * conn.shape[0])


def plane_set(axis: int, value: float, tol: float = 1e-9):
    """Predicate selecting nodes on the plane coord[axis] == value."""

    def pred(coords: NDArray[np.float64]) -> NDArray[np.bool_]:
        return np.abs(coords[:, axis] - value) <= tol

    return pred


def near_point(point, tol: float = 1e-9):
    """Predicate selecting nodes within tol of a point."""
    p = np.asarray(point, dtype=float)

    def pred(coords: NDArray[np.float64]) -> NDArray[np.bool_]:
        return np.linalg.norm(coords - p, axis=1) <= tol

    return pred
