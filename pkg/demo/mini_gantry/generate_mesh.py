"""Regenerate the mini gantry demo mesh (mesh.msh, committed).

Portal frame: two 0.2 x 0.2 x 1.0 m legs under a 2.0 x 0.2 x 0.2 m
bridge girder. The parts share grid planes, so welding coincident nodes
gives a conforming tetrahedral mesh. Run from this directory:

    python3 generate_mesh.py
"""

from pathlib import Path

import numpy as np

from femaudit.mesh_io import Mesh, PhysicalGroup, serialize_mesh
from femaudit.meshgen import box_grid

# all grid planes fall on multiples of 0.1 m; weld key rounds to 1 nm
WELD_TOL = 1e-9

PARTS = (
    ("legs", box_grid(2, 2, 10, 0.2, 0.2, 1.0, origin=(0.0, 0.0, 0.0))),
    ("legs", box_grid(2, 2, 10, 0.2, 0.2, 1.0, origin=(1.8, 0.0, 0.0))),
    ("bridge", box_grid(20, 2, 2, 2.0, 0.2, 0.2, origin=(0.0, 0.0, 1.0))),
)


def weld(parts):
    """Merge part meshes, fusing nodes that coincide within WELD_TOL."""
    coords = []
    conn = []
    names = []
    key_to_id = {}
    for name, (c, t) in parts:
        local = np.empty(len(c), dtype=np.int64)
        for i, p in enumerate(c):
            key = tuple(np.round(p / WELD_TOL).astype(np.int64))
            if key not in key_to_id:
                key_to_id[key] = len(coords)
                coords.append(p)
            local[i] = key_to_id[key]
        conn.append(local[t])
        names.extend([name] * len(t))
    return np.asarray(coords), np.vstack(conn), names


def main():
    coords, conn, elem_group = weld(PARTS)

    x, z = coords[:, 0], coords[:, 2]
    sets = {
        "foot_a": (z <= WELD_TOL) & (x <= 0.2 + WELD_TOL),
        "foot_b": (z <= WELD_TOL) & (x >= 1.8 - WELD_TOL),
        "slew_ring": (z >= 1.2 - WELD_TOL)
                     & (x >= 0.9 - WELD_TOL) & (x <= 1.1 + WELD_TOL),
    }

    groups = {}
    volumes = sorted(set(elem_group))
    for tag, name in enumerate(volumes, start=1):
        members = tuple(i for i, g in enumerate(elem_group) if g == name)
        groups[name] = PhysicalGroup(tag=tag, name=name, kind="volume",
                                     members=members)
    tag = len(volumes)
    for name, mask in sets.items():
        tag += 1
        groups[name] = PhysicalGroup(
            tag=tag, name=name, kind="surface-node-set",
            members=tuple(int(i) for i in np.flatnonzero(mask)))

    mesh = Mesh.from_arrays(coords, conn, groups=groups, elem_group=elem_group)
    out = Path(__file__).parent / "mesh.msh"
    out.write_text(serialize_mesh(mesh), encoding="utf-8")
    print(f"wrote {out}: {mesh.n_nodes} nodes, {mesh.n_elements} elements")
    for name in sets:
        print(f"  {name}: {len(groups[name].members)} nodes")


if __name__ == "__main__":
    main()
