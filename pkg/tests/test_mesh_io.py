"""Mesh reader tests: MSH 2.2 subset parsing, group resolution,
orientation canonicalization, serialization round trip and quality stats."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from femaudit.errors import (
    DanglingReference,
    MalformedSection,
    UnknownGroup,
    UnsupportedElementType,
    UnsupportedVersion,
)
from femaudit.mesh_io import (
    Mesh,
    parse_mesh,
    resolve_group,
    serialize_mesh,
    validate_mesh,
)
from femaudit.meshgen import box_mesh, plane_set

TWO_TETS = """\
$MeshFormat
2.2 0 8
$EndMeshFormat
$PhysicalNames
3
3 1 "frame"
2 2 "base"
0 3 "pin"
$EndPhysicalNames
$Nodes
5
1 0 0 0
2 1 0 0
3 0 1 0
4 0 0 1
5 1 1 1
$EndNodes
$Elements
4
1 4 2 1 1 1 2 3 4
2 4 2 1 1 2 3 4 5
3 2 2 2 2 1 2 3
4 15 2 3 3 5
$EndElements
"""


class TestParse:
    def test_basic_structure(self):
        mesh = parse_mesh(TWO_TETS)
        assert mesh.n_nodes == 5
        assert mesh.n_elements == 2
        assert set(mesh.groups) == {"frame", "base", "pin"}
        assert mesh.groups["frame"].kind == "volume"
        assert mesh.groups["base"].kind == "surface-node-set"
        assert mesh.groups["pin"].kind == "surface-node-set"

    def test_group_resolution_returns_file_ids(self):
        mesh = parse_mesh(TWO_TETS)
        assert resolve_group(mesh, "frame") == {1, 2}
        assert resolve_group(mesh, "base") == {1, 2, 3}
        assert resolve_group(mesh, "pin") == {5}

    def test_unknown_group(self):
        mesh = parse_mesh(TWO_TETS)
        with pytest.raises(UnknownGroup):
            resolve_group(mesh, "lid")

    def test_positive_volumes_after_parse(self):
        mesh = parse_mesh(TWO_TETS)
        assert np.all(mesh.volumes() > 0), "orientation must be canonicalized"

    def test_node_accessor(self):
        mesh = parse_mesh(TWO_TETS)
        n = mesh.node(5)
        assert (n.x, n.y, n.z) == (1.0, 1.0, 1.0)

    def test_element_accessor_keeps_file_ids(self):
        mesh = parse_mesh(TWO_TETS)
        e = mesh.element(1)
        assert set(e.nodes) == {1, 2, 3, 4}
        assert e.group == "frame"

    def test_millimeter_scaling(self):
        mesh_m = parse_mesh(TWO_TETS, length_unit="m")
        mesh_mm = parse_mesh(TWO_TETS, length_unit="mm")
        assert_allclose(mesh_mm.coords, mesh_m.coords * 1e-3, rtol=0, atol=0)

    def test_bad_unit_rejected(self):
        with pytest.raises(ValueError):
            parse_mesh(TWO_TETS, length_unit="ft")


class TestParseErrors:
    def test_version_3_rejected(self):
        text = TWO_TETS.replace("2.2 0 8", "4.1 0 8")
        with pytest.raises(UnsupportedVersion):
            parse_mesh(text)

    def test_binary_rejected(self):
        text = TWO_TETS.replace("2.2 0 8", "2.2 1 8")
        with pytest.raises(UnsupportedVersion):
            parse_mesh(text)

    def test_node_count_mismatch_reports_line(self):
        text = TWO_TETS.replace("$Nodes\n5", "$Nodes\n6")
        with pytest.raises(MalformedSection) as err:
            parse_mesh(text)
        assert "line" in str(err.value)

    def test_bad_node_line(self):
        text = TWO_TETS.replace("2 1 0 0", "2 1 oops 0")
        with pytest.raises(MalformedSection):
            parse_mesh(text)

    def test_duplicate_node_id(self):
        text = TWO_TETS.replace("2 1 0 0", "1 1 0 0")
        with pytest.raises(MalformedSection):
            parse_mesh(text)

    def test_duplicate_element_id(self):
        text = TWO_TETS.replace("2 4 2 1 1 2 3 4 5", "1 4 2 1 1 2 3 4 5")
        with pytest.raises(MalformedSection):
            parse_mesh(text)

    def test_unclosed_section(self):
        text = TWO_TETS.replace("$EndNodes\n", "")
        with pytest.raises(MalformedSection):
            parse_mesh(text)

    def test_hexahedron_rejected(self):
        text = TWO_TETS.replace("3 2 2 2 2 1 2 3", "3 5 2 2 2 1 2 3 4 5 1 2 3")
        with pytest.raises(UnsupportedElementType):
            parse_mesh(text)

    def test_dangling_node_reference(self):
        text = TWO_TETS.replace("2 4 2 1 1 2 3 4 5", "2 4 2 1 1 2 3 4 99")
        with pytest.raises(DanglingReference):
            parse_mesh(text)

    def test_repeated_node_in_tet(self):
        text = TWO_TETS.replace("2 4 2 1 1 2 3 4 5", "2 4 2 1 1 2 3 4 4")
        with pytest.raises(MalformedSection):
            parse_mesh(text)

    def test_missing_nodes_section(self):
        text = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n"
        with pytest.raises(MalformedSection):
            parse_mesh(text)


class TestRoundTrip:
    def test_serialize_parse_bit_exact(self):
        rng = np.random.default_rng(17)
        mesh = parse_mesh(TWO_TETS)
        # perturb through an independent path: irrational-ish coordinates
        coords = mesh.coords + 0  # already read-only; build a new mesh
        coords = coords * np.pi + np.e * 1e-7
        jittered = Mesh(
            node_ids=mesh.node_ids, coords=coords, elem_ids=mesh.elem_ids,
            conn=mesh.conn.copy(), elem_group=mesh.elem_group,
            groups=mesh.groups)
        text = serialize_mesh(jittered)
        back = parse_mesh(text)
        assert np.array_equal(back.coords, jittered.coords), (
            "coordinates must survive the round trip bit-exactly")
        assert np.array_equal(back.conn, jittered.conn)
        assert np.array_equal(back.node_ids, jittered.node_ids)
        assert np.array_equal(back.elem_ids, jittered.elem_ids)
        del rng

    def test_groups_survive(self):
        mesh = parse_mesh(TWO_TETS)
        back = parse_mesh(serialize_mesh(mesh))
        for name in mesh.groups:
            assert resolve_group(back, name) == resolve_group(mesh, name)
            assert back.groups[name].kind == mesh.groups[name].kind

    def test_double_round_trip_stable(self):
        mesh = parse_mesh(TWO_TETS)
        once = serialize_mesh(parse_mesh(serialize_mesh(mesh)))
        assert once == serialize_mesh(mesh)


class TestValidate:
    def test_unit_cube_volume(self):
        mesh = box_mesh(2, 2, 2, 1.0, 1.0, 1.0)
        report = validate_mesh(mesh)
        assert report.n_elements == 48
        assert_allclose(report.total_volume, 1.0, rtol=1e-12)
        assert report.degenerate_count == 0
        assert report.unreferenced_nodes == 0

    def test_degenerate_element_counted(self):
        coords = np.array([
            [0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1],
            [1, 1, 0],
        ], dtype=float)
        conn = np.array([[0, 1, 2, 3], [0, 1, 2, 4]])  # second is coplanar
        mesh = Mesh.from_arrays(coords, conn)
        report = validate_mesh(mesh)
        assert report.degenerate_count == 1

    def test_unreferenced_node_counted(self):
        coords = np.array([
            [0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1],
            [5, 5, 5],
        ], dtype=float)
        conn = np.array([[0, 1, 2, 3]])
        mesh = Mesh.from_arrays(coords, conn)
        report = validate_mesh(mesh)
        assert report.unreferenced_nodes == 1

    def test_histogram_totals(self):
        mesh = box_mesh(3, 2, 1, 0.3, 0.2, 0.1)
        report = validate_mesh(mesh)
        assert sum(c for _, c in report.aspect_histogram) == mesh.n_elements

    def test_deterministic(self):
        mesh = box_mesh(2, 2, 2, 1.0, 1.0, 1.0)
        assert validate_mesh(mesh) == validate_mesh(mesh)


class TestMeshgen:
    def test_element_count(self):
        mesh = box_mesh(3, 2, 4, 1.0, 1.0, 1.0)
        assert mesh.n_elements == 6 * 3 * 2 * 4
        assert mesh.n_nodes == 4 * 3 * 5

    def test_volume_matches_box(self):
        mesh = box_mesh(3, 3, 3, 2.0, 0.5, 0.25)
        assert_allclose(mesh.volumes().sum(), 2.0 * 0.5 * 0.25, rtol=1e-12)

    def test_plane_node_set(self):
        mesh = box_mesh(2, 2, 2, 1.0, 1.0, 1.0,
                        node_sets={"west": plane_set(0, 0.0)})
        assert len(mesh.node_set("west")) == 9
        assert np.all(mesh.coords[mesh.node_set("west"), 0] == 0.0)

    def test_node_set_kind_enforced(self):
        mesh = box_mesh(1, 1, 1, 1, 1, 1, node_sets={"west": plane_set(0, 0.0)})
        with pytest.raises(UnknownGroup):
            mesh.element_set("west")
        with pytest.raises(UnknownGroup):
            mesh.node_set("body")
