"""End-to-end tests of the command-line interface."""

import json
from pathlib import Path

import numpy as np
import pytest

from femaudit import cli
from femaudit.mesh_io import parse_mesh, serialize_mesh
from femaudit.meshgen import box_mesh, plane_set

REPO = Path(__file__).resolve().parents[1]
DEMO = REPO / "demo" / "mini_gantry" / "model.json"


def _base_model():
    return {
        "schema_version": 1,
        "units": "m",
        "mesh": "mesh.msh",
        "materials": {"*": {"E": 210e9, "nu": 0.3}},
        "constraints": {
            "dirichlet": [{"target": "left", "axes": ["x", "y", "z"]}],
        },
        "load_cases": [
            {"name": "dead", "category": "DeadLoad",
             "constituents": [{"type": "gravity"}]},
            {"name": "pull", "category": "MaterialLoad",
             "constituents": [{"type": "nodal_force", "node_set": "right",
                               "total": [0.0, 0.0, -1e4]}]},
        ],
        "combinations": [
            {"name": "operating", "case_class": "I",
             "cases": [["dead", 1.0], ["pull", 1.0]]},
        ],
    }


def _write(tmp_path, model=None):
    """Write a small clamped-bar model + mesh; returns the model path."""
    mesh = box_mesh(2, 1, 1, 1.0, 0.5, 0.5, node_sets={
        "left": plane_set(0, 0.0),
        "right": plane_set(0, 1.0),
    })
    (tmp_path / "mesh.msh").write_text(serialize_mesh(mesh), encoding="utf-8")
    doc = model if model is not None else _base_model()
    path = tmp_path / "model.json"
    path.write_text(json.dumps(doc, indent=1), encoding="utf-8")
    return path


class TestModelFile:
    """Schema violations come back as exit 2 with a located message."""

    def _expect(self, tmp_path, capsys, doc, fragment):
        path = _write(tmp_path, doc)
        assert cli.main(["check", str(path)]) == 2
        err = capsys.readouterr().err
        assert fragment in err, err

    def test_missing_file(self, tmp_path, capsys):
        assert cli.main(["check", str(tmp_path / "nope.json")]) == 2
        assert "cannot read model file" in capsys.readouterr().err

    def test_invalid_json(self, tmp_path, capsys):
        path = tmp_path / "model.json"
        path.write_text("{not json", encoding="utf-8")
        assert cli.main(["check", str(path)]) == 2
        assert "invalid JSON" in capsys.readouterr().err

    def test_unknown_top_level_key(self, tmp_path, capsys):
        doc = _base_model()
        doc["extra_section"] = {}
        self._expect(tmp_path, capsys, doc, "unknown keys ['extra_section']")

    def test_missing_required_key(self, tmp_path, capsys):
        doc = _base_model()
        del doc["materials"]
        self._expect(tmp_path, capsys, doc, "missing required keys ['materials']")

    def test_wrong_schema_version(self, tmp_path, capsys):
        doc = _base_model()
        doc["schema_version"] = 2
        self._expect(tmp_path, capsys, doc, "unsupported schema_version 2")

    def test_bad_units(self, tmp_path, capsys):
        doc = _base_model()
        doc["units"] = "inch"
        self._expect(tmp_path, capsys, doc, "model.units")

    def test_missing_mesh_file(self, tmp_path, capsys):
        doc = _base_model()
        doc["mesh"] = "absent.msh"
        self._expect(tmp_path, capsys, doc, "cannot read mesh file")

    def test_material_group_not_in_mesh(self, tmp_path, capsys):
        doc = _base_model()
        doc["materials"]["girder"] = {"E": 1e9, "nu": 0.2}
        self._expect(tmp_path, capsys, doc, "model.materials.girder")

    def test_material_bad_poisson(self, tmp_path, capsys):
        doc = _base_model()
        doc["materials"]["*"]["nu"] = 0.7
        self._expect(tmp_path, capsys, doc, "model.materials.*")

    def test_unknown_load_category(self, tmp_path, capsys):
        doc = _base_model()
        doc["load_cases"][0]["category"] = "Thermal"
        self._expect(tmp_path, capsys, doc,
                     "model.load_cases[0].category")

    def test_unknown_constituent_type(self, tmp_path, capsys):
        doc = _base_model()
        doc["load_cases"][0]["constituents"] = [{"type": "pressure"}]
        self._expect(tmp_path, capsys, doc, "unknown constituent type")

    def test_combination_names_unknown_case(self, tmp_path, capsys):
        doc = _base_model()
        doc["combinations"][0]["cases"] = [["ghost", 1.0]]
        self._expect(tmp_path, capsys, doc,
                     "model.combinations[0].cases[0]: unknown load case 'ghost'")

    def test_bad_dirichlet_axis(self, tmp_path, capsys):
        doc = _base_model()
        doc["constraints"]["dirichlet"][0]["axes"] = ["x", "w"]
        self._expect(tmp_path, capsys, doc, "model.constraints.dirichlet[0]")

    def test_bad_hotspot_count(self, tmp_path, capsys):
        doc = _base_model()
        doc["output"] = {"hotspots": 0}
        self._expect(tmp_path, capsys, doc, "model.output.hotspots")

    def test_unknown_keys_inside_constituent(self, tmp_path, capsys):
        doc = _base_model()
        doc["load_cases"][1]["constituents"][0]["direction"] = [1, 0, 0]
        self._expect(tmp_path, capsys, doc, "unknown keys ['direction']")


class TestCheck:
    def test_ok(self, tmp_path, capsys):
        path = _write(tmp_path)
        assert cli.main(["check", str(path)]) == 0
        out = capsys.readouterr().out
        assert "rigid-body check: constrained" in out
        assert out.rstrip().endswith("ok")

    def test_free_body_reports_modes_exit_3(self, tmp_path, capsys):
        doc = _base_model()
        doc["constraints"] = {}
        path = _write(tmp_path, doc)
        assert cli.main(["check", str(path)]) == 3
        out = capsys.readouterr().out
        assert out.count("rigid mode:") == 6
        assert "rigid mode: translation x" in out
        assert "rigid mode: rotation z" in out

    def test_unresolved_constraint_target_names_it(self, tmp_path, capsys):
        doc = _base_model()
        doc["constraints"]["dirichlet"][0]["target"] = "west_face"
        path = _write(tmp_path, doc)
        assert cli.main(["check", str(path)]) == 2
        assert "west_face" in capsys.readouterr().err

    def test_unknown_load_target_names_it(self, tmp_path, capsys):
        doc = _base_model()
        doc["load_cases"][1]["constituents"][0]["node_set"] = "tip_set"
        path = _write(tmp_path, doc)
        assert cli.main(["check", str(path)]) == 2
        assert "tip_set" in capsys.readouterr().err

    def test_demo_model_checks_clean(self, capsys):
        assert cli.main(["check", str(DEMO)]) == 0


class TestAudit:
    def test_writes_artifacts_and_passes(self, tmp_path, capsys):
        path = _write(tmp_path)
        out = tmp_path / "out"
        assert cli.main(["audit", str(path), "--out", str(out)]) == 0
        assert (out / "report.json").is_file()
        assert (out / "report.txt").is_file()
        assert (out / "01_operating.vtk").is_file()
        assert (out / "01_operating.summary.json").is_file()
        doc = json.loads((out / "report.json").read_text())
        assert doc["verdict"] == "PASS"
        assert doc["governing_combination"] == "operating"
        assert "PASS" in capsys.readouterr().out

    def test_fail_verdict_exit_1(self, tmp_path, capsys):
        doc = _base_model()
        doc["combinations"][0]["permissible"] = 1e4
        path = _write(tmp_path, doc)
        out = tmp_path / "out"
        assert cli.main(["audit", str(path), "--out", str(out)]) == 1
        report = json.loads((out / "report.json").read_text())
        assert report["verdict"] == "FAIL"

    def test_rigid_structure_exit_3_no_report(self, tmp_path, capsys):
        doc = _base_model()
        doc["constraints"] = {}
        path = _write(tmp_path, doc)
        out = tmp_path / "out"
        assert cli.main(["audit", str(path), "--out", str(out)]) == 3
        assert not (out / "report.json").exists()

    def test_no_combinations_is_an_error(self, tmp_path, capsys):
        doc = _base_model()
        doc["combinations"] = []
        path = _write(tmp_path, doc)
        assert cli.main(["audit", str(path), "--out", str(tmp_path / "o")]) == 2
        assert "no combinations" in capsys.readouterr().err

    def test_reruns_are_byte_identical(self, tmp_path, capsys):
        path = _write(tmp_path)
        a, b = tmp_path / "a", tmp_path / "b"
        assert cli.main(["audit", str(path), "--out", str(a)]) == 0
        assert cli.main(["audit", str(path), "--out", str(b)]) == 0
        for name in ("report.json", "report.txt",
                     "01_operating.vtk", "01_operating.summary.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_single_thread_matches_default(self, tmp_path, capsys, monkeypatch):
        path = _write(tmp_path)
        a, b = tmp_path / "a", tmp_path / "b"
        assert cli.main(["audit", str(path), "--out", str(a)]) == 0
        monkeypatch.setenv("AUDIT_THREADS", "1")
        assert cli.main(["audit", str(path), "--out", str(b)]) == 0
        assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()

    def test_bad_thread_env_is_an_error(self, tmp_path, capsys, monkeypatch):
        path = _write(tmp_path)
        monkeypatch.setenv("AUDIT_THREADS", "many")
        assert cli.main(["audit", str(path), "--out", str(tmp_path / "o")]) == 2
        assert "AUDIT_THREADS" in capsys.readouterr().err

    def test_scale_moves_vtk_points_only(self, tmp_path, capsys):
        """Magnification is cosmetic: the report must not change."""
        path = _write(tmp_path)
        a, b = tmp_path / "a", tmp_path / "b"
        assert cli.main(["audit", str(path), "--out", str(a)]) == 0
        assert cli.main(["audit", str(path), "--out", str(b),
                         "--scale", "50"]) == 0
        assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
        assert (a / "01_operating.vtk").read_bytes() != (b / "01_operating.vtk").read_bytes()

    def test_top_limits_hotspot_rows(self, tmp_path, capsys):
        path = _write(tmp_path)
        out = tmp_path / "out"
        assert cli.main(["audit", str(path), "--out", str(out),
                         "--top", "3"]) == 0
        doc = json.loads((out / "report.json").read_text())
        assert len(doc["hotspots"]["operating"]) == 3

    def test_cg_solver_agrees_with_direct(self, tmp_path, capsys):
        path = _write(tmp_path)
        a, b = tmp_path / "a", tmp_path / "b"
        assert cli.main(["audit", str(path), "--out", str(a)]) == 0
        assert cli.main(["audit", str(path), "--out", str(b),
                         "--solver", "cg"]) == 0
        da = json.loads((a / "report.json").read_text())
        db = json.loads((b / "report.json").read_text())
        ua = da["combinations"][0]["max_von_mises_pa"]
        ub = db["combinations"][0]["max_von_mises_pa"]
        assert ua == pytest.approx(ub, rel=1e-6)

    def test_demo_model_passes(self, tmp_path, capsys):
        out = tmp_path / "demo_out"
        assert cli.main(["audit", str(DEMO), "--out", str(out)]) == 0
        doc = json.loads((out / "report.json").read_text())
        assert doc["verdict"] == "PASS"
        assert len(doc["combinations"]) == 3


def _layout_section():
    return {
        "slew_origin": [0.0, 0.0, 0.0],
        "boom_direction": [1.0, 0.0, 0.0],
        "pivot_height": 0.5,
        "items": [
            {"type": "boom", "name": "boom", "mass": 1000.0, "lever": 10.0},
            {"type": "platform", "name": "ballast", "mass": 2000.0,
             "position": [-4.0, 0.0, 1.0]},
        ],
    }


class TestReactions:
    def test_no_layout_is_an_error(self, tmp_path, capsys):
        path = _write(tmp_path)
        assert cli.main(["reactions", str(path),
                         "--psi", "0", "--phi", "0"]) == 2
        assert "layout" in capsys.readouterr().err

    def test_stdout_csv(self, tmp_path, capsys):
        doc = _base_model()
        doc["layout"] = _layout_section()
        path = _write(tmp_path, doc)
        assert cli.main(["reactions", str(path),
                         "--psi", "0,45,90", "--phi", "0"]) == 0
        captured = capsys.readouterr()
        lines = captured.out.strip().splitlines()
        assert lines[0] == "psi_deg,phi_deg,Fx,Fy,Fz,Mx,My,Mz"
        assert len(lines) == 4
        assert "governing pose" in captured.err

    def test_out_dir_csv(self, tmp_path, capsys):
        doc = _base_model()
        doc["layout"] = _layout_section()
        path = _write(tmp_path, doc)
        out = tmp_path / "re"
        assert cli.main(["reactions", str(path), "--psi", "0",
                         "--phi=-9,0,9", "--out", str(out)]) == 0
        text = (out / "reactions.csv").read_text()
        assert len(text.strip().splitlines()) == 4
        # every pose weighs the same: Fz is one repeated value
        fz = {line.split(",")[4] for line in text.strip().splitlines()[1:]}
        assert len(fz) == 1

    def test_empty_grid_usage_error(self, tmp_path, capsys):
        path = _write(tmp_path)
        with pytest.raises(SystemExit) as exc:
            cli.main(["reactions", str(path), "--psi", ",", "--phi", "0"])
        assert exc.value.code == 2
        assert "empty" in capsys.readouterr().err

    def test_demo_layout_sweeps(self, tmp_path, capsys):
        out = tmp_path / "re"
        assert cli.main(["reactions", str(DEMO), "--psi=-110,0,110",
                         "--phi=-9,0,9", "--out", str(out)]) == 0
        lines = (out / "reactions.csv").read_text().strip().splitlines()
        assert len(lines) == 10


class TestExport:
    def test_writes_canonical_mesh_and_quality(self, tmp_path, capsys):
        path = _write(tmp_path)
        out = tmp_path / "exp"
        assert cli.main(["export", str(path), "--out", str(out)]) == 0
        text = (out / "mesh_canonical.msh").read_text()
        again = parse_mesh(text)
        assert again.n_nodes == 12
        assert again.n_elements == 12
        quality = json.loads((out / "quality.json").read_text())
        assert quality["n_elements"] == 12
        assert quality["degenerate_count"] == 0
        assert quality["total_volume"] == pytest.approx(0.25, rel=1e-12)

    def test_canonical_output_is_stable(self, tmp_path, capsys):
        path = _write(tmp_path)
        a, b = tmp_path / "a", tmp_path / "b"
        assert cli.main(["export", str(path), "--out", str(a)]) == 0
        assert cli.main(["export", str(path), "--out", str(b)]) == 0
        assert (a / "mesh_canonical.msh").read_bytes() == \
               (b / "mesh_canonical.msh").read_bytes()


class TestParsing:
    def test_wrench_constituent_round_trip(self, tmp_path):
        doc = _base_model()
        doc["constraints"]["couplings"] = [
            {"name": "hub", "node_set": "right", "reference": [1.0, 0.25, 0.25]},
        ]
        doc["load_cases"].append({
            "name": "service", "category": "NormalDigging",
            "constituents": [{"type": "wrench", "coupling": "hub",
                              "Fz": -3.5, "My": 2.0}],
        })
        path = _write(tmp_path, doc)
        model = cli.load_model(path)
        wrench = model.load_cases[2].constituents[0].wrench
        assert wrench.Fz == -3.5
        assert wrench.My == 2.0
        assert wrench.Fx == 0.0

    def test_gravity_override_feeds_gravity_cases(self, tmp_path):
        doc = _base_model()
        doc["gravity"] = [0.0, 0.0, -1.62]
        path = _write(tmp_path, doc)
        model = cli.load_model(path)
        assert model.load_cases[0].constituents[0].g == (0.0, 0.0, -1.62)

    def test_digests_cover_model_and_mesh(self, tmp_path):
        path = _write(tmp_path)
        model = cli.load_model(path)
        assert sorted(model.digests) == ["mesh", "model"]
        assert all(len(d) == 64 for d in model.digests.values())

    def test_criteria_parsed(self, tmp_path):
        doc = _base_model()
        doc["criteria"] = {"class_permissible": {"I": 1.6e8},
                           "deflection_limit": 0.01,
                           "classification": ["light duty"]}
        path = _write(tmp_path, doc)
        model = cli.load_model(path)
        assert model.criteria.class_permissible == {"I": 1.6e8}
        assert model.criteria.deflection_limit == 0.01
