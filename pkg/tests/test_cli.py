import json

import pytest

from bsdl import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestCatalog:
    def test_lists_all_entries(self, capsys):
        code, out, _ = run(capsys, "catalog")
        rows = json.loads(out)
        assert code == cli.OK
        assert len(rows) == 8
        assert {"standard-torus", "morse-smale"} <= {r["id"] for r in rows}

    def test_single_entry_resolves_expected(self, capsys):
        code, out, _ = run(capsys, "catalog", "periodic-circle")
        d = json.loads(out)
        assert code == cli.OK
        assert d["defaults"]["n"] == 3
        assert d["expected"]["minimal_size"] == 2

    def test_unknown_entry_errors(self, capsys):
        code, _, err = run(capsys, "catalog", "nope")
        assert code == cli.ERROR
        assert "unknown action" in err


class TestVerifyRelation:
    def test_standard_torus_passes(self, capsys):
        code, out, _ = run(capsys, "verify-relation", "standard-torus")
        d = json.loads(out)
        assert code == cli.OK
        assert d["passed"] is True
        assert d["grid"] == 10000

    def test_unknown_action_errors(self, capsys):
        code, _, err = run(capsys, "verify-relation", "no-such-thing")
        assert code == cli.ERROR
        assert "known:" in err


class TestRotationNumber:
    def test_rational_fiber(self, capsys):
        code, out, _ = run(
            capsys,
            "rotation-number",
            "nonfaithful-circle",
            "--k",
            "rot:1/3",
            "--iterates",
            "1000",
        )
        d = json.loads(out)
        assert code == cli.OK
        assert abs(d["value"] - 1.0 / 3.0) < 1e-12
        assert d["rational_witness"]["q"] == 3

    def test_torus_action_rejected(self, capsys):
        code, _, err = run(capsys, "rotation-number", "standard-torus")
        assert code == cli.ERROR
        assert "circle actions" in err


class TestMatrixAndOrbits:
    def test_order_four(self, capsys):
        code, out, _ = run(capsys, "classify-matrix", "0,1,-1,0")
        d = json.loads(out)
        assert code == cli.OK
        assert d["order"] == 4 and d["det"] == 1

    def test_shear_square_not_conjugate(self, capsys):
        code, out, _ = run(capsys, "classify-matrix", "1,1,0,1", "1,2,0,1")
        d = json.loads(out)
        assert code == cli.OK
        assert d["order"] is None
        assert d["conjugator"] is None and not d["conjugate_within_bound"]

    def test_bad_matrix_errors(self, capsys):
        code, _, err = run(capsys, "classify-matrix", "1,2,3")
        assert code == cli.ERROR
        assert "4 comma-separated" in err

    def test_finite_orbit_closes(self, capsys):
        code, out, _ = run(capsys, "finite-orbit", "product", "--k", "rot:1/3")
        d = json.loads(out)
        assert code == cli.OK
        assert d["size"] == 3 and d["closed"]


class TestEstimatorCommands:
    def test_fixed_set_counts_cells(self, capsys):
        code, out, _ = run(capsys, "fixed-set", "standard-torus", "--resolution", "64")
        d = json.loads(out)
        assert code == cli.OK
        assert d["resolution"] == 64
        assert d["count"] == len(d["cells"]) > 0

    def test_minimal_set_label(self, capsys):
        code, out, _ = run(
            capsys, "minimal-set", "nonfaithful-circle", "--k", "rot:1/3"
        )
        d = json.loads(out)
        assert code == cli.OK
        assert d["label"] == "FiniteOrbit"

    def test_rotation_set_with_constraint(self, capsys):
        code, out, _ = run(
            capsys,
            "rotation-set",
            "standard-torus",
            "--resolution",
            "8",
            "--iterates",
            "500",
        )
        d = json.loads(out)
        assert code == cli.OK
        assert d["estimate"]["is_point"] is True
        assert d["constraint"]["snapped"] == [
            {"num": 0, "den": 1},
            {"num": 0, "den": 1},
        ]

    def test_trichotomy_conclusive(self, capsys):
        code, out, _ = run(capsys, "trichotomy", "product", "--k", "rot:1/3")
        d = json.loads(out)
        assert code == cli.OK
        assert d["outcome"] == "FiniteOrbits"

    def test_persistent_fp_exit_codes(self, capsys):
        code, out, _ = run(capsys, "persistent-fp", "morse-smale")
        d = json.loads(out)
        assert code == cli.OK
        assert d["point"] == [0.0, 0.0]
        code2, out2, _ = run(capsys, "persistent-fp", "standard-torus")
        assert code2 == cli.INCONCLUSIVE
        assert json.loads(out2)["found"] is False


class TestOutputFile:
    def test_out_writes_json_atomically(self, capsys, tmp_path):
        target = tmp_path / "report.json"
        code, out, _ = run(
            capsys,
            "verify-relation",
            "standard-line",
            "--out",
            str(target),
        )
        assert code == cli.OK
        assert out == ""
        d = json.loads(target.read_text())
        assert d["passed"] is True
        assert list(tmp_path.iterdir()) == [target]


class TestReproduceAll:
    def test_row_per_criterion_and_exit(self, capsys, tmp_path, monkeypatch):
        rows = [
            {"id": 1, "name": "relation-suite", "passed": True,
             "details": {"x": 1.5}, "elapsed": 0.01},
            {"id": 12, "name": "determinism", "passed": False,
             "details": {}, "elapsed": 0.02},
        ]
        monkeypatch.setattr(cli, "run_all", lambda seed: rows)
        target = tmp_path / "rows.json"
        code, out, _ = run(capsys, "reproduce-all", "--out", str(target))
        lines = out.strip().splitlines()
        assert code == cli.INCONCLUSIVE
        assert len(lines) == 3
        assert "relation-suite" in lines[0] and "PASS" in lines[0]
        assert "determinism" in lines[1] and "FAIL" in lines[1]
        assert "1/2 criteria passed" in lines[2]
        assert json.loads(target.read_text())[0]["id"] == 1

    def test_seed_is_forwarded(self, capsys, monkeypatch):
        seen = {}

        def fake(seed):
            seen["seed"] = seed
            return [{"id": 1, "name": "relation-suite", "passed": True,
                     "details": {}, "elapsed": 0.0}]

        monkeypatch.setattr(cli, "run_all", fake)
        code, out, _ = run(capsys, "reproduce-all", "--seed", "11")
        assert code == cli.OK
        assert seen["seed"] == 11
        assert "seed 11" in out
