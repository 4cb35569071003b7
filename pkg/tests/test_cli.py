"""Command-line harness: outputs, determinism, exit codes, config files."""

import json
from pathlib import Path

import pytest

from dephaselab.cli import main


def payload_lines(path: Path) -> list[str]:
    return [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]


class TestCommandsRun:
    def test_dephase(self, tmp_path):
        out = tmp_path / "dephase.csv"
        assert main(["dephase", "--d", "6", "--trials", "5",
                     "--out", str(out), "--deterministic"]) == 0
        lines = payload_lines(out)
        assert lines[0] == "d,trial,system_residual,ancilla_residual"
        assert len(lines) == 6
        assert all(float(ln.split(",")[2]) <= 1e-10 for ln in lines[1:])

    def test_classical_dephase(self, tmp_path):
        out = tmp_path / "cd.csv"
        assert main(["classical-dephase", "--d", "5", "--trials", "4",
                     "--out", str(out), "--deterministic"]) == 0
        header = out.read_text().splitlines()
        assert any("witness_rank" in ln for ln in header)

    def test_transition(self, tmp_path):
        out = tmp_path / "tr.csv"
        assert main(["transition", "--d", "3", "--trials", "5",
                     "--out", str(out), "--deterministic"]) == 0
        lines = payload_lines(out)
        assert lines[0] == "d,trial,mode,m,error"
        assert len(lines) == 11  # both modes per trial

    def test_chain(self, tmp_path):
        out = tmp_path / "chain.json"
        assert main(["chain", "--n", "2", "--d", "2",
                     "--out", str(out), "--deterministic"]) == 0
        doc = json.loads(out.read_text())
        assert max(doc["marginal_residuals"]) <= 1e-9
        assert doc["catalyst_residual"] <= 1e-9

    def test_machine(self, tmp_path):
        out = tmp_path / "machine.csv"
        assert main(["machine", "--d", "4", "--iters", "6",
                     "--out", str(out), "--deterministic"]) == 0
        lines = payload_lines(out)
        assert lines[0] == "n,dist_system,dist_ancilla,entropy,bound"
        assert len(lines) == 7

    def test_recur(self, tmp_path):
        out = tmp_path / "recur.csv"
        assert main(["recur", "--m", "3", "--out", str(out),
                     "--deterministic"]) == 0
        lines = payload_lines(out)
        assert len(lines) == 7  # header + k = 1..6

    def test_fig3(self, tmp_path):
        prefix = tmp_path / "sweep"
        assert main(["fig3", "--m", "3", "--samples", "8",
                     "--out", str(prefix), "--deterministic"]) == 0
        out = Path(f"{prefix}_m3.csv")
        lines = payload_lines(out)
        assert lines[0] == "m,t_over_m,distance"

    def test_pqc(self, tmp_path):
        out = tmp_path / "pqc.json"
        assert main(["pqc", "--error", "0100", "--rounds", "6",
                     "--out", str(out), "--deterministic"]) == 0
        doc = json.loads(out.read_text())
        assert doc["syndrome"] != "0000"
        assert doc["recovered_fidelity"] >= 1 - 1e-9
        assert doc["ebits_consumed"] == 6

    def test_expander(self, tmp_path):
        out = tmp_path / "exp.csv"
        assert main(["expander", "--e", "3", "--k", "10",
                     "--out", str(out), "--deterministic"]) == 0
        lines = payload_lines(out)
        assert lines[0] == "k,measured_2norm,bound"
        assert len(lines) == 12

    def test_bounds(self, tmp_path):
        out = tmp_path / "bounds.json"
        assert main(["bounds", "--d", "9", "--epsilon", "0.01",
                     "--out", str(out), "--deterministic"]) == 0
        doc = json.loads(out.read_text())
        assert doc["quantum"]["satisfied"] and doc["classical"]["satisfied"]
        assert doc["entropy_budget"]["saturated"]


class TestReproducibility:
    @pytest.mark.parametrize("cmd", [
        ["dephase", "--d", "5", "--trials", "4", "--seed", "9"],
        ["machine", "--d", "4", "--iters", "5", "--seed", "9"],
        ["pqc", "--seed", "9"],
    ])
    def test_deterministic_reruns_byte_identical(self, cmd, tmp_path):
        a, b = tmp_path / "a.out", tmp_path / "b.out"
        assert main(cmd + ["--out", str(a), "--deterministic"]) == 0
        assert main(cmd + ["--out", str(b), "--deterministic"]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_seed_in_header(self, tmp_path):
        out = tmp_path / "x.csv"
        main(["dephase", "--d", "4", "--trials", "2", "--seed", "123",
              "--out", str(out), "--deterministic"])
        assert "# seed: 123" in out.read_text()


class TestExitCodes:
    def test_usage_error_is_two(self):
        with pytest.raises(SystemExit) as exc:
            main(["dephase", "--nonsense"])
        assert exc.value.code == 2

    def test_unknown_config_field_is_two(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"frobnicate": 1}))
        with pytest.raises(SystemExit) as exc:
            main(["--config", str(cfg), "dephase"])
        assert exc.value.code == 2

    def test_config_supplies_values(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        out = tmp_path / "из.csv"
        cfg.write_text(json.dumps({"d": 5, "trials": 3, "deterministic": True,
                                   "out": str(out)}))
        assert main(["--config", str(cfg), "dephase"]) == 0
        assert len(payload_lines(out)) == 4

    def test_flag_overrides_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        out = tmp_path / "o.csv"
        cfg.write_text(json.dumps({"trials": 3}))
        assert main(["--config", str(cfg), "dephase", "--d", "4",
                     "--trials", "2", "--out", str(out), "--deterministic"]) == 0
        assert len(payload_lines(out)) == 3

    def test_check_failure_is_one(self, tmp_path):
        # an impossible tolerance forces the internal verification to fail
        tol = tmp_path / "tol.json"
        tol.write_text(json.dumps({"dephasing_residual": 0.0}))
        out = tmp_path / "o.csv"
        assert main(["dephase", "--d", "4", "--trials", "2",
                     "--tol-file", str(tol), "--out", str(out)]) == 1
