import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from uavplace.errors import SpecValidationError
from uavplace.simkit import ExperimentSpec, run, verify_artifact, write_csv
from uavplace.simkit.artifacts import sha256_file
from uavplace.simkit.cli import main


def base_doc(**over):
    doc = {
        "name": "t",
        "density": {"kind": "uniform1d", "a": 0, "b": 1},
        "channel": {"model": "rayleigh", "lam": 1.0, "r": 2.0, "h": 0.5},
        "n": 2,
        "optimizer": {"kind": "pso", "particles": 10, "iterations": 15},
        "seed": 3,
    }
    doc.update(over)
    return doc


class TestSpecValidation:
    def test_valid_doc(self):
        spec = ExperimentSpec.from_dict(base_doc())
        assert spec.n_values == [2]
        assert spec.channel_at().lam == 1.0

    def test_collects_all_violations(self):
        doc = {
            "density": {"kind": "donut"},
            "channel": {"model": "laplace"},
            "n_values": [],
            "seed": "abc",
        }
        with pytest.raises(SpecValidationError) as ei:
            ExperimentSpec.from_dict(doc)
        msgs = "\n".join(ei.value.violations)
        assert len(ei.value.violations) >= 4
        assert "density" in msgs and "channel.model" in msgs and "seed" in msgs

    def test_lam_and_link_exclusive(self):
        doc = base_doc()
        doc["channel"]["link"] = {"ap_over_n0_db": 75, "rho": 1}
        with pytest.raises(SpecValidationError):
            ExperimentSpec.from_dict(doc)

    def test_link_budget(self):
        doc = base_doc()
        del doc["channel"]["lam"]
        doc["channel"]["link"] = {"ap_over_n0_db": 75, "rho": 1}
        spec = ExperimentSpec.from_dict(doc)
        assert spec.channel_at().lam == pytest.approx(10**-7.5)

    def test_rician_preset(self):
        doc = base_doc(channel={"model": "rician", "lam": 1.0, "h": 0.5, "preset": "suburban"})
        spec = ExperimentSpec.from_dict(doc)
        ch = spec.channel_at()
        assert ch.a3 == 5.0

    def test_h_sweep_override(self):
        spec = ExperimentSpec.from_dict(base_doc(h_values=[0.1, 0.9]))
        assert spec.channel_at(0.9).h == 0.9


class TestArtifacts:
    def test_csv_provenance_and_verify(self, tmp_path):
        p = tmp_path / "a.csv"
        write_csv(p, {"x": [1.5, 2.5], "y": [3, 4]}, {"spec": 1}, seed=7)
        text = p.read_text()
        assert text.startswith("# tool: uavplace")
        assert "# seed: 7" in text
        assert "x,y" in text
        assert verify_artifact(p)

    def test_verify_detects_tamper(self, tmp_path):
        p = tmp_path / "a.csv"
        write_csv(p, {"x": [1.0]}, {"spec": 1}, seed=0)
        text = p.read_text().replace('"spec":1', '"spec":2')
        p.write_text(text)
        assert not verify_artifact(p)

    def test_runs_reproduce_identical_bytes(self, tmp_path):
        spec = ExperimentSpec.from_dict(base_doc())
        run(spec, tmp_path / "r1")
        run(spec, tmp_path / "r2")
        h1 = sha256_file(tmp_path / "r1" / "t.csv")
        h2 = sha256_file(tmp_path / "r2" / "t.csv")
        assert h1 == h2

    def test_seed_changes_bytes(self, tmp_path):
        run(ExperimentSpec.from_dict(base_doc(seed=1)), tmp_path / "r1")
        run(ExperimentSpec.from_dict(base_doc(seed=2)), tmp_path / "r2")
        assert sha256_file(tmp_path / "r1" / "t.csv") != sha256_file(tmp_path / "r2" / "t.csv")

    def test_manifest_written(self, tmp_path):
        spec = ExperimentSpec.from_dict(base_doc())
        run(spec, tmp_path / "r")
        man = json.loads((tmp_path / "r" / "run_manifest.json").read_text())
        assert man["status"] == "complete"
        assert man["outputs"][0]["path"] == "t.csv"
        assert man["outputs"][0]["sha256"] == sha256_file(tmp_path / "r" / "t.csv")


class TestRunner:
    def test_sweep_grid(self, tmp_path):
        spec = ExperimentSpec.from_dict(base_doc(n_values=[1, 2], h_values=[0.2, 0.8]))
        records, cols = run(spec, tmp_path)
        assert len(cols["n"]) == 4
        assert set(zip(cols["n"], cols["h"])) == {(1, 0.2), (1, 0.8), (2, 0.2), (2, 0.8)}

    def test_gd_point(self, tmp_path):
        doc = base_doc(optimizer={"kind": "gd", "iterations": 30})
        records, cols = run(ExperimentSpec.from_dict(doc), tmp_path)
        assert 0.0 <= cols["outage"][0] <= 1.0

    def test_none_optimizer_evaluates_center(self, tmp_path):
        doc = base_doc(optimizer={"kind": "none"})
        _, cols = run(ExperimentSpec.from_dict(doc), tmp_path)
        assert cols["positions"][0].count(";") == 1  # two UAVs at the center


class TestCli:
    def _write_config(self, tmp_path, **over):
        p = tmp_path / "spec.json"
        p.write_text(json.dumps(base_doc(**over)))
        return str(p)

    def test_evaluate(self, tmp_path, capsys):
        cfg = self._write_config(tmp_path)
        rc = main(["evaluate", "--config", cfg, "--positions", "0.25;0.75"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "outage = " in out

    def test_bounds(self, tmp_path, capsys):
        cfg = self._write_config(tmp_path)
        rc = main(["bounds", "--config", cfg, "--samples", "50"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "consistent: True" in out

    def test_optimize_and_trace(self, tmp_path, capsys):
        cfg = self._write_config(tmp_path)
        rc = main(["optimize", "pso", "--config", cfg, "--out", str(tmp_path / "o")])
        assert rc == 0
        assert (tmp_path / "o" / "t_pso_trace.csv").exists()
        assert verify_artifact(tmp_path / "o" / "t_pso_trace.csv")

    def test_sweep_determinism_byte_identical(self, tmp_path):
        cfg = self._write_config(tmp_path)
        assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "s1")]) == 0
        assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "s2")]) == 0
        assert sha256_file(tmp_path / "s1" / "t.csv") == sha256_file(tmp_path / "s2" / "t.csv")

    def test_seed_flag_overrides(self, tmp_path):
        cfg = self._write_config(tmp_path)
        main(["sweep", "--config", cfg, "--out", str(tmp_path / "s1"), "--seed", "9"])
        main(["sweep", "--config", cfg, "--out", str(tmp_path / "s2"), "--seed", "10"])
        assert sha256_file(tmp_path / "s1" / "t.csv") != sha256_file(tmp_path / "s2" / "t.csv")

    def test_quadrature_flag(self, tmp_path, capsys):
        cfg = self._write_config(tmp_path)
        rc = main(["evaluate", "--config", cfg, "--positions", "0.5",
                   "--quadrature", "min_panels_1d=8,target_rel_tol=1e-5"])
        assert rc == 0

    def test_invalid_spec_exit_code(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({"density": {"kind": "donut"}, "channel": {"model": "x"}}))
        rc = main(["evaluate", "--config", str(p), "--positions", "0.5"])
        assert rc == 2
        assert "invalid spec" in capsys.readouterr().err

    def test_mc_oracle(self, tmp_path, capsys):
        cfg = self._write_config(tmp_path)
        rc = main(["mc-oracle", "--config", cfg, "--trials", "50000",
                   "--distances", "0,0.4"])
        assert rc == 0

    def test_module_entrypoint(self):
        proc = subprocess.run(
            [sys.executable, "-m", "uavplace.simkit.cli", "--version"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert "uavplace" in proc.stdout


class TestFigureDatasets:
    def test_unknown_figure_rejected(self, tmp_path):
        from uavplace.simkit import reproduce_figure

        with pytest.raises(ValueError):
            reproduce_figure("fig99", tmp_path)

    def test_figure_artifacts_and_determinism(self, tmp_path):
        # fig4a is the cheapest realistic figure; check CSV + SVG + manifest
        # and byte-identical regeneration
        from uavplace.simkit import reproduce_figure

        reproduce_figure("fig4a", tmp_path / "a", seed=1)
        reproduce_figure("fig4a", tmp_path / "b", seed=1)
        fa = tmp_path / "a" / "fig4a" / "fig4a.csv"
        fb = tmp_path / "b" / "fig4a" / "fig4a.csv"
        assert sha256_file(fa) == sha256_file(fb)
        assert (tmp_path / "a" / "fig4a" / "fig4a.svg").exists()
        assert verify_artifact(fa)
        man = json.loads((tmp_path / "a" / "fig4a" / "run_manifest.json").read_text())
        assert man["status"] == "complete"
