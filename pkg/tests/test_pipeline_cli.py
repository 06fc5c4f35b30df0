import json
import subprocess
import sys

import numpy as np
import pytest

from sohcast.cli import main
from sohcast.config import config_from_dict, load_config
from sohcast.errors import ConfigError
from sohcast.pipeline import Pipeline


def micro_config(out_dir, **over):
    doc = {
        "seed": 5,
        "out_dir": str(out_dir),
        "workers": 1,
        "data": {"source": "synth",
                 "synth": {"n_cells": 9, "n_cycles": 220, "noise_sd": 0.004},
                 "window": 24, "horizon": 12, "train_stride": 20,
                 "test_fraction": 0.34},
        "teacher": {"hidden_dim": 8, "epochs": 6, "lr": 0.003, "steps": 6},
        "students": {"dims": [4], "epochs": 4, "lr": 0.003},
        "distill": {"lambda_init": 0.1, "lambda_step": 0.2, "lambda_max": 0.9},
        "prune": {"sparsities": [0.0, 0.5]},
        "quant": {"calib_windows": 16, "golden_count": 4},
        "selection": {"eval_runs": 5, "timing_reps": 2},
    }
    doc.update(over)
    return doc


def write_config(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


class TestConfig:
    def test_unknown_top_key_rejected(self, tmp_path):
        p = write_config(tmp_path, {**micro_config(tmp_path / "o"), "typo_key": 1})
        with pytest.raises(ConfigError, match="typo_key"):
            load_config(p)

    def test_unknown_nested_key_rejected(self, tmp_path):
        doc = micro_config(tmp_path / "o")
        doc["teacher"]["hiden_dim"] = 4
        with pytest.raises(ConfigError, match="hiden_dim"):
            load_config(write_config(tmp_path, doc))

    def test_defaults_match_experiment_setup(self):
        cfg = config_from_dict({})
        assert cfg.data.window == cfg.data.horizon == 100
        assert cfg.teacher.hidden_dim == 128 and cfg.teacher.epochs == 200
        assert cfg.students.dims == (2, 4, 8, 16, 32, 64, 128)
        assert cfg.distill.lambda_init == 0.1
        assert cfg.distill.lambda_step == 0.004
        assert cfg.distill.lambda_max == 0.9
        assert cfg.prune.sparsities == tuple(np.round(np.arange(0.1, 1.0, 0.1), 1))
        assert cfg.selection.f_err_max == cfg.selection.f_cst_max == 0.25

    def test_invalid_lambda_bounds(self):
        with pytest.raises(ConfigError):
            config_from_dict({"distill": {"lambda_init": 0.95, "lambda_step": 0.004,
                                          "lambda_max": 0.9}})


class TestPipelineStages:
    @pytest.fixture(scope="class")
    def run_dir(self, tmp_path_factory):
        out = tmp_path_factory.mktemp("pipe")
        cfg = config_from_dict(micro_config(out))
        pipe = Pipeline(cfg)
        pipe.run_stage1()
        pipe.run_stage2()
        pipe.run_deploy()
        return out

    def test_stage1_pool_and_front(self, run_dir):
        state = json.loads((run_dir / "state.json").read_text())
        records = state["records"]["stage1"]
        assert len(records) == 2  # dims [4] x 2 kinds
        front = set(state["fronts"]["stage1"])
        assert front <= {r["id"] for r in records}
        assert front

    def test_stage2_doubling(self, run_dir):
        state = json.loads((run_dir / "state.json").read_text())
        n_elites = len(state["fronts"]["stage1"])
        records = state["records"]["stage2"]
        assert len(records) == n_elites * 2 * 2  # sparsities x loss kinds

    def test_sparsity_zero_degenerates_to_redistillation(self, run_dir):
        state = json.loads((run_dir / "state.json").read_text())
        zero = [r for r in state["records"]["stage2"] if r["sparsity"] == 0.0]
        assert zero and all(r["status"] == "trained" for r in zero)

    def test_deploy_artifacts(self, run_dir):
        for name in ("soh_model_data.h", "soh_model_kernel.c", "golden.csv"):
            assert (run_dir / "bundle" / name).exists()
        state = json.loads((run_dir / "state.json").read_text())
        assert state["deployed"] in state["fronts"]["stage2"]
        dep = state["records"]["deploy"][0]
        assert dep["cost_vector"]["model_size_bytes"] > 0

    def test_ledger_complete(self, run_dir):
        state = json.loads((run_dir / "state.json").read_text())
        text = (run_dir / "ledger" / "stage2.csv").read_text()
        for r in state["records"]["stage2"]:
            assert r["id"] in text
        assert (run_dir / "report.md").exists()

    def test_report_regenerates_from_state(self, run_dir):
        before = (run_dir / "ledger" / "stage1.csv").read_bytes()
        (run_dir / "ledger" / "stage1.csv").unlink()
        cfg = config_from_dict(micro_config(run_dir))
        Pipeline(cfg).run_report()
        from sohcast.reporting import mask_wall_column

        after = (run_dir / "ledger" / "stage1.csv").read_bytes()
        assert mask_wall_column(after.decode()) == mask_wall_column(before.decode())


class TestCli:
    def test_synth_data_deterministic(self, tmp_path):
        p = write_config(tmp_path, micro_config(tmp_path / "o"))
        for name in ("a.csv", "b.csv"):
            rc = main(["synth-data", "--config", str(p), "--seed", "7",
                       "--dest", str(tmp_path / name)])
            assert rc == 0
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_unknown_flag_exits_1(self, tmp_path):
        p = write_config(tmp_path, micro_config(tmp_path / "o"))
        proc = subprocess.run(
            [sys.executable, "-m", "sohcast.cli", "stage1", "--config", str(p),
             "--bogus-flag"], capture_output=True, text=True)
        assert proc.returncode == 1
        assert "usage" in proc.stderr.lower()

    def test_report_without_ledger_exits_1(self, tmp_path):
        p = write_config(tmp_path, micro_config(tmp_path / "empty"))
        rc = main(["report", "--config", str(p)])
        assert rc == 1

    def test_missing_config_exits_1(self, tmp_path):
        rc = main(["stage1", "--config", str(tmp_path / "nope.json")])
        assert rc == 1

    def test_stage2_before_stage1_exits_2(self, tmp_path):
        p = write_config(tmp_path, micro_config(tmp_path / "o2"))
        rc = main(["stage2", "--config", str(p)])
        assert rc == 2

    def test_csv_source_roundtrip(self, tmp_path):
        doc = micro_config(tmp_path / "o3")
        p = write_config(tmp_path, doc)
        dest = tmp_path / "cells.csv"
        assert main(["synth-data", "--config", str(p), "--dest", str(dest)]) == 0
        doc2 = micro_config(tmp_path / "o4")
        doc2["data"]["source"] = "csv"
        doc2["data"]["csv_path"] = str(dest)
        cfg = config_from_dict(doc2)
        split = Pipeline(cfg).dataset()
        assert split.train and split.test
