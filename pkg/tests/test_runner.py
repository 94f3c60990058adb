"""
Tests for configuration, grid expansion, plotting, the pipeline and the CLI
"""

import json
import os
import re
import sys
import xml.etree.ElementTree as ET

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, ROOT)

import numpy as np
import pandas as pd
import pytest

from app import (
    ConfigError,
    PipelineStageError,
    emit_plot,
    expand_grid,
    grid_search,
    load_config,
    parse_config_text,
    run_pipeline,
)
from app.cli import main
from app.pipeline import discriminator_spec
from app.seeds import combination_seed, derive_seed, stage_seed
from metrics import successfulness

SMOKE = os.path.join(ROOT, "configs", "smoke.cfg")

GRID_TEXT = """
[experiment]
name = grid-test
seed = 4

[attack]
kind = ifgsm
aggregation = sum

[grid]
eps = [0.005, 0.01, 0.03, 0.05]
alpha = [0.001, 0.01, 0.1, 1, 10, 100]
"""

TWO_BLOCK_TEXT = """
[experiment]
name = two-block
seed = 2

[data]
source = synthetic
kind = two_sine
n_per_class = 12
length = 16
test_fraction = 0.25

[target_model]
family = rescnn
widths = [8, 16]
kernel_sizes = [5, 3]
epochs = 3
batch_size = 8

[discriminator]
epochs = 3
finetune_epochs = 1
max_rounds = 1

[attack]
kind = ifgsm
iterations = 3

[metrics]
disable_floors = true

[output]
workers = 1
plots = false
"""


@pytest.fixture(scope="module")
def smoke_cfg():
    return load_config(SMOKE)


@pytest.fixture(scope="module")
def smoke_run(smoke_cfg, tmp_path_factory):
    out = tmp_path_factory.mktemp("smoke")
    return run_pipeline(smoke_cfg, out), out


class TestConfig:
    def test_values_parsed_as_yaml(self):
        cfg = parse_config_text(GRID_TEXT)
        assert cfg.grid["eps"] == [0.005, 0.01, 0.03, 0.05]
        assert cfg.attack.gamma == 1e-8
        assert cfg.seed == 4

    def test_sum_normalization_switch(self):
        assert parse_config_text(GRID_TEXT).attack.attack_config().aggregation.normalize_gradients
        cfg = parse_config_text("[attack]\naggregation = sum\nnormalize_gradients = false\n")
        assert cfg.attack.attack_config().aggregation.normalize_gradients is False

    def test_hash_ignores_key_order(self):
        reordered = """
[grid]
alpha = [0.001, 0.01, 0.1, 1, 10, 100]
eps = [0.005, 0.01, 0.03, 0.05]

[attack]
aggregation = sum
kind = ifgsm

[experiment]
seed = 4
name = grid-test
"""
        assert parse_config_text(GRID_TEXT).config_hash() == parse_config_text(reordered).config_hash()
        assert parse_config_text(GRID_TEXT).config_hash() != parse_config_text(GRID_TEXT.replace("seed = 4", "seed = 5")).config_hash()

    @pytest.mark.parametrize("text", [
        "[nonsense]\nx = 1\n",
        "[attack]\nkind = simba\naggregation = hypercone\n",
        "[grid]\neps = []\n",
        "[grid]\nlearning_rate = [0.1]\n",
        "[attack]\neps = -1\n",
        "[data]\nsource = ucr\n",
    ])
    def test_invalid(self, text):
        with pytest.raises(ConfigError):
            parse_config_text(text)

    def test_missing_file_names_path(self, tmp_path):
        missing = tmp_path / "nope.cfg"
        with pytest.raises(ConfigError, match="nope.cfg"):
            load_config(missing)

    def test_output_root_env(self, monkeypatch, tmp_path, smoke_cfg):
        from app.config import resolve_output_dir
        monkeypatch.setenv("CONCEAL_OUTPUT_ROOT", str(tmp_path))
        assert resolve_output_dir(smoke_cfg) == tmp_path / "runs" / "smoke"
        assert resolve_output_dir(smoke_cfg, tmp_path / "x") == tmp_path / "x"


class TestSeeds:
    def test_deterministic_and_decorrelated(self):
        assert derive_seed(0, 1) == derive_seed(0, 1)
        seeds = {combination_seed(0, i) for i in range(50)}
        assert len(seeds) == 50
        assert stage_seed(0, "target") != stage_seed(1, "target")


class TestGrid:
    def test_cartesian_product(self):
        combinations = expand_grid(parse_config_text(GRID_TEXT))
        assert len(combinations) == 24
        assert [c.index for c in combinations] == list(range(24))
        assert {(c.attack.eps, c.attack.aggregation.alpha) for c in combinations} == {
            (e, a) for e in [0.005, 0.01, 0.03, 0.05] for a in [0.001, 0.01, 0.1, 1, 10, 100]
        }
        assert len({c.attack.seed for c in combinations}) == 24

    def test_empty_grid_is_the_attack_section(self, smoke_cfg):
        (combination,) = expand_grid(smoke_cfg)
        assert combination.params == {}
        assert combination.attack.eps == 0.03 and combination.attack.iterations == 10

    def test_sgm_coef_sets_both_penalties(self):
        cfg = parse_config_text("[attack]\nkind = sgm\n\n[grid]\nsgm_coef = [0.1, 1]\n")
        assert [(c.attack.sgm_l2, c.attack.sgm_smooth) for c in expand_grid(cfg)] == [(0.1, 0.1), (1, 1)]

    def test_invalid_combination(self):
        cfg = parse_config_text("[attack]\naggregation = hypercone\n\n[grid]\nkind = [ifgsm, simba]\n")
        with pytest.raises(ConfigError):
            expand_grid(cfg)

    def test_ignored_keys_do_not_repeat_runs(self):
        cfg = parse_config_text("[attack]\nkind = ifgsm\n\n[grid]\naggregation = [none, sum, harmonic]\n"
                                "eps = [0.01, 0.03]\nalpha = [0.1, 1, 10]\n")
        combinations = expand_grid(cfg)
        assert [c.index for c in combinations] == list(range(10))
        kinds = [c.attack.aggregation.kind.value for c in combinations]
        assert {k: kinds.count(k) for k in set(kinds)} == {"none": 2, "sum": 6, "harmonic": 2}
        for combination in combinations:
            assert ("alpha" in combination.params) == (combination.params["aggregation"] == "sum")
        assert len({c.attack.seed for c in combinations}) == 10


def polyline_lengths(path):
    tree = ET.parse(path)
    lengths = []
    for element in tree.iter():
        if element.tag.endswith("path") and "d" in element.attrib:
            lengths.append(len(re.findall(r"[ML]", element.attrib["d"])))
    return lengths


class TestPlots:
    def test_truncated_overlay(self, tmp_path):
        t = np.linspace(0, 6, 120)
        path = emit_plot(np.sin(t), np.sin(t) + 0.1, tmp_path / "overlay.svg", truncate=50)
        assert polyline_lengths(path).count(50) == 2

    def test_identical_series(self, tmp_path):
        x = np.cos(np.linspace(0, 3, 40))
        path = emit_plot(x, x, tmp_path / "same.svg")
        assert polyline_lengths(path).count(40) == 2

    def test_length_mismatch(self, tmp_path):
        with pytest.raises(ValueError):
            emit_plot(np.zeros(5), np.zeros(6), tmp_path / "bad.svg")

    def test_unwritable_path(self, tmp_path):
        with pytest.raises(OSError):
            emit_plot(np.zeros(5), np.zeros(5), tmp_path / "missing" / "dir" / "plot.svg")


class TestPipeline:
    def test_smoke_outputs(self, smoke_run):
        record, out = smoke_run
        frame = pd.read_csv(out / "results.csv")
        assert len(frame) == 10
        assert list(frame["iteration"]) == list(range(1, 11))
        for name in ("summary.json", "timing.json", "target.json", "disc_ifgsm.json", "test_original.tsv"):
            assert (out / name).exists()
        assert not (out / "INCOMPLETE").exists()
        assert record.complete and len(record.combinations) == 1

    def test_summary_recomputable_from_csv(self, smoke_run):
        _, out = smoke_run
        frame = pd.read_csv(out / "results.csv", float_precision="round_trip")
        summary = json.loads((out / "summary.json").read_text())
        for row in summary["combinations"]:
            rows = frame[frame["combination"] == row["combination"]]
            selected = rows[rows["iteration"] == row["selected_iteration"]].iloc[0]
            assert selected["E"] == row["E"] and selected["C"] == row["C"]
            assert row["S"] == successfulness(row["C"], row["E"])
            assert row["S"] == rows["S"].max()

    def test_byte_identical_rerun(self, smoke_cfg, smoke_run, tmp_path):
        _, first = smoke_run
        run_pipeline(smoke_cfg, tmp_path)
        for name in ("results.csv", "summary.json"):
            assert (tmp_path / name).read_bytes() == (first / name).read_bytes()

    def test_single_point_grid_matches_pipeline(self, smoke_cfg, smoke_run, tmp_path):
        _, first = smoke_run
        cfg = smoke_cfg.model_copy(update={"grid": {"eps": [0.03]}})
        rows = grid_search(cfg, tmp_path)
        assert len(rows) == 1
        a = pd.read_csv(first / "results.csv")[["iteration", "E", "C", "S"]]
        b = pd.read_csv(tmp_path / "results.csv")[["iteration", "E", "C", "S"]]
        pd.testing.assert_frame_equal(a, b)

    def test_stage_error(self, tmp_path):
        cfg = parse_config_text(f"[data]\nsource = ucr\ntrain_path = {tmp_path / 'absent_TRAIN.tsv'}\n"
                                f"test_path = {tmp_path / 'absent_TEST.tsv'}\n")
        with pytest.raises(PipelineStageError) as info:
            run_pipeline(cfg, tmp_path / "run")
        assert info.value.stage == "data"
        assert (tmp_path / "run" / "INCOMPLETE").read_text().strip() == "data"

    def test_discriminator_inherits_target_kernels(self):
        cfg = parse_config_text(TWO_BLOCK_TEXT)
        target = cfg.target_model.model_spec(n_classes=2, input_length=16)
        spec = discriminator_spec(cfg, target)
        assert tuple(spec.widths) == (8, 16) and tuple(spec.kernel_sizes) == (5, 3)
        narrow = cfg.model_copy(update={"discriminator": cfg.discriminator.model_copy(update={"widths": (8,)})})
        assert tuple(discriminator_spec(narrow, target).kernel_sizes) == (3,)

    def test_two_block_residual_target(self, tmp_path):
        record = run_pipeline(parse_config_text(TWO_BLOCK_TEXT), tmp_path)
        assert record.complete
        params = json.loads((tmp_path / "disc_ifgsm.json").read_text())
        assert params["conv0.weight"]["shape"] == [5, 1, 8]
        assert params["conv1.weight"]["shape"] == [3, 8, 16]
        assert "conv2.weight" not in params


class TestCli:
    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit) as info:
            main(["explode"])
        assert info.value.code == 2

    def test_missing_config(self, tmp_path, capsys):
        missing = tmp_path / "absent.cfg"
        assert main(["grid", "--config", str(missing)]) == 1
        assert str(missing) in capsys.readouterr().err

    def test_attack_evaluate_plot(self, tmp_path):
        out = str(tmp_path / "run")
        assert main(["attack", "--config", SMOKE, "--out", out, "--log-level", "WARNING"]) == 0
        assert main(["evaluate", "--config", SMOKE, "--out", out, "--log-level", "WARNING"]) == 0
        summary = json.loads((tmp_path / "run" / "summary.json").read_text())
        evaluation = json.loads((tmp_path / "run" / "evaluation.json").read_text())
        assert evaluation["combinations"][0]["S"] == summary["combinations"][0]["S"]
        assert main(["plot", "--run", out, "--truncate", "20", "--log-level", "WARNING"]) == 0
        svgs = list((tmp_path / "run").glob("plot_*.svg"))
        assert len(svgs) == 1
        ET.parse(svgs[0])

    def test_seed_override_changes_results(self, tmp_path):
        assert main(["attack", "--config", SMOKE, "--out", str(tmp_path / "a"), "--seed", "7",
                     "--log-level", "WARNING"]) == 0
        summary = json.loads((tmp_path / "a" / "summary.json").read_text())
        assert summary["config"]["experiment"]["seed"] == 7
