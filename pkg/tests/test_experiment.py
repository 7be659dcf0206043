"""Tests for the grid runner, CSV reports, config parsing, and the CLI."""
from __future__ import annotations

import json
import subprocess

import pytest

from signgame.agents import Hyperparams, ModalityMask
from signgame.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, main
from signgame.datagen import SyntheticConfig
from signgame.experiment import (
    CONDITION_MASKS,
    REFERENCE_RESULTS,
    ConfigError,
    ExperimentConfig,
    compare_to_reference,
    full_grid_configs,
    parse_config,
    read_summary,
    run_cell,
    run_experiment,
)

SMALL_HYPER = Hyperparams(num_categories=4, num_signs=4)
SMALL_SYNTH = SyntheticConfig(
    num_types=4, objects_per_type=5, feature_dim=8, draws_per_modality=10, hyper=SMALL_HYPER
)


def small_config(**overrides):
    base = dict(
        variant="h2h",
        method="mh",
        condition=1,
        trials=2,
        iterations=3,
        seed=0,
        hyper=SMALL_HYPER,
        synthetic=SMALL_SYNTH,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


SMALL_FILE_BLOCKS = {
    "hyperparams": {"num_categories": 4, "num_signs": 4},
    "synthetic": {"num_types": 4, "objects_per_type": 5, "feature_dim": 8, "draws_per_modality": 10},
}


def test_parse_config_defaults():
    cfg = parse_config()
    assert (cfg.variant, cfg.method, cfg.condition) == ("h2h", "mh", 1)
    assert (cfg.trials, cfg.iterations, cfg.seed, cfg.jobs) == (10, 300, 0, 1)
    assert cfg.hyper == Hyperparams()


def test_parse_config_flags_override_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"trials": 3, "seed": 5, "variant": "t2t"}))
    cfg = parse_config({"trials": 7, "method": None}, path)
    assert cfg.trials == 7
    assert cfg.seed == 5
    assert cfg.variant == "t2t"
    assert cfg.method == "mh"


def test_parse_config_reads_nested_blocks(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(SMALL_FILE_BLOCKS))
    cfg = parse_config(None, path)
    assert cfg.hyper.num_categories == 4
    assert cfg.synthetic.num_types == 4
    assert cfg.synthetic.hyper is cfg.hyper


@pytest.mark.parametrize(
    "payload, needle",
    [
        ({"trails": 3}, "trails"),
        ({"condition": 5}, "condition"),
        ({"trials": "many"}, "trials"),
        ({"hyperparams": {"bogus": 1}}, "bogus"),
        ({"synthetic": {"shape": 2}}, "shape"),
    ],
)
def test_parse_config_names_the_offending_key(tmp_path, payload, needle):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(payload))
    with pytest.raises(ConfigError, match=needle):
        parse_config(None, path)


def test_parse_config_rejects_missing_or_malformed_files(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        parse_config(None, tmp_path / "absent.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="JSON"):
        parse_config(None, bad)
    listy = tmp_path / "list.json"
    listy.write_text("[1, 2]")
    with pytest.raises(ConfigError, match="object"):
        parse_config(None, listy)


def test_condition_masks_are_the_published_grid():
    vsh = ModalityMask.of("v", "s", "h")
    assert CONDITION_MASKS == {
        1: (vsh, vsh),
        2: (vsh, ModalityMask.of("v", "s")),
        3: (vsh, ModalityMask.of("v")),
        4: (ModalityMask.of("v", "s"), ModalityMask.of("h")),
    }


def test_run_cell_row_layout():
    detail, summary = run_cell(small_config())
    assert len(detail) == 2 * 3
    assert [(row[3], row[4]) for row in detail] == [(t, i) for t in range(2) for i in range(3)]
    assert all(row[:3] == ("h2h", "mh", 1) for row in detail)
    assert all(isinstance(row[5], float) and isinstance(row[6], float) for row in detail)
    assert summary["ari_a_sd"] >= 0.0
    assert summary["kappa_mean"] is not None


def test_run_cell_gibbs_leaves_kappa_blank(tmp_path):
    cfg = small_config(method="gibbs")
    summary = run_experiment(cfg, tmp_path)
    assert summary["kappa_mean"] is None
    assert summary["kappa_sd"] is None
    lines = (tmp_path / "detail.csv").read_text().splitlines()
    assert lines[0] == "variant,method,condition,trial,iteration,ari_a,ari_b,kappa"
    assert all(line.endswith(",") for line in lines[1:])
    rows = read_summary(tmp_path / "summary.csv")
    assert rows[0]["kappa_mean"] is None


def test_reports_are_byte_identical_and_lf_terminated(tmp_path):
    cfg = small_config()
    run_experiment(cfg, tmp_path / "one")
    run_experiment(cfg, tmp_path / "two")
    for name in ("detail.csv", "summary.csv"):
        first = (tmp_path / "one" / name).read_bytes()
        second = (tmp_path / "two" / name).read_bytes()
        assert first == second
        assert b"\r" not in first
    # numeric fields carry six significant digits
    row = (tmp_path / "one" / "detail.csv").read_text().splitlines()[1]
    for field in row.split(",")[5:7]:
        assert field == format(float(field), ".6g")


def test_read_summary_round_trips_values(tmp_path):
    cfg = small_config(method="reject")
    summary = run_experiment(cfg, tmp_path)
    row = read_summary(tmp_path / "summary.csv")[0]
    assert (row["variant"], row["method"], row["condition"]) == ("h2h", "reject", 1)
    for key in ("ari_a_mean", "ari_b_mean", "kappa_mean"):
        assert row[key] == pytest.approx(summary[key], rel=1e-5)


def test_parallel_jobs_match_serial_results():
    serial_detail, serial_summary = run_cell(small_config(iterations=2))
    parallel_detail, parallel_summary = run_cell(small_config(iterations=2, jobs=2))
    assert parallel_detail == serial_detail
    assert parallel_summary == serial_summary


def test_full_grid_configs_enumerate_24_cells():
    cells = full_grid_configs(small_config())
    assert len(cells) == 24
    assert len({(c.variant, c.method, c.condition) for c in cells}) == 24
    assert all(c.trials == 2 and c.seed == 0 for c in cells)
    assert set(REFERENCE_RESULTS) == {(c.variant, c.method, c.condition) for c in cells}


def test_compare_to_reference_table():
    rows = [
        {
            "variant": "h2h",
            "method": "mh",
            "condition": 1,
            "ari_a_mean": 0.87,
            "ari_a_sd": 0.03,
            "ari_b_mean": 0.88,
            "ari_b_sd": 0.03,
            "kappa_mean": 0.99,
            "kappa_sd": 0.01,
        },
        {
            "variant": "h2h",
            "method": "gibbs",
            "condition": 1,
            "ari_a_mean": 0.86,
            "ari_a_sd": 0.04,
            "ari_b_mean": 0.86,
            "ari_b_sd": 0.04,
            "kappa_mean": None,
            "kappa_sd": None,
        },
    ]
    table = compare_to_reference(rows)
    assert "| h2h | mh | 1 |" in table
    assert "0.881" in table  # published counterpart shows up next to the measurement
    assert "--" in table  # joint-draw rows have no agreement column
    assert "almost perfect" in table  # strong agreement is annotated with its band

    empty = compare_to_reference([dict(rows[0], variant="out_of_grid")])
    assert "No grid cells" in empty


def test_cli_run_compare_and_exit_codes(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({**SMALL_FILE_BLOCKS, "trials": 1, "iterations": 2}))
    out = tmp_path / "out"

    code = main(
        ["run", "--variant", "t2t", "--method", "mh", "--condition", "2",
         "--seed", "3", "--config", str(cfg_path), "--out", str(out)]
    )
    assert code == EXIT_OK
    assert (out / "detail.csv").exists() and (out / "summary.csv").exists()
    assert "t2t mh condition 2" in capsys.readouterr().out

    assert main(["compare", "--in", str(out)]) == EXIT_OK
    assert "| t2t | mh | 2 |" in capsys.readouterr().out

    assert main(["run", "--config", str(tmp_path / "nope.json"), "--out", str(out)]) == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"condition": 9}))
    assert main(["run", "--config", str(bad), "--out", str(out)]) == EXIT_CONFIG
    capsys.readouterr()

    blocker = tmp_path / "blocker"
    blocker.write_text("plain file")
    assert (
        main(["run", "--config", str(cfg_path), "--out", str(blocker / "sub")]) == EXIT_IO
    )
    assert main(["compare", "--in", str(tmp_path / "missing")]) == EXIT_IO
    capsys.readouterr()


def test_console_script_smoke(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({**SMALL_FILE_BLOCKS, "trials": 1, "iterations": 2}))
    out = tmp_path / "out"
    proc = subprocess.run(
        ["signgame", "run", "--method", "gibbs", "--config", str(cfg_path), "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "kappa --" in proc.stdout
    assert (out / "summary.csv").exists()
