"""Experiment grid driver: seeded trials, CSV reports, reference comparison.

A cell of the grid is one (variant, method, condition) triple run for a
number of independent trials.  Every trial regenerates its dataset from a
stream derived only from (seed, condition, trial), so the three methods and
both variants of a condition see identical data and identical
initialisation draws.  Method comparisons are therefore paired, which keeps
the variance of mean differences down without biasing any single cell.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

from .agents import Hyperparams, ModalityMask
from .datagen import SyntheticConfig, generate_dataset
from .game import CommunicationMode, run_game
from .metrics import kappa_band, summarize
from .stochastic import RngStream

VARIANT_CHOICES = ("t2t", "h2h")
METHOD_CHOICES = ("mh", "reject", "gibbs")
CONDITION_CHOICES = (1, 2, 3, 4)

# agent A's and agent B's observable modalities per condition
CONDITION_MASKS = {
    1: (ModalityMask.of("v", "s", "h"), ModalityMask.of("v", "s", "h")),
    2: (ModalityMask.of("v", "s", "h"), ModalityMask.of("v", "s")),
    3: (ModalityMask.of("v", "s", "h"), ModalityMask.of("v")),
    4: (ModalityMask.of("v", "s"), ModalityMask.of("h")),
}

DETAIL_HEADER = ("variant", "method", "condition", "trial", "iteration", "ari_a", "ari_b", "kappa")
SUMMARY_HEADER = (
    "variant",
    "method",
    "condition",
    "ari_a_mean",
    "ari_a_sd",
    "ari_b_mean",
    "ari_b_sd",
    "kappa_mean",
    "kappa_sd",
)

# published means and sample deviations per (variant, method, condition);
# kappa is None where the original report leaves the joint sampler blank
REFERENCE_RESULTS = {
    ("t2t", "mh", 1): (0.881, 0.031, 0.886, 0.035, 0.947, 0.046),
    ("t2t", "reject", 1): (0.883, 0.035, 0.886, 0.039, 0.004, 0.019),
    ("t2t", "gibbs", 1): (0.884, 0.033, 0.886, 0.031, None, None),
    ("h2h", "mh", 1): (0.881, 0.031, 0.888, 0.033, 0.999, 0.003),
    ("h2h", "reject", 1): (0.882, 0.037, 0.889, 0.037, 0.004, 0.032),
    ("h2h", "gibbs", 1): (0.881, 0.031, 0.882, 0.042, None, None),
    ("t2t", "mh", 2): (0.888, 0.033, 0.708, 0.009, 0.954, 0.024),
    ("t2t", "reject", 2): (0.878, 0.037, 0.650, 0.025, 0.001, 0.012),
    ("t2t", "gibbs", 2): (0.880, 0.033, 0.706, 0.009, None, None),
    ("h2h", "mh", 2): (0.879, 0.033, 0.704, 0.006, 0.996, 0.011),
    ("h2h", "reject", 2): (0.885, 0.053, 0.649, 0.035, -0.010, 0.022),
    ("h2h", "gibbs", 2): (0.881, 0.047, 0.705, 0.004, None, None),
    ("t2t", "mh", 3): (0.882, 0.055, 0.453, 0.029, 0.931, 0.039),
    ("t2t", "reject", 3): (0.874, 0.037, 0.342, 0.019, -0.011, 0.027),
    ("t2t", "gibbs", 3): (0.880, 0.029, 0.451, 0.035, None, None),
    ("h2h", "mh", 3): (0.883, 0.070, 0.444, 0.016, 1.000, 0.000),
    ("h2h", "reject", 3): (0.876, 0.031, 0.348, 0.018, -0.011, 0.015),
    ("h2h", "gibbs", 3): (0.881, 0.031, 0.447, 0.020, None, None),
    ("t2t", "mh", 4): (0.710, 0.017, 0.460, 0.042, 0.943, 0.043),
    ("t2t", "reject", 4): (0.658, 0.027, 0.348, 0.023, -0.006, 0.023),
    ("t2t", "gibbs", 4): (0.706, 0.015, 0.460, 0.014, None, None),
    ("h2h", "mh", 4): (0.704, 0.010, 0.450, 0.015, 0.992, 0.012),
    ("h2h", "reject", 4): (0.658, 0.024, 0.352, 0.011, 0.004, 0.024),
    ("h2h", "gibbs", 4): (0.705, 0.009, 0.453, 0.023, None, None),
}

_STREAM_DATA = 0
_STREAM_GAME = 1


class ConfigError(ValueError):
    """Raised for unknown keys or out-of-range configuration values."""


@dataclass(frozen=True)
class ExperimentConfig:
    """One grid cell plus the shared sizes, concentrations, and seed."""

    variant: str = "h2h"
    method: str = "mh"
    condition: int = 1
    trials: int = 10
    iterations: int = 300
    seed: int = 0
    jobs: int = 1
    hyper: Hyperparams = field(default_factory=Hyperparams)
    synthetic: SyntheticConfig = field(default_factory=SyntheticConfig)

    def __post_init__(self):
        if self.variant not in VARIANT_CHOICES:
            raise ConfigError(f"variant must be one of {VARIANT_CHOICES}, got {self.variant!r}")
        if self.method not in METHOD_CHOICES:
            raise ConfigError(f"method must be one of {METHOD_CHOICES}, got {self.method!r}")
        if self.condition not in CONDITION_CHOICES:
            raise ConfigError(f"condition must be in {CONDITION_CHOICES}, got {self.condition!r}")
        for key in ("trials", "iterations"):
            if getattr(self, key) < 1:
                raise ConfigError(f"{key} must be at least 1, got {getattr(self, key)!r}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be at least 1, got {self.jobs!r}")


def run_trial(cfg: ExperimentConfig, trial: int) -> list:
    """Play one seeded trial of a cell; returns its per-iteration metrics."""
    trial_rng = RngStream(cfg.seed).derive(cfg.condition, trial)
    mask_a, mask_b = CONDITION_MASKS[cfg.condition]
    dataset = generate_dataset(cfg.synthetic, mask_a, mask_b, trial_rng.derive(_STREAM_DATA))
    _, records = run_game(
        cfg.variant,
        CommunicationMode(cfg.method),
        cfg.hyper,
        dataset,
        cfg.iterations,
        trial_rng.derive(_STREAM_GAME),
    )
    return records


def _trial_worker(payload):
    cfg, trial = payload
    return trial, run_trial(cfg, trial)


def run_cell(cfg: ExperimentConfig) -> tuple[list[tuple], dict]:
    """All trials of one cell: detail rows (trial, iteration order) + summary."""
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            done = dict(pool.map(_trial_worker, [(cfg, t) for t in range(cfg.trials)]))
        per_trial = [done[t] for t in range(cfg.trials)]
    else:
        per_trial = [run_trial(cfg, t) for t in range(cfg.trials)]

    detail = []
    for trial, records in enumerate(per_trial):
        for rec in records:
            detail.append(
                (cfg.variant, cfg.method, cfg.condition, trial, rec.iteration, rec.ari_a, rec.ari_b, rec.kappa)
            )

    final = [records[-1] for records in per_trial]
    ari_a = summarize([rec.ari_a for rec in final])
    ari_b = summarize([rec.ari_b for rec in final])
    if any(rec.kappa is None for rec in final):
        kap = (None, None)
    else:
        kap = summarize([rec.kappa for rec in final])
    summary = {
        "variant": cfg.variant,
        "method": cfg.method,
        "condition": cfg.condition,
        "ari_a_mean": ari_a[0],
        "ari_a_sd": ari_a[1],
        "ari_b_mean": ari_b[0],
        "ari_b_sd": ari_b[1],
        "kappa_mean": kap[0],
        "kappa_sd": kap[1],
    }
    return detail, summary


def _fmt(value) -> str:
    if value is None:
        return ""
    return format(float(value), ".6g")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def write_reports(out_dir: Path, detail_rows, summary_rows) -> tuple[Path, Path]:
    """Write detail.csv and summary.csv under out_dir (created if missing)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    detail_path = out_dir / "detail.csv"
    summary_path = out_dir / "summary.csv"
    _write_csv(
        detail_path,
        DETAIL_HEADER,
        (
            (variant, method, condition, trial, iteration, _fmt(a), _fmt(b), _fmt(k))
            for variant, method, condition, trial, iteration, a, b, k in detail_rows
        ),
    )
    _write_csv(
        summary_path,
        SUMMARY_HEADER,
        ([_fmt(row[key]) if key.startswith(("ari", "kappa")) else row[key] for key in SUMMARY_HEADER] for row in summary_rows),
    )
    return detail_path, summary_path


def run_experiment(cfg: ExperimentConfig, out_dir) -> dict:
    """Run one cell and write its detail/summary CSVs; returns the summary."""
    detail, summary = run_cell(cfg)
    write_reports(Path(out_dir), detail, [summary])
    return summary


def full_grid_configs(cfg: ExperimentConfig) -> list[ExperimentConfig]:
    """The 24 cells of the full grid, in deterministic report order."""
    return [
        replace(cfg, variant=variant, method=method, condition=condition)
        for variant in VARIANT_CHOICES
        for method in METHOD_CHOICES
        for condition in CONDITION_CHOICES
    ]


def run_full_grid(cfg: ExperimentConfig, out_dir, progress=None) -> list[dict]:
    """Run all 24 cells with cfg's sizes and seed; combined CSVs, one
    summary row per cell."""
    detail_rows = []
    summary_rows = []
    for cell_cfg in full_grid_configs(cfg):
        detail, summary = run_cell(cell_cfg)
        detail_rows.extend(detail)
        summary_rows.append(summary)
        if progress is not None:
            progress(summary)
    write_reports(Path(out_dir), detail_rows, summary_rows)
    return summary_rows


def read_summary(path) -> list[dict]:
    """Load a summary.csv back into row dicts (floats, None for blanks)."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for raw in reader:
            row = {
                "variant": raw["variant"],
                "method": raw["method"],
                "condition": int(raw["condition"]),
            }
            for key in SUMMARY_HEADER[3:]:
                row[key] = float(raw[key]) if raw[key] else None
            rows.append(row)
    return rows


def compare_to_reference(summary_rows) -> str:
    """Markdown table of measured vs published means; informational only."""
    lines = [
        "| variant | method | condition | ARI A measured | ARI A published | diff | "
        "ARI B measured | ARI B published | diff | kappa measured | kappa published | diff |",
        "|---|---|---|---|---|---|---|---|---|---|---|---|",
    ]
    count = 0
    for row in summary_rows:
        key = (row["variant"], row["method"], row["condition"])
        reference = REFERENCE_RESULTS.get(key)
        if reference is None:
            continue
        ref_a, ref_a_sd, ref_b, ref_b_sd, ref_k, ref_k_sd = reference
        cells = [row["variant"], row["method"], str(row["condition"])]
        for measured, measured_sd, ref, ref_sd in (
            (row["ari_a_mean"], row["ari_a_sd"], ref_a, ref_a_sd),
            (row["ari_b_mean"], row["ari_b_sd"], ref_b, ref_b_sd),
        ):
            cells += [
                f"{measured:.3f} ({measured_sd:.3f})",
                f"{ref:.3f} ({ref_sd:.3f})",
                f"{abs(measured - ref):.3f}",
            ]
        measured_k = row["kappa_mean"]
        if ref_k is None or measured_k is None:
            cells += ["--" if measured_k is None else f"{measured_k:.3f}", "--", "--"]
        else:
            cells += [
                f"{measured_k:.3f} ({kappa_band(measured_k)})",
                f"{ref_k:.3f} ({ref_k_sd:.3f})",
                f"{abs(measured_k - ref_k):.3f}",
            ]
        lines.append("| " + " | ".join(cells) + " |")
        count += 1
    if count == 0:
        return "No grid cells with published counterparts.\n"
    return "\n".join(lines) + "\n"


_FLAG_KEYS = ("variant", "method", "condition", "trials", "iterations", "seed", "jobs")


def _build_hyper(block: Mapping) -> Hyperparams:
    allowed = {
        "coupling_concentration",
        "emission_concentration",
        "category_concentration",
        "num_categories",
        "num_signs",
    }
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(f"unknown hyperparams key {sorted(unknown)[0]!r}")
    kwargs = dict(block)
    if "emission_concentration" in kwargs:
        kwargs["emission_concentration"] = {
            str(m): float(b) for m, b in kwargs["emission_concentration"].items()
        }
    try:
        return Hyperparams(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _build_synthetic(block: Mapping, hyper: Hyperparams) -> SyntheticConfig:
    allowed = {"num_types", "objects_per_type", "feature_dim", "draws_per_modality"}
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(f"unknown synthetic key {sorted(unknown)[0]!r}")
    try:
        return SyntheticConfig(hyper=hyper, **block)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(flags: Mapping | None = None, config_file=None) -> ExperimentConfig:
    """Merge defaults, an optional JSON file, and flag overrides."""
    merged = {}
    hyper_block = {}
    synthetic_block = {}
    if config_file is not None:
        try:
            text = Path(config_file).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        for key, value in data.items():
            if key in _FLAG_KEYS:
                merged[key] = value
            elif key == "hyperparams":
                hyper_block = dict(value)
            elif key == "synthetic":
                synthetic_block = dict(value)
            else:
                raise ConfigError(f"unknown config key {key!r}")
    if flags:
        for key, value in flags.items():
            if value is None:
                continue
            if key not in _FLAG_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            merged[key] = value
    for key in ("condition", "trials", "iterations", "seed", "jobs"):
        if key in merged:
            try:
                merged[key] = int(merged[key])
            except (TypeError, ValueError):
                raise ConfigError(f"{key} must be an integer, got {merged[key]!r}")
    hyper = _build_hyper(hyper_block)
    synthetic = _build_synthetic(synthetic_block, hyper)
    return ExperimentConfig(hyper=hyper, synthetic=synthetic, **merged)
