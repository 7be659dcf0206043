"""Synthetic multimodal observations for two agents looking at shared objects.

Objects come in types. Each type owns one emission distribution per modality,
drawn once from a sparse Dirichlet, and every object of the type is a fresh
multinomial histogram from that emission. Both agents observe the same
underlying objects but only through their own modality masks, and their
histograms are independent draws.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .agents import MODALITIES, Hyperparams, ModalityMask
from .stochastic import RngStream, sample_dirichlet_rows

AGENT_NAMES = ("A", "B")

# stream ids used below generate_dataset's base stream
_STREAM_EMISSIONS = 0
_STREAM_OBSERVATIONS = 1


@dataclass(frozen=True)
class SyntheticConfig:
    num_types: int = 15
    objects_per_type: int = 10
    feature_dim: int = 20
    draws_per_modality: int = 20
    modalities: tuple = MODALITIES
    hyper: Hyperparams = field(default_factory=Hyperparams)

    def __post_init__(self):
        if self.num_types < 1 or self.objects_per_type < 1:
            raise ValueError("num_types and objects_per_type must be at least 1")
        if self.feature_dim < 2:
            raise ValueError("feature_dim must be at least 2")
        if self.draws_per_modality < 1:
            raise ValueError("draws_per_modality must be at least 1")
        if not self.modalities or set(self.modalities) - set(MODALITIES):
            raise ValueError(f"modalities must be a non-empty subset of {MODALITIES}")

    @property
    def num_objects(self) -> int:
        return self.num_types * self.objects_per_type


@dataclass
class Dataset:
    """Observations for both agents plus the generating ground truth."""

    true_type: np.ndarray
    observations: dict
    masks: dict
    config: SyntheticConfig
    # per-modality (num_types, feature_dim) generating emissions; kept for
    # diagnostics and tests, never serialized
    true_emissions: dict | None = None

    @property
    def num_objects(self) -> int:
        return self.true_type.size


def generate_dataset(
    config: SyntheticConfig,
    mask_a: ModalityMask,
    mask_b: ModalityMask,
    rng: RngStream,
) -> Dataset:
    """Draw a fresh dataset; masked modalities are never materialized."""
    for mask in (mask_a, mask_b):
        missing = set(mask.present) - set(config.modalities)
        if missing:
            raise ValueError(f"mask requests modalities {sorted(missing)!r} not in the config")

    ordered = tuple(m for m in MODALITIES if m in config.modalities)
    true_emissions = {}
    for mi, m in enumerate(ordered):
        conc = np.full(
            (config.num_types, config.feature_dim), config.hyper.emission_concentration[m]
        )
        true_emissions[m] = sample_dirichlet_rows(conc, rng.derive(_STREAM_EMISSIONS, mi))

    true_type = np.repeat(np.arange(config.num_types), config.objects_per_type)
    masks = dict(zip(AGENT_NAMES, (mask_a, mask_b)))
    observations = {}
    for ai, name in enumerate(AGENT_NAMES):
        per_agent = {}
        for mi, m in enumerate(ordered):
            if m not in masks[name]:
                continue
            gen = rng.derive(_STREAM_OBSERVATIONS, ai, mi).generator()
            per_agent[m] = gen.multinomial(
                config.draws_per_modality, true_emissions[m][true_type]
            )
        observations[name] = per_agent

    return Dataset(
        true_type=true_type,
        observations=observations,
        masks=masks,
        config=config,
        true_emissions=true_emissions,
    )


def dataset_to_json(dataset: Dataset) -> str:
    """Serialize everything except the generating emissions, stable key order."""
    config = dataset.config
    payload = {
        "true_type": dataset.true_type.tolist(),
        "observations": {
            name: {m: obs.tolist() for m, obs in sorted(per_agent.items())}
            for name, per_agent in sorted(dataset.observations.items())
        },
        "mask": {name: list(mask.ordered) for name, mask in sorted(dataset.masks.items())},
        "config": {
            "num_types": config.num_types,
            "objects_per_type": config.objects_per_type,
            "feature_dim": config.feature_dim,
            "draws_per_modality": config.draws_per_modality,
            "modalities": list(config.modalities),
            "hyperparams": {
                "coupling_concentration": config.hyper.coupling_concentration,
                "emission_concentration": dict(
                    sorted(config.hyper.emission_concentration.items())
                ),
                "category_concentration": config.hyper.category_concentration,
                "num_categories": config.hyper.num_categories,
                "num_signs": config.hyper.num_signs,
            },
        },
    }
    return json.dumps(payload)


def dataset_from_json(text: str) -> Dataset:
    payload = json.loads(text)
    raw_cfg = payload["config"]
    raw_hyper = raw_cfg["hyperparams"]
    hyper = Hyperparams(
        coupling_concentration=raw_hyper["coupling_concentration"],
        emission_concentration=dict(raw_hyper["emission_concentration"]),
        category_concentration=raw_hyper["category_concentration"],
        num_categories=raw_hyper["num_categories"],
        num_signs=raw_hyper["num_signs"],
    )
    config = SyntheticConfig(
        num_types=raw_cfg["num_types"],
        objects_per_type=raw_cfg["objects_per_type"],
        feature_dim=raw_cfg["feature_dim"],
        draws_per_modality=raw_cfg["draws_per_modality"],
        modalities=tuple(raw_cfg["modalities"]),
        hyper=hyper,
    )
    observations = {
        name: {m: np.asarray(obs, dtype=np.int64) for m, obs in per_agent.items()}
        for name, per_agent in payload["observations"].items()
    }
    masks = {name: ModalityMask.of(*names) for name, names in payload["mask"].items()}
    return Dataset(
        true_type=np.asarray(payload["true_type"], dtype=np.int64),
        observations=observations,
        masks=masks,
        config=config,
    )
