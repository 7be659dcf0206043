"""Per-agent mixture models over multimodal count observations.

Each agent clusters objects into categories from its own observations and
carries a sign (a discrete label it can utter) for every object. Two
coupling variants share this structure and differ in where the sign sits in
the agent's generative story:

* "h2h": the category emits the sign. The agent keeps a prior over
  categories and a (num_categories, num_signs) row-stochastic coupling
  matrix whose row c is the sign distribution of category c.
* "t2t": the sign selects the category. The coupling matrix is
  (num_signs, num_categories), row w is the category prior under sign w,
  and there is no separate category prior vector.

Inference inside an agent is conjugate resampling: parameter rows are drawn
from Dirichlet posteriors given the current assignments, and category
assignments are drawn from their exact conditionals given the parameters.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Mapping

import numpy as np

from .stochastic import (
    PROB_FLOOR,
    RngStream,
    as_generator,
    normalize_log_rows,
    sample_categorical_rows,
    sample_dirichlet,
    sample_dirichlet_rows,
)

if TYPE_CHECKING:
    from .datagen import Dataset

MODALITIES = ("v", "s", "h")

VARIANT_T2T = "t2t"
VARIANT_H2H = "h2h"
VARIANTS = (VARIANT_T2T, VARIANT_H2H)

# stream ids used below init_agent's base stream
_STREAM_ASSIGN = 0
_STREAM_PARAMS = 1


def _default_emission_concentration() -> dict[str, float]:
    return {m: 0.001 for m in MODALITIES}


@dataclass(frozen=True)
class Hyperparams:
    """Concentrations and sizes shared by both agents of a run."""

    coupling_concentration: float = 0.01
    emission_concentration: Mapping[str, float] = field(
        default_factory=_default_emission_concentration
    )
    category_concentration: float = 0.01
    num_categories: int = 15
    num_signs: int = 15

    def __post_init__(self):
        if self.coupling_concentration <= 0 or self.category_concentration <= 0:
            raise ValueError("concentrations must be positive")
        for m, b in self.emission_concentration.items():
            if m not in MODALITIES:
                raise ValueError(f"unknown modality {m!r}")
            if b <= 0:
                raise ValueError(f"emission concentration for {m!r} must be positive")
        if self.num_categories < 1 or self.num_signs < 1:
            raise ValueError("num_categories and num_signs must be at least 1")


@dataclass(frozen=True)
class ModalityMask:
    """The subset of modalities an agent can observe."""

    present: frozenset

    def __post_init__(self):
        if not self.present:
            raise ValueError("a modality mask cannot be empty")
        unknown = set(self.present) - set(MODALITIES)
        if unknown:
            raise ValueError(f"unknown modalities {sorted(unknown)!r}")

    @classmethod
    def of(cls, *names: str) -> "ModalityMask":
        return cls(frozenset(names))

    @property
    def ordered(self) -> tuple:
        # canonical order so that float accumulation is reproducible
        return tuple(m for m in MODALITIES if m in self.present)

    def __contains__(self, name: str) -> bool:
        return name in self.present


@dataclass
class AgentModel:
    """Mutable inference state of one agent."""

    name: str
    variant: str
    hyper: Hyperparams
    mask: ModalityMask
    coupling: np.ndarray
    emissions: dict
    categories: np.ndarray
    signs: np.ndarray
    category_weights: np.ndarray | None = None

    @property
    def num_objects(self) -> int:
        return self.categories.size


def init_agent(
    variant: str,
    hyper: Hyperparams,
    dataset: "Dataset",
    agent_id: str,
    rng: RngStream,
) -> AgentModel:
    """Build an agent with uniform random assignments and posterior-drawn parameters."""
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if agent_id not in dataset.observations:
        raise ValueError(f"dataset has no observations for agent {agent_id!r}")
    mask = dataset.masks[agent_id]
    for m in mask.ordered:
        if m not in dataset.observations[agent_id]:
            raise ValueError(f"agent {agent_id!r} is masked to {m!r} but the dataset lacks it")

    d = dataset.num_objects
    gen = rng.derive(_STREAM_ASSIGN).generator()
    agent = AgentModel(
        name=agent_id,
        variant=variant,
        hyper=hyper,
        mask=mask,
        coupling=np.empty(0),
        emissions={},
        categories=gen.integers(0, hyper.num_categories, size=d),
        signs=gen.integers(0, hyper.num_signs, size=d),
    )
    update_parameters(agent, dataset, rng.derive(_STREAM_PARAMS))
    return agent


def posterior_concentrations(agent: AgentModel, dataset: "Dataset") -> dict:
    """Dirichlet parameters of every conditional posterior, given assignments.

    Exposed separately from update_parameters so the count bookkeeping can
    be checked exactly.
    """
    hyper = agent.hyper
    k, l = hyper.num_categories, hyper.num_signs
    c, w = agent.categories, agent.signs
    out = {}
    if agent.variant == VARIANT_H2H:
        out["category_weights"] = hyper.category_concentration + np.bincount(c, minlength=k)
        joint = np.bincount(c * l + w, minlength=k * l).reshape(k, l)
        out["coupling"] = hyper.coupling_concentration + joint
    else:
        joint = np.bincount(w * k + c, minlength=l * k).reshape(l, k)
        out["coupling"] = hyper.coupling_concentration + joint
    for m in agent.mask.ordered:
        obs = dataset.observations[agent.name][m]
        sums = np.zeros((k, obs.shape[1]))
        np.add.at(sums, c, obs)
        out[f"emissions.{m}"] = hyper.emission_concentration[m] + sums
    return out


def update_parameters(agent: AgentModel, dataset: "Dataset", rng) -> None:
    """Resample all parameter fields from their conditional posteriors."""
    gen = as_generator(rng)
    conc = posterior_concentrations(agent, dataset)
    if agent.variant == VARIANT_H2H:
        agent.category_weights = sample_dirichlet(conc["category_weights"], gen)
    agent.coupling = sample_dirichlet_rows(conc["coupling"], gen)
    for m in agent.mask.ordered:
        agent.emissions[m] = sample_dirichlet_rows(conc[f"emissions.{m}"], gen)


def observation_log_likelihood(agent: AgentModel, dataset: "Dataset") -> np.ndarray:
    """(num_objects, num_categories) log-likelihood of each object's counts.

    Multinomial coefficients are omitted; they are constant across
    categories for a fixed object.
    """
    ll = np.zeros((dataset.num_objects, agent.hyper.num_categories))
    for m in agent.mask.ordered:
        obs = dataset.observations[agent.name][m]
        ll += obs @ np.log(np.maximum(agent.emissions[m], PROB_FLOOR)).T
    return ll


def sample_categories_h2h(agent: AgentModel, dataset: "Dataset", rng) -> np.ndarray:
    """Redraw every category assignment from its exact h2h conditional.

    Weights combine the category prior, the observation likelihood of each
    modality, and the probability that the category emits the object's
    current sign.
    """
    if agent.variant != VARIANT_H2H:
        raise ValueError(f"agent {agent.name!r} is {agent.variant!r}, not h2h")
    logw = observation_log_likelihood(agent, dataset)
    logw += np.log(np.maximum(agent.category_weights, PROB_FLOOR))[None, :]
    logw += np.log(np.maximum(agent.coupling, PROB_FLOOR))[:, agent.signs].T
    agent.categories = sample_categorical_rows(normalize_log_rows(logw), rng)
    return agent.categories


def sample_categories_t2t(agent: AgentModel, dataset: "Dataset", rng) -> np.ndarray:
    """Redraw every category assignment from its exact t2t conditional.

    The object's current sign selects a prior row over categories, which is
    combined with the observation likelihood of each modality.
    """
    if agent.variant != VARIANT_T2T:
        raise ValueError(f"agent {agent.name!r} is {agent.variant!r}, not t2t")
    logw = observation_log_likelihood(agent, dataset)
    logw += np.log(np.maximum(agent.coupling, PROB_FLOOR))[agent.signs]
    agent.categories = sample_categorical_rows(normalize_log_rows(logw), rng)
    return agent.categories


def sample_categories(agent: AgentModel, dataset: "Dataset", rng) -> np.ndarray:
    if agent.variant == VARIANT_H2H:
        return sample_categories_h2h(agent, dataset, rng)
    return sample_categories_t2t(agent, dataset, rng)


def sign_distribution(agent: AgentModel, d: int) -> np.ndarray:
    """The agent's current distribution over signs for object d.

    h2h reads the coupling row of the object's category. t2t inverts the
    coupling under a uniform sign prior, which is a normalized column.
    """
    c = agent.categories[d]
    if agent.variant == VARIANT_H2H:
        return agent.coupling[c]
    col = agent.coupling[:, c]
    return col / col.sum()
