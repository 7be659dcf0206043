"""Sign exchange between two agents over a shared set of objects.

One iteration interleaves per-agent inference with communication: each agent
refreshes its parameters and categories, then utters a proposed sign for
every object while the other agent accepts or rejects it. Acceptance follows
the Metropolis rule, with the listener scoring the proposal only through its
own model, so neither agent ever reads the other's internals.

Modes:

* MH: the listener accepts with probability min(1, a), where a is the
  listener's probability ratio of the proposed sign to its current one.
* ALL_REJECTION: the listener never accepts, so the speaking phase changes
  no sign state at all and each agent ends up doing isolated inference
  against its own randomly initialized signs.
* GIBBS_TOPLINE: no utterances; both agents' signs are drawn jointly from
  the product of their sign distributions. This needs access to both models
  at once and serves as the centralized reference the exchange protocols
  are measured against.

Proposals are ephemeral in both exchange modes: a speaker never overwrites
its own stored sign while speaking. Keeping the listener's comparator equal
to its last accepted value is what makes each direction an independence
Metropolis chain whose stationary law, for frozen parameters, is the
normalized elementwise product of the two agents' sign distributions.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .agents import (
    VARIANT_H2H,
    VARIANTS,
    AgentModel,
    Hyperparams,
    init_agent,
    sample_categories,
    sign_distribution,
    update_parameters,
)
from .datagen import Dataset
from .metrics import MetricsRecord, adjusted_rand_index, kappa
from .stochastic import PROB_FLOOR, RngStream, as_generator, normalize_log_weights


class CommunicationMode(enum.Enum):
    MH = "mh"
    ALL_REJECTION = "reject"
    GIBBS_TOPLINE = "gibbs"


@dataclass(frozen=True)
class Utterance:
    object_id: int
    sign: int


@dataclass
class GameState:
    variant: str
    mode: CommunicationMode
    agent_a: AgentModel
    agent_b: AgentModel
    iteration: int = 0


class InferenceError(RuntimeError):
    """Internal sampling reached an impossible state."""


# first-level stream ids under a game's base stream
_STREAM_INIT = 0
_STREAM_ITERATION = 1

# phase ids within one iteration
_PHASE_PARAMS = 0
_PHASE_CATEGORIES = 1
_PHASE_SPEAK = 2
_PHASE_JOINT = 3

# agent slots for stream derivation
_SLOT = {"A": 0, "B": 1}
_SLOT_JOINT = 2


def acceptance_ratio_h2h(listener: AgentModel, d: int, sign_new: int, sign_old: int) -> float:
    """Listener-side ratio: how much more readily its category emits the new sign."""
    row = listener.coupling[listener.categories[d]]
    log_a = np.log(max(row[sign_new], PROB_FLOOR)) - np.log(max(row[sign_old], PROB_FLOOR))
    return float(np.exp(log_a))


def acceptance_ratio_t2t(listener: AgentModel, d: int, sign_new: int, sign_old: int) -> float:
    """Listener-side ratio: how much better the new sign predicts its category."""
    col = listener.coupling[:, listener.categories[d]]
    log_a = np.log(max(col[sign_new], PROB_FLOOR)) - np.log(max(col[sign_old], PROB_FLOOR))
    return float(np.exp(log_a))


def _draw_sign(probs: np.ndarray, gen: np.random.Generator) -> int:
    # lean inverse-cdf draw; probs comes normalized from the model
    cum = np.cumsum(probs)
    idx = int(np.searchsorted(cum, gen.random() * cum[-1], side="right"))
    return min(idx, probs.size - 1)


def mh_exchange(
    speaker: AgentModel, listener: AgentModel, d: int, rng
) -> tuple[Utterance, bool]:
    """One utterance about object d with Metropolis acceptance.

    The speaker draws a proposal from its own sign distribution; the
    listener adopts it with probability min(1, a) against its current sign.
    The speaker's stored sign is untouched, so the proposal distribution
    never depends on earlier outcomes of the same speaking phase.
    """
    gen = as_generator(rng)
    proposed = _draw_sign(sign_distribution(speaker, d), gen)
    current = int(listener.signs[d])
    if listener.variant == VARIANT_H2H:
        a = acceptance_ratio_h2h(listener, d, proposed, current)
    else:
        a = acceptance_ratio_t2t(listener, d, proposed, current)
    accepted = bool(gen.random() < min(1.0, a))
    if accepted:
        listener.signs[d] = proposed
    return Utterance(d, proposed), accepted


def rejection_exchange(speaker: AgentModel, listener: AgentModel, d: int, rng) -> Utterance:
    """One utterance that the listener always rejects.

    The proposal is drawn exactly as in mh_exchange (keeping the random
    streams aligned between modes) but no sign state changes anywhere, so
    this mode degenerates to two isolated inference runs.
    """
    gen = as_generator(rng)
    proposed = _draw_sign(sign_distribution(speaker, d), gen)
    return Utterance(d, proposed)


def gibbs_word(agent_a: AgentModel, agent_b: AgentModel, d: int, rng) -> int:
    """Draw one shared sign for object d from the product of both models.

    Centralized topline: requires both agents' couplings simultaneously.
    """
    if agent_a.variant != agent_b.variant:
        raise ValueError("agents disagree on the coupling variant")
    gen = as_generator(rng)
    pa = sign_distribution(agent_a, d)
    pb = sign_distribution(agent_b, d)
    logw = np.log(np.maximum(pa, PROB_FLOOR)) + np.log(np.maximum(pb, PROB_FLOOR))
    sign = _draw_sign(normalize_log_weights(logw), gen)
    agent_a.signs[d] = sign
    agent_b.signs[d] = sign
    return sign


def run_iteration(state: GameState, dataset: Dataset, rng: RngStream) -> GameState:
    """Advance the game by one full iteration.

    Order: agent A refreshes parameters and categories, A speaks about every
    object, then agent B does the same. In GIBBS_TOPLINE the speaking phases
    are replaced by a single joint sign pass at the end.

    Every phase draws from a stream derived from (iteration, agent, phase),
    so one agent's consumption never shifts the other's draws.
    """
    it = state.iteration
    exchanging = state.mode is not CommunicationMode.GIBBS_TOPLINE
    pairs = ((state.agent_a, state.agent_b), (state.agent_b, state.agent_a))
    for speaker, listener in pairs:
        slot = _SLOT[speaker.name]
        update_parameters(
            speaker, dataset, rng.derive(_STREAM_ITERATION, it, slot, _PHASE_PARAMS)
        )
        sample_categories(
            speaker, dataset, rng.derive(_STREAM_ITERATION, it, slot, _PHASE_CATEGORIES)
        )
        if exchanging:
            gen = rng.derive(_STREAM_ITERATION, it, slot, _PHASE_SPEAK).generator()
            if state.mode is CommunicationMode.MH:
                for d in range(dataset.num_objects):
                    mh_exchange(speaker, listener, d, gen)
            else:
                for d in range(dataset.num_objects):
                    rejection_exchange(speaker, listener, d, gen)
    if not exchanging:
        gen = rng.derive(_STREAM_ITERATION, it, _SLOT_JOINT, _PHASE_JOINT).generator()
        for d in range(dataset.num_objects):
            gibbs_word(state.agent_a, state.agent_b, d, gen)
    state.iteration += 1
    return state


def run_game(
    variant: str,
    mode: CommunicationMode,
    hyper: Hyperparams,
    dataset: Dataset,
    iterations: int,
    rng: RngStream,
) -> tuple[GameState, list[MetricsRecord]]:
    """Play a full game and record metrics at the end of every iteration."""
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    mode = CommunicationMode(mode)
    if iterations < 1:
        raise ValueError("iterations must be at least 1")
    agent_a = init_agent(variant, hyper, dataset, "A", rng.derive(_STREAM_INIT, _SLOT["A"]))
    agent_b = init_agent(variant, hyper, dataset, "B", rng.derive(_STREAM_INIT, _SLOT["B"]))
    state = GameState(variant=variant, mode=mode, agent_a=agent_a, agent_b=agent_b)
    records = []
    joint_signs = mode is CommunicationMode.GIBBS_TOPLINE
    for _ in range(iterations):
        run_iteration(state, dataset, rng)
        records.append(
            MetricsRecord(
                iteration=state.iteration - 1,
                ari_a=adjusted_rand_index(agent_a.categories, dataset.true_type),
                ari_b=adjusted_rand_index(agent_b.categories, dataset.true_type),
                kappa=None
                if joint_signs
                else kappa(agent_a.signs, agent_b.signs, hyper.num_signs),
            )
        )
    return state, records
