"""Shared helpers for the test suite."""
from __future__ import annotations

from collections import Counter
from fractions import Fraction

import numpy as np

from signgame.agents import (
    AgentModel,
    Hyperparams,
    ModalityMask,
    sample_categories,
    sign_distribution,
    update_parameters,
)
from signgame.stochastic import sample_categorical


def frozen_agent(variant, weights, name="A"):
    """Single-category agent whose sign distribution is pinned to weights."""
    weights = np.asarray(weights, dtype=float)
    coupling = weights[None, :] if variant == "h2h" else weights[:, None]
    return AgentModel(
        name=name,
        variant=variant,
        hyper=Hyperparams(
            num_categories=1, num_signs=weights.size, emission_concentration={"v": 0.001}
        ),
        mask=ModalityMask.of("v"),
        coupling=coupling,
        emissions={"v": np.full((1, 2), 0.5)},
        categories=np.zeros(1, dtype=np.int64),
        signs=np.zeros(1, dtype=np.int64),
        category_weights=np.ones(1) if variant == "h2h" else None,
    )


def tv_distance(p, q):
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def ari_by_pair_enumeration(x, y):
    """O(n^2) oracle: walk every object pair and count co-assignments."""
    x = list(x)
    y = list(y)
    n = len(x)
    same_both = same_x = same_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            in_x = x[i] == x[j]
            in_y = y[i] == y[j]
            same_x += in_x
            same_y += in_y
            same_both += in_x and in_y
    total = n * (n - 1) // 2
    expected = Fraction(same_x * same_y, total)
    maximum = Fraction(same_x + same_y, 2)
    if maximum == expected:
        # only happens when both partitions are all singletons or both are
        # a single block, which are identical groupings
        return 1.0
    return float((same_both - expected) / (maximum - expected))


def kappa_by_frequency_sums(x, y, num_signs):
    """Dict-based oracle for the chance-corrected coincidence rate."""
    x = list(x)
    y = list(y)
    n = len(x)
    observed = sum(a == b for a, b in zip(x, y)) / n
    count_x = Counter(x)
    count_y = Counter(y)
    expected = sum(count_x[w] * count_y[w] / (n * n) for w in range(num_signs))
    if expected == 1.0:
        return 1.0 if observed == 1.0 else 0.0
    return (observed - expected) / (1.0 - expected)


def solo_gibbs_fit(agent, dataset, iterations, rng):
    """Independent per-agent Gibbs sweep: parameters, categories, own signs.

    This is the no-communication oracle: the agent explains its own data
    and keeps its sign copies consistent with its own model only.
    """
    for it in range(iterations):
        step = rng.derive(it)
        update_parameters(agent, dataset, step.derive(0))
        sample_categories(agent, dataset, step.derive(1))
        gen = step.derive(2).generator()
        for d in range(dataset.num_objects):
            agent.signs[d] = sample_categorical(sign_distribution(agent, d), gen)
    return agent
