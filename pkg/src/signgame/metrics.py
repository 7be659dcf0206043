"""Agreement metrics for categorization and sign sharing.

Both metrics are chance corrected: they compare observed agreement to the
agreement two unrelated labelings of the same shape would show, so 0 means
"no better than chance" and 1 means perfect.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MetricsRecord:
    """Metrics of one iteration; kappa is None when signs are jointly drawn."""

    iteration: int
    ari_a: float
    ari_b: float
    kappa: float | None


def _check_labels(x, name: str) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 1 or x.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-d label vector")
    if np.any(x < 0) or not np.all(x == np.floor(x)):
        raise ValueError(f"{name} must hold nonnegative integer labels")
    return x.astype(np.int64)


def adjusted_rand_index(labels_x, labels_y) -> float:
    """Chance-corrected pairwise agreement of two partitions.

    Computed from the contingency table in integer arithmetic with a single
    final division, so small cases are exact.
    """
    x = _check_labels(labels_x, "labels_x")
    y = _check_labels(labels_y, "labels_y")
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    n = x.size
    kx = int(x.max()) + 1
    ky = int(y.max()) + 1
    contingency = np.bincount(x * ky + y, minlength=kx * ky).reshape(kx, ky)
    a = contingency.sum(axis=1)
    b = contingency.sum(axis=0)

    def pairs(v):
        return int((v * (v - 1) // 2).sum())

    index = pairs(contingency)
    row_pairs = pairs(a)
    col_pairs = pairs(b)
    total_pairs = n * (n - 1) // 2
    # scaled by total_pairs to stay in integers
    numerator = total_pairs * index - row_pairs * col_pairs
    denominator = total_pairs * (row_pairs + col_pairs) - 2 * row_pairs * col_pairs
    if denominator == 0:
        # both partitions all-singletons or all-one-cluster: agreement is
        # perfect iff the groupings coincide
        return 1.0 if np.array_equal(_canonical(x), _canonical(y)) else 0.0
    return (2 * numerator) / denominator


def _canonical(labels: np.ndarray) -> np.ndarray:
    # relabel by first appearance so identical groupings compare equal
    _, canon = np.unique(labels, return_inverse=True)
    order = {}
    out = np.empty_like(canon)
    for i, v in enumerate(canon):
        out[i] = order.setdefault(int(v), len(order))
    return out


def kappa(signs_x, signs_y, num_signs: int) -> float:
    """Chance-corrected per-object sign agreement between two agents.

    Chance agreement is the match probability of independent draws from the
    two agents' empirical sign frequencies.
    """
    x = _check_labels(signs_x, "signs_x")
    y = _check_labels(signs_y, "signs_y")
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    if num_signs < 1 or int(x.max()) >= num_signs or int(y.max()) >= num_signs:
        raise ValueError("labels exceed num_signs")
    n = x.size
    observed = float(np.mean(x == y))
    freq_x = np.bincount(x, minlength=num_signs) / n
    freq_y = np.bincount(y, minlength=num_signs) / n
    expected = float(freq_x @ freq_y)
    if expected == 1.0:
        return 1.0 if observed == 1.0 else 0.0
    return (observed - expected) / (1.0 - expected)


# verbal scale for kappa values, used to annotate comparison reports
KAPPA_BANDS = (
    (0.81, "almost perfect agreement"),
    (0.61, "substantial agreement"),
    (0.41, "moderate agreement"),
    (0.21, "fair agreement"),
    (0.0, "slight agreement"),
)


def kappa_band(value: float) -> str:
    for low, label in KAPPA_BANDS:
        if value >= low:
            return label
    return "no agreement"


def summarize(values) -> tuple[float, float]:
    """Mean and sample standard deviation; the deviation of one value is 0."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("values must be a non-empty 1-d vector")
    mean = float(values.mean())
    sd = float(values.std(ddof=1)) if values.size > 1 else 0.0
    return mean, sd
