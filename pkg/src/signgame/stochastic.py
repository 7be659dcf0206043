"""Low-level sampling primitives and numerically safe log-space helpers.

Everything downstream draws randomness through this module so that a run is
reproducible from a single integer seed. Sub-streams are derived by value
(see RngStream.derive), which keeps trials and agents order-independent.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Probabilities are floored before any log so that log-weights stay finite.
PROB_FLOOR = 1e-300

# Tolerance for "sums to one" checks on probability vectors.
SUM_TOL = 1e-9

_MASK64 = (1 << 64) - 1


class DegenerateDistributionError(ValueError):
    """All probability mass vanished; nothing can be drawn."""


def _splitmix64(x: int) -> int:
    # splitmix64 finalizer; bijective on 64-bit ints.
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


@dataclass(frozen=True)
class RngStream:
    """Value-style handle for a reproducible randomness source.

    Identical (seed, stream) pairs open generators that produce identical
    draw sequences. derive() folds extra ids into the stream id, so
    s.derive(a, b) == s.derive(a).derive(b) and derived streams never
    depend on how much randomness their siblings consumed.
    """

    seed: int
    stream: int = 0

    def derive(self, *ids: int) -> "RngStream":
        s = self.stream
        for v in ids:
            s = _splitmix64(s ^ _splitmix64(v & _MASK64))
        return RngStream(self.seed, s)

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed & _MASK64, spawn_key=(self.stream,))
        return np.random.Generator(np.random.PCG64(ss))


def as_generator(rng: RngStream | np.random.Generator) -> np.random.Generator:
    """Accept either a stream value or an already-open generator."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def validate_prob_vector(p, name: str = "p") -> np.ndarray:
    """Check a finite nonnegative vector that sums to one within SUM_TOL."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-d vector")
    if not np.all(np.isfinite(p)):
        raise ValueError(f"{name} has non-finite entries")
    if np.any(p < 0):
        raise ValueError(f"{name} has negative entries")
    if abs(p.sum() - 1.0) > SUM_TOL:
        raise ValueError(f"{name} sums to {p.sum()!r}, expected 1 within {SUM_TOL}")
    return p


def validate_counts(obs, name: str = "obs") -> np.ndarray:
    obs = np.asarray(obs)
    if obs.ndim != 1 or obs.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-d count vector")
    if np.any(obs < 0) or not np.all(obs == np.floor(obs)):
        raise ValueError(f"{name} must hold nonnegative integers")
    return obs.astype(np.int64)


def _log_gamma_draws(shape: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    """log of Gamma(shape) draws, elementwise, safe for tiny shapes.

    Uses G = G' * U^(1/a) with G' ~ Gamma(a + 1), so a draw with a = 0.001
    comes back as a finite log instead of underflowing to zero.
    """
    boost = gen.standard_gamma(shape + 1.0)
    u = gen.random(shape.shape)
    return np.log(np.maximum(boost, PROB_FLOOR)) + np.log1p(-u) / shape


def sample_dirichlet(alpha, rng: RngStream | np.random.Generator) -> np.ndarray:
    """Draw a probability vector from Dirichlet(alpha).

    Entries of the result are strictly positive even when alpha is far below
    one, where naive normalized-gamma sampling returns exact zeros.
    """
    alpha = np.asarray(alpha, dtype=float)
    if alpha.ndim != 1 or alpha.size == 0:
        raise ValueError("alpha must be a non-empty 1-d vector")
    if np.any(alpha <= 0) or not np.all(np.isfinite(alpha)):
        raise ValueError("alpha entries must be positive and finite")
    gen = as_generator(rng)
    logg = _log_gamma_draws(alpha, gen)
    p = np.exp(logg - _logsumexp(logg))
    p = np.maximum(p, PROB_FLOOR)
    return p / p.sum()


def sample_dirichlet_rows(alpha: np.ndarray, rng: RngStream | np.random.Generator) -> np.ndarray:
    """Draw one Dirichlet vector per row of a positive concentration matrix."""
    alpha = np.asarray(alpha, dtype=float)
    if alpha.ndim != 2 or alpha.size == 0:
        raise ValueError("alpha must be a non-empty 2-d matrix")
    if np.any(alpha <= 0) or not np.all(np.isfinite(alpha)):
        raise ValueError("alpha entries must be positive and finite")
    gen = as_generator(rng)
    logg = _log_gamma_draws(alpha, gen)
    logg -= logg.max(axis=1, keepdims=True)
    p = np.exp(logg)
    p = np.maximum(p, PROB_FLOOR)
    return p / p.sum(axis=1, keepdims=True)


def sample_categorical(p, rng: RngStream | np.random.Generator, size: int | None = None):
    """Draw an index (or `size` indices) from a categorical distribution."""
    p = validate_prob_vector(p)
    gen = as_generator(rng)
    cum = np.cumsum(p)
    cum[-1] = 1.0
    if size is None:
        return int(np.searchsorted(cum, gen.random(), side="right"))
    idx = np.searchsorted(cum, gen.random(size), side="right")
    return np.minimum(idx, p.size - 1)


def sample_categorical_rows(probs: np.ndarray, rng: RngStream | np.random.Generator) -> np.ndarray:
    """One categorical draw per row of a row-stochastic matrix."""
    gen = as_generator(rng)
    cum = np.cumsum(probs, axis=1)
    cum[:, -1] = 1.0
    u = gen.random((probs.shape[0], 1))
    idx = (cum < u).sum(axis=1)
    return np.minimum(idx, probs.shape[1] - 1)


def sample_multinomial(n: int, p, rng: RngStream | np.random.Generator) -> np.ndarray:
    """Distribute n draws over categories; counts sum to n exactly."""
    if n < 0 or n != int(n):
        raise ValueError("n must be a nonnegative integer")
    p = validate_prob_vector(p)
    gen = as_generator(rng)
    return gen.multinomial(int(n), p / p.sum())


def log_multinomial_weight(obs, p) -> float:
    """Log-likelihood of a count vector under category probabilities p.

    The multinomial coefficient is omitted: it is constant across mixture
    components for a fixed observation, so it cancels in every comparison
    this package makes.
    """
    obs = validate_counts(obs)
    p = validate_prob_vector(p)
    if obs.size != p.size:
        raise ValueError(f"length mismatch: obs has {obs.size}, p has {p.size}")
    return float(obs @ np.log(np.maximum(p, PROB_FLOOR)))


def _logsumexp(logw: np.ndarray) -> float:
    m = logw.max()
    return float(m + np.log(np.exp(logw - m).sum()))


def normalize_log_weights(logw) -> np.ndarray:
    """Turn unnormalized log-weights into a probability vector.

    Stable for spreads up to hundreds of thousands of nats: entries far
    below the maximum underflow to zero instead of poisoning the sum.
    """
    logw = np.asarray(logw, dtype=float)
    if logw.ndim != 1 or logw.size == 0:
        raise ValueError("log-weights must be a non-empty 1-d vector")
    if np.any(np.isnan(logw)):
        raise ValueError("log-weights contain NaN")
    m = logw.max()
    if m == -np.inf:
        raise DegenerateDistributionError("all log-weights are -inf")
    p = np.exp(logw - m)
    return p / p.sum()


def normalize_log_rows(logw: np.ndarray) -> np.ndarray:
    """Row-wise normalize_log_weights for a matrix of log-weights."""
    logw = np.asarray(logw, dtype=float)
    if logw.ndim != 2 or logw.size == 0:
        raise ValueError("log-weights must be a non-empty 2-d matrix")
    if np.any(np.isnan(logw)):
        raise ValueError("log-weights contain NaN")
    m = logw.max(axis=1, keepdims=True)
    if np.any(m == -np.inf):
        raise DegenerateDistributionError("a row of log-weights is entirely -inf")
    p = np.exp(logw - m)
    return p / p.sum(axis=1, keepdims=True)
