"""Deterministic, scheduling-independent random streams.

Every stream is a Philox (counter-based) generator keyed by the master seed
plus an integer path such as ``(set_index,)`` or ``(chunk_index,)``, so a
given piece of work always sees the same numbers no matter which worker
thread runs it or in which order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")


def stream(seed: int, *key: int) -> np.random.Generator:
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def categorical_inverse_cdf(probs: Sequence[float], u: np.ndarray) -> np.ndarray:
    """Map uniforms in [0, 1) to zero-based category indices by inverse CDF."""
    cdf = np.cumsum(np.asarray(probs, dtype=float))
    cdf[-1] = 1.0
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, len(cdf) - 1)


def categorical_counts(probs: Sequence[float], n: int, rng: np.random.Generator) -> np.ndarray:
    u = rng.random(n)
    return np.bincount(categorical_inverse_cdf(probs, u), minlength=len(probs))


def map_ordered(fn: Callable[[int], T], n: int, workers: int = 1) -> list[T]:
    """Evaluate ``fn(0..n-1)`` and return results in index order."""
    if workers <= 1 or n <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n)))
