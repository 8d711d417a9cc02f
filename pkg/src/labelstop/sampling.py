"""Pool bookkeeping for random and mixed (random + min-margin) querying."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

STRATEGIES = ("random", "mixed")


class PoolExhaustedError(LookupError):
    pass


@dataclass(frozen=True)
class PoolState:
    """Index pools over one training set.

    ``d_r`` is kept in its (seeded) draw order, ``d_a`` in ascending index
    order and ``d_t`` in query order.
    """

    d_a: tuple
    d_r: tuple
    d_t: tuple
    rng_seed: int

    def __post_init__(self):
        a, r, t = set(self.d_a), set(self.d_r), set(self.d_t)
        if len(a) != len(self.d_a) or len(r) != len(self.d_r) or len(t) != len(self.d_t):
            raise ValueError("duplicate index in a pool")
        if a & r or a & t or r & t:
            raise ValueError("pools must be pairwise disjoint")


def split_pool(dataset_size: int, strategy: str = "random", seed: int = 0, active_fraction: float = 0.5) -> PoolState:
    """Split ``range(dataset_size)`` into active and random pools.

    ``random`` leaves the active pool empty.  ``mixed`` puts
    ``floor(active_fraction * dataset_size)`` indices in the active pool.
    """
    if dataset_size < 2:
        raise ValueError("dataset_size must be >= 2")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown sampling strategy {strategy!r}")
    if not 0.0 < active_fraction < 1.0:
        raise ValueError("active_fraction must lie in (0, 1)")
    perm = np.random.default_rng(seed).permutation(dataset_size)
    if strategy == "random":
        return PoolState((), tuple(int(i) for i in perm), (), seed)
    n_a = int(np.floor(active_fraction * dataset_size))
    d_a = tuple(sorted(int(i) for i in perm[:n_a]))
    return PoolState(d_a, tuple(int(i) for i in perm[n_a:]), (), seed)


def next_random(state: PoolState) -> tuple[int, PoolState]:
    if not state.d_r:
        raise PoolExhaustedError("random pool is empty")
    i = state.d_r[0]
    return i, dataclasses.replace(state, d_r=state.d_r[1:])


def next_active(state: PoolState, model, X) -> tuple[int, PoolState]:
    """Take the active-pool point with the smallest margin under ``model``.

    Ties go to the lowest index.
    """
    if not state.d_a:
        raise PoolExhaustedError("active pool is empty")
    cand = np.asarray(state.d_a, dtype=np.int64)
    margins = model.margin_batch(np.asarray(X)[cand])
    pos = int(np.argmin(margins))
    i = int(cand[pos])
    return i, dataclasses.replace(state, d_a=state.d_a[:pos] + state.d_a[pos + 1 :])


def add_to_training(state: PoolState, *indices: int) -> PoolState:
    return dataclasses.replace(state, d_t=state.d_t + tuple(indices))
