"""Allocation of RIS elements between the beamforming and identification sets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Partition:
    """Disjoint split of element indices {0..n-1} into id_set and bf_set."""

    id_set: np.ndarray
    bf_set: np.ndarray
    n: int

    def __post_init__(self):
        object.__setattr__(self, "id_set", np.sort(np.asarray(self.id_set, dtype=np.intp)))
        object.__setattr__(self, "bf_set", np.sort(np.asarray(self.bf_set, dtype=np.intp)))
        combined = np.concatenate([self.id_set, self.bf_set])
        if combined.size != self.n or not np.array_equal(np.sort(combined), np.arange(self.n)):
            raise ValueError("id_set and bf_set must partition {0..n-1}")

    @property
    def n_id(self) -> int:
        return int(self.id_set.size)


def element_gains(v: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Per-element cascaded channel gain |v_i| * |g_i|."""
    v = np.asarray(v)
    g = np.asarray(g)
    if v.shape != g.shape:
        raise ValueError(f"length mismatch: {v.shape} vs {g.shape}")
    return np.abs(v) * np.abs(g)


def partition_sorted(gains: np.ndarray, n_id: int) -> Partition:
    """Assign the N - n_id largest-gain elements to the BF set.

    Ties are broken by lower index first (stable descending sort), so the
    result is deterministic for any input.
    """
    gains = np.asarray(gains, dtype=float)
    n = gains.size
    if not 0 <= n_id <= n:
        raise ValueError(f"n_id must lie in [0, {n}], got {n_id}")
    order = np.argsort(-gains, kind="stable")
    return Partition(id_set=order[n - n_id:], bf_set=order[: n - n_id], n=n)


def partition_random(n: int, n_id: int, rng: np.random.Generator) -> Partition:
    """Assign a uniformly random n_id-subset to the ID set."""
    if not 0 <= n_id <= n:
        raise ValueError(f"n_id must lie in [0, {n}], got {n_id}")
    perm = rng.permutation(n)
    return Partition(id_set=perm[:n_id], bf_set=perm[n_id:], n=n)
