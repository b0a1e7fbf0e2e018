"""Exact transition matrix and stationary law of the card-based chain for small n.

States are the partitions of ``n`` in reverse-lexicographic order, so
``(n)`` is index 0 and ``(1, ..., 1)`` is the last index.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .partitions import Partition

DEFAULT_CAP = 14


def _partitions(n: int, largest: int) -> Iterator[tuple[int, ...]]:
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in _partitions(n - first, first):
            yield (first,) + rest


@dataclass(frozen=True)
class PartitionIndex:
    n: int
    partitions: tuple[Partition, ...]
    _lookup: Mapping[tuple[int, ...], int] = field(repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.partitions)

    def __getitem__(self, i: int) -> Partition:
        return self.partitions[i]

    def __iter__(self):
        return iter(self.partitions)

    def index_of(self, lam) -> int:
        key = tuple(lam.parts) if isinstance(lam, Partition) else tuple(lam)
        try:
            return self._lookup[key]
        except KeyError:
            raise KeyError(f"{key} is not a partition of {self.n}") from None


def enumerate_partitions(n: int, cap: int = DEFAULT_CAP) -> PartitionIndex:
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > cap:
        raise ValueError(f"n = {n} exceeds the exact-oracle cap {cap}")
    parts = tuple(Partition(t) for t in _partitions(n, n))
    return PartitionIndex(n, parts, {lam.parts: i for i, lam in enumerate(parts)})


@dataclass(frozen=True)
class DistributionVector:
    index: PartitionIndex
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.shape != (len(self.index),):
            raise ValueError("probability vector does not match the index")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError("not a probability vector")
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_counts(cls, index: PartitionIndex, counts) -> "DistributionVector":
        counts = np.asarray(counts, dtype=float)
        return cls(index, counts / counts.sum())

    def __getitem__(self, lam) -> float:
        return float(self.probs[self.index.index_of(lam)])


def _pmf_table(size: int, p: float) -> list[float]:
    return [math.comb(size, k) * p**k * (1 - p) ** (size - k) for k in range(size + 1)]


def transition_row(lam: Partition, p: float) -> dict[tuple[int, ...], float]:
    """All successors of ``lam`` with their probabilities, by enumerating every
    pick vector ``(k_1, ..., k_l)`` with ``0 <= k_i <= lam_i``."""
    tables = {size: _pmf_table(size, p) for size in set(lam.parts)}
    row: dict[tuple[int, ...], float] = {}
    for picks in itertools.product(*(range(v + 1) for v in lam.parts)):
        prob = 1.0
        for v, k in zip(lam.parts, picks):
            prob *= tables[v][k]
        if prob == 0.0:
            continue
        rest = [v - k for v, k in zip(lam.parts, picks) if v > k]
        moved = sum(picks)
        if moved:
            rest.append(moved)
        key = tuple(sorted(rest, reverse=True))
        row[key] = row.get(key, 0.0) + prob
    return row


def transition_probability(lam: Partition, mu: Partition, p: float) -> float:
    if lam.n != mu.n:
        raise ValueError(f"size mismatch: {lam.n} vs {mu.n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    return transition_row(lam, p).get(mu.parts, 0.0)


def transition_matrix(n: int, p: float, cap: int = DEFAULT_CAP) -> np.ndarray:
    index = enumerate_partitions(n, cap)
    T = np.zeros((len(index), len(index)))
    for i, lam in enumerate(index):
        for key, prob in transition_row(lam, p).items():
            T[i, index.index_of(key)] += prob
    return T


def is_irreducible(T: np.ndarray) -> bool:
    n_comp, _ = connected_components(csr_matrix(T > 0), directed=True, connection="strong")
    return n_comp == 1


def is_aperiodic_by_loops(T: np.ndarray) -> bool:
    return bool(np.all(np.diag(T) > 0))


def stationary_exact(n: int, p: float, cap: int = DEFAULT_CAP) -> DistributionVector:
    """Solve ``pi T = pi`` with one balance equation replaced by ``sum(pi) = 1``."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    index = enumerate_partitions(n, cap)
    T = transition_matrix(n, p, cap)
    size = len(index)
    A = T.T - np.eye(size)
    A[-1, :] = 1.0
    b = np.zeros(size)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"stationary solve failed for n={n}, p={p}") from exc
    pi = np.clip(pi, 0.0, None)
    return DistributionVector(index, pi / pi.sum())


def power_iteration(T: np.ndarray, tol: float = 1e-14, max_iter: int = 1_000_000) -> np.ndarray:
    """Stationary vector by repeated ``pi <- pi T`` from the uniform start."""
    pi = np.full(T.shape[0], 1.0 / T.shape[0])
    for _ in range(max_iter):
        nxt = pi @ T
        nxt /= nxt.sum()
        if np.max(np.abs(nxt - pi)) < tol:
            return nxt
        pi = nxt
    raise RuntimeError("power iteration did not converge")


def stationary_residual(pi: DistributionVector, T: np.ndarray) -> float:
    return float(np.max(np.abs(pi.probs @ T - pi.probs)))


def total_variation(d1: DistributionVector, d2: DistributionVector) -> float:
    if d1.index.partitions != d2.index.partitions:
        raise ValueError("distributions live on different indices")
    return 0.5 * math.fsum(np.abs(d1.probs - d2.probs).tolist())
