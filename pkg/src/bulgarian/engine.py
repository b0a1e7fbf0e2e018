"""Game dynamics for deterministic, card-based and pile-based Bulgarian solitaire.

The card-based game is tracked in bowls: every round the new (possibly
empty) pile goes into a fresh bowl at position 1 and all older bowls move one
position to the right. Bowls are never removed, so a composition after ``m``
rounds from an ``l``-pile start has ``l + m`` entries.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .partitions import (
    Partition,
    StepFunction,
    WeakComposition,
    exponential,
    rescale,
    sort_composition,
    sup_distance,
)
from .rng import check_seed, make_rng

State = Union[Partition, WeakComposition]


class Variant(str, enum.Enum):
    DETERMINISTIC = "deterministic"
    CARD_BASED = "card_based"
    PILE_BASED = "pile_based"

    @classmethod
    def parse(cls, value: Union[str, "Variant"]) -> "Variant":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {"card": cls.CARD_BASED, "pile": cls.PILE_BASED, "det": cls.DETERMINISTIC}
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown variant {value!r}") from None


@dataclass(frozen=True)
class GameParams:
    n: int
    p: float = 0.5
    variant: Variant = Variant.CARD_BASED
    master_seed: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        object.__setattr__(self, "master_seed", check_seed(self.master_seed))


@dataclass(frozen=True)
class Trajectory:
    params: GameParams
    states: tuple
    new_piles: tuple[int, ...]

    @property
    def initial(self) -> State:
        return self.states[0]

    @property
    def final(self) -> State:
        return self.states[-1]

    @property
    def rounds(self) -> int:
        return len(self.states) - 1


@dataclass(frozen=True)
class StreamingRun:
    """Per-round summary of a long run; only the final state is kept.

    ``distances[r-1]`` is the sup-distance after round ``r`` (NaN on rounds
    that were not measured).
    """

    params: GameParams
    initial: State
    final: State
    rounds: int
    new_piles: np.ndarray
    distances: np.ndarray


def triangular_start(n: int) -> Partition:
    """``(k, k-1, ..., 1)`` with the ``r = n - T_k`` leftover cards put one each
    on the ``r`` largest piles."""
    if n < 1:
        raise ValueError("n must be positive")
    k = (math.isqrt(8 * n + 1) - 1) // 2
    r = n - k * (k + 1) // 2
    return Partition([k - i + (1 if i < r else 0) for i in range(k)])


def move_deterministic(lam: Partition) -> Partition:
    new_pile = len(lam)
    parts = [v - 1 for v in lam.parts if v > 1]
    if new_pile:
        parts.append(new_pile)
    return Partition(sorted(parts, reverse=True))


def move_card_based(alpha: WeakComposition, p: float, rng: np.random.Generator) -> WeakComposition:
    """One round in bowl representation: the picked cards of every nonempty
    bowl, drawn as per-bowl binomials in bowl order, form a new first bowl."""
    parts = np.asarray(alpha.parts, dtype=np.int64)
    nonzero = np.flatnonzero(parts)
    picked = rng.binomial(parts[nonzero], p) if nonzero.size else np.zeros(0, np.int64)
    parts = parts.copy()
    parts[nonzero] -= picked
    return WeakComposition((int(picked.sum()),) + tuple(parts.tolist()))


def move_pile_based(lam: Partition, p: float, rng: np.random.Generator) -> Partition:
    """Each nonempty pile independently gives up one card with probability p."""
    return _pile_round(lam, p, rng)[0]


def _pile_round(lam: Partition, p: float, rng: np.random.Generator) -> tuple[Partition, int]:
    release = rng.random(len(lam)) < p
    new_pile = int(release.sum())
    parts = [v - int(r) for v, r in zip(lam.parts, release) if v - int(r) > 0]
    if new_pile:
        parts.append(new_pile)
    return Partition(sorted(parts, reverse=True)), new_pile


class BowlState:
    """Sparse bowl bookkeeping for the card-based game.

    Only nonempty bowls are stored, in position order, with the round in which
    each was created. Drawing binomials for exactly these bowls in this order
    consumes the random stream the same way as :func:`move_card_based`.
    """

    __slots__ = ("counts", "born", "round", "length0", "n")

    def __init__(self, alpha: WeakComposition):
        parts = np.asarray(alpha.parts, dtype=np.int64)
        positions = np.flatnonzero(parts)
        self.counts = parts[positions]
        # bowl at position k after r rounds was created in round r - k + 1
        self.born = -positions.astype(np.int64)
        self.round = 0
        self.length0 = len(alpha)
        self.n = alpha.n

    def step(self, p: float, rng: np.random.Generator) -> int:
        picked = rng.binomial(self.counts, p) if self.counts.size else self.counts
        rest = self.counts - picked
        new_pile = int(picked.sum())
        self.round += 1
        keep = rest > 0
        if new_pile:
            self.counts = np.concatenate(([new_pile], rest[keep]))
            self.born = np.concatenate(([self.round], self.born[keep]))
        else:
            self.counts = rest[keep]
            self.born = self.born[keep]
        return new_pile

    def positions(self) -> np.ndarray:
        return self.round - self.born + 1

    def bowl(self, k: int) -> int:
        hit = np.flatnonzero(self.born == self.round - k + 1)
        return int(self.counts[hit[0]]) if hit.size else 0

    def composition(self) -> WeakComposition:
        parts = np.zeros(self.length0 + self.round, dtype=np.int64)
        parts[self.positions() - 1] = self.counts
        return WeakComposition(parts.tolist())

    def sorted_counts(self) -> np.ndarray:
        return np.sort(self.counts)[::-1]

    def partition(self) -> Partition:
        return Partition(self.sorted_counts().tolist())


def profile_distance(sorted_counts: np.ndarray, n: int, scale: float, reference=None) -> float:
    """Sup-distance of the ``scale``-rescaled boundary of a partition, given as
    a descending count array, to ``reference`` (default ``e^{-x}``)."""
    length = int(sorted_counts.size)
    f = StepFunction(np.arange(length, dtype=np.int64), sorted_counts, length)
    return sup_distance(rescale(f, scale, n), reference or exponential())


def _coerce_initial(params: GameParams, initial: State) -> State:
    if initial.n != params.n:
        raise ValueError(f"initial state holds {initial.n} cards but params.n = {params.n}")
    if params.variant is Variant.CARD_BASED:
        if isinstance(initial, Partition):
            return WeakComposition.from_partition(initial)
        return initial
    if isinstance(initial, WeakComposition):
        return sort_composition(initial)
    return initial


def play(params: GameParams, initial: State, m: int, rng: Optional[np.random.Generator] = None) -> Trajectory:
    """Play ``m`` rounds and keep every intermediate state.

    Without an explicit ``rng`` the stream is seeded from ``params.master_seed``,
    so the trajectory is a pure function of ``(params, initial, m)``.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    state = _coerce_initial(params, initial)
    states = [state]
    new_piles = []
    if params.variant is Variant.DETERMINISTIC:
        for _ in range(m):
            new_piles.append(len(state))
            state = move_deterministic(state)
            states.append(state)
    elif params.variant is Variant.PILE_BASED:
        rng = rng if rng is not None else make_rng(params.master_seed)
        for _ in range(m):
            state, new_pile = _pile_round(state, params.p, rng)
            new_piles.append(new_pile)
            states.append(state)
    else:
        rng = rng if rng is not None else make_rng(params.master_seed)
        bowls = BowlState(state)
        for _ in range(m):
            new_piles.append(bowls.step(params.p, rng))
            states.append(bowls.composition())
    return Trajectory(params, tuple(states), tuple(new_piles))


def play_streaming(
    params: GameParams,
    initial: State,
    m: int,
    rng: Optional[np.random.Generator] = None,
    record_every: int = 1,
    scale: Optional[float] = None,
) -> StreamingRun:
    """Play ``m`` rounds keeping only the new-pile size per round and, every
    ``record_every`` rounds (and always after the last), the sup-distance of
    the rescaled sorted state to ``e^{-x}``.

    ``scale`` defaults to ``1/p`` for the random variants; the deterministic
    game records no distances unless a scale is given.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    state = _coerce_initial(params, initial)
    n = params.n
    if scale is None and params.variant is not Variant.DETERMINISTIC and params.p > 0:
        scale = 1.0 / params.p
    new_piles = np.zeros(m, dtype=np.int64)
    distances = np.full(m, np.nan)

    def measure(r: int, counts: np.ndarray) -> None:
        if scale is not None and (r % record_every == 0 or r == m):
            distances[r - 1] = profile_distance(counts, n, scale)

    if params.variant is Variant.CARD_BASED:
        rng = rng if rng is not None else make_rng(params.master_seed)
        bowls = BowlState(state)
        for r in range(1, m + 1):
            new_piles[r - 1] = bowls.step(params.p, rng)
            measure(r, bowls.sorted_counts())
        final = bowls.composition()
    else:
        if params.variant is Variant.PILE_BASED:
            rng = rng if rng is not None else make_rng(params.master_seed)
        for r in range(1, m + 1):
            if params.variant is Variant.PILE_BASED:
                state, new_piles[r - 1] = _pile_round(state, params.p, rng)
            else:
                new_piles[r - 1] = len(state)
                state = move_deterministic(state)
            measure(r, np.asarray(state.parts, dtype=np.int64))
        final = state
    return StreamingRun(params, initial, final, m, new_piles, distances)

