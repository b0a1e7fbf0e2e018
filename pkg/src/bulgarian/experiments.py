"""Experiment recipes tying the engine, distances, bounds and exact oracle together."""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .bounds import DeviationBound, finite_n_bound, theorem_rate
from .engine import (
    BowlState,
    GameParams,
    State,
    Variant,
    move_deterministic,
    play_streaming,
    profile_distance,
    triangular_start,
)
from .exact import DEFAULT_CAP, DistributionVector, enumerate_partitions
from .partitions import (
    Partition,
    StepFunction,
    WeakComposition,
    boundary,
    exponential,
    rescale,
    sort_composition,
    sup_distance,
)
from .rng import make_rng, trial_seed

QUANTILES = (0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0)


def worker_count() -> int:
    """Worker processes for trial ensembles, capped by ``BULGARIA_THREADS``."""
    cap = os.environ.get("BULGARIA_THREADS")
    count = os.cpu_count() or 1
    if cap:
        try:
            count = min(count, max(1, int(cap)))
        except ValueError:
            raise ValueError(f"BULGARIA_THREADS must be an integer, got {cap!r}") from None
    return count


def run_trials(func: Callable, jobs: Sequence, workers: Optional[int] = None) -> list:
    """Map ``func`` over ``jobs`` in order. Each job carries its own seed, so
    the result list is the same whatever the worker count."""
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(jobs) <= 1:
        return [func(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(func, jobs))


def _quantiles(values: np.ndarray) -> dict[str, float]:
    if values.size == 0:
        return {}
    qs = np.quantile(values, QUANTILES)
    return {f"q{int(round(q * 100)):02d}": float(v) for q, v in zip(QUANTILES, qs)}


def default_rounds(eps: float, n: int) -> int:
    return math.ceil(theorem_rate(eps) * n) + 1


@dataclass(frozen=True)
class DeviationReport:
    params: GameParams
    m: int
    epsilon: float
    trials: int
    count_within: int
    empirical_prob: float
    distances: np.ndarray
    unsorted_distances: np.ndarray
    trial_seeds: tuple[int, ...]
    quantiles: dict
    finite_n_bound: DeviationBound

    @property
    def master_seed(self) -> int:
        return self.params.master_seed

    def prob_within(self, eps: float) -> float:
        return float(np.mean(self.distances <= eps))


def _limit_shape_trial(job):
    params, initial, m, seed = job
    run = play_streaming(params, initial, m, make_rng(seed), record_every=max(m, 1))
    final = run.final
    parts = np.asarray(final.trimmed(), dtype=np.int64)
    f = StepFunction(np.arange(parts.size, dtype=np.int64), parts, parts.size)
    unsorted = sup_distance(rescale(f, 1.0 / params.p, params.n), exponential())
    return float(run.distances[-1]), unsorted


def limit_shape_experiment(
    params: GameParams,
    initial: Optional[State] = None,
    m: Optional[int] = None,
    epsilon: float = 0.1,
    trials: int = 1,
    workers: Optional[int] = None,
) -> DeviationReport:
    """Independent card-based runs of ``m`` rounds; each terminal state is sorted
    into a partition and its ``1/p``-rescaled boundary compared with ``e^{-x}``.

    ``m`` defaults to ``ceil(f(eps) n) + 1``.
    """
    if params.variant is not Variant.CARD_BASED:
        raise ValueError("limit-shape experiments need the card-based variant")
    if not 0.0 < params.p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    m = default_rounds(epsilon, params.n) if m is None else int(m)
    if m < 1:
        raise ValueError("m must be >= 1")
    initial = triangular_start(params.n) if initial is None else initial
    seeds = tuple(trial_seed(params.master_seed, t) for t in range(trials))
    results = run_trials(_limit_shape_trial, [(params, initial, m, s) for s in seeds], workers)
    dist = np.array([r[0] for r in results])
    raw = np.array([r[1] for r in results])
    within = int(np.count_nonzero(dist <= epsilon))
    return DeviationReport(
        params=params,
        m=m,
        epsilon=float(epsilon),
        trials=trials,
        count_within=within,
        empirical_prob=within / trials,
        distances=dist,
        unsorted_distances=raw,
        trial_seeds=seeds,
        quantiles=_quantiles(dist),
        finite_n_bound=finite_n_bound(params.n, params.p, epsilon, m),
    )


@dataclass(frozen=True)
class StationaryReport:
    """Samples of one long chain after burn-in.

    For ``n`` within the exact-oracle cap ``distribution`` holds the empirical
    state frequencies; otherwise it is ``None`` and only distance statistics
    are filled in.
    """

    params: GameParams
    burn_in: int
    samples: int
    thinning: int
    distribution: Optional[DistributionVector]
    distances: np.ndarray
    quantiles: dict


def stationary_experiment(
    params: GameParams,
    burn_in: Optional[int] = None,
    samples: int = 10_000,
    thinning: int = 10,
    initial: Optional[State] = None,
    cap: int = DEFAULT_CAP,
) -> StationaryReport:
    if params.variant is not Variant.CARD_BASED:
        raise ValueError("stationary experiments need the card-based variant")
    if not 0.0 < params.p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if samples < 1 or thinning < 1:
        raise ValueError("samples and thinning must be >= 1")
    if burn_in is None:
        burn_in = 10 * math.ceil(1.0 / params.p)
    if burn_in < 0:
        raise ValueError("burn_in must be nonnegative")
    initial = triangular_start(params.n) if initial is None else initial
    if initial.n != params.n:
        raise ValueError("initial state does not match n")

    comp = initial if isinstance(initial, WeakComposition) else WeakComposition.from_partition(initial)
    rng = make_rng(params.master_seed)
    bowls = BowlState(comp)
    p = params.p
    for _ in range(burn_in):
        bowls.step(p, rng)

    small = params.n <= cap
    if small:
        index = enumerate_partitions(params.n, cap)
        counts = np.zeros(len(index), dtype=np.int64)
        lookup = index._lookup
    distances = np.zeros(0 if small else samples)
    scale = 1.0 / p
    for s in range(samples):
        for _ in range(thinning):
            bowls.step(p, rng)
        if small:
            counts[lookup[tuple(sorted(bowls.counts.tolist(), reverse=True))]] += 1
        else:
            distances[s] = profile_distance(bowls.sorted_counts(), params.n, scale)
    return StationaryReport(
        params=params,
        burn_in=burn_in,
        samples=samples,
        thinning=thinning,
        distribution=DistributionVector.from_counts(index, counts) if small else None,
        distances=distances,
        quantiles=_quantiles(distances),
    )


def triangular_rank(n: int) -> int:
    """Largest ``k`` with ``1 + 2 + ... + k <= n``."""
    return (math.isqrt(8 * n + 1) - 1) // 2


def is_near_triangular(lam: Partition) -> bool:
    """True if ``lam`` is ``(k, ..., 1)`` with at most one card added to each
    pile, plus possibly one extra pile of size 1."""
    k = triangular_rank(lam.n)
    parts = lam.parts
    if len(parts) == k + 1:
        if parts[k] != 1:
            return False
    elif len(parts) != k:
        return False
    return all(parts[i] - (k - i) in (0, 1) for i in range(k))


@dataclass(frozen=True)
class CycleReport:
    initial: Partition
    tail_length: int
    cycle_length: int
    cycle: tuple[Partition, ...]
    near_triangular: tuple[bool, ...]


def cycle_detect(initial: Partition) -> CycleReport:
    """Iterate the deterministic move until a state repeats."""
    seen: dict[tuple[int, ...], int] = {}
    states = []
    state = initial
    while state.parts not in seen:
        seen[state.parts] = len(states)
        states.append(state)
        state = move_deterministic(state)
    start = seen[state.parts]
    cycle = tuple(states[start:])
    return CycleReport(
        initial=initial,
        tail_length=start,
        cycle_length=len(cycle),
        cycle=cycle,
        near_triangular=tuple(is_near_triangular(s) for s in cycle),
    )


@dataclass(frozen=True)
class MarginalStat:
    k: int
    mean: float
    variance: float
    expected_mean: float
    expected_variance: float
    z_mean: float
    variance_ratio: float


def _marginal_trial(job):
    n, p, m, ks, seed, initial = job
    rng = make_rng(seed)
    bowls = BowlState(initial)
    for _ in range(m):
        bowls.step(p, rng)
    return [bowls.bowl(k) for k in ks]


def alpha_marginal_check(
    n: int,
    p: float,
    m: int,
    ks: Sequence[int],
    trials: int,
    master_seed: int = 0,
    initial: Optional[State] = None,
    workers: Optional[int] = None,
) -> list[MarginalStat]:
    """Moments of bowl ``k`` after ``m`` card-based rounds against
    ``Bin(n, p (1-p)^(k-1))``."""
    ks = [int(k) for k in ks]
    if any(k < 1 for k in ks):
        raise ValueError("bowl indices start at 1")
    if any(k > m for k in ks):
        raise ValueError("the binomial law only covers bowls created during the run (k <= m)")
    if trials < 2:
        raise ValueError("trials must be >= 2")
    params = GameParams(n, p, Variant.CARD_BASED, master_seed)
    initial = triangular_start(n) if initial is None else initial
    comp = initial if isinstance(initial, WeakComposition) else WeakComposition.from_partition(initial)
    jobs = [(n, params.p, m, ks, trial_seed(master_seed, t), comp) for t in range(trials)]
    data = np.array(run_trials(_marginal_trial, jobs, workers), dtype=float)
    out = []
    for j, k in enumerate(ks):
        q = p * (1 - p) ** (k - 1)
        mu, var = n * q, n * q * (1 - q)
        mean = float(data[:, j].mean())
        svar = float(data[:, j].var(ddof=1))
        se = math.sqrt(var / trials)
        out.append(
            MarginalStat(
                k=k,
                mean=mean,
                variance=svar,
                expected_mean=mu,
                expected_variance=var,
                z_mean=(mean - mu) / se if se > 0 else (0.0 if mean == mu else math.inf),
                variance_ratio=svar / var if var > 0 else (1.0 if svar == 0 else math.inf),
            )
        )
    return out


@dataclass(frozen=True)
class PopovReport:
    """Pile-based terminal shapes next to card-based ones; no pass/fail."""

    n: int
    p: float
    m: int
    scale: float
    pile_snapshots: tuple[StepFunction, ...]
    card_snapshots: tuple[StepFunction, ...]
    pile_lengths: np.ndarray
    pile_largest: np.ndarray
    deterministic_reference: Optional[StepFunction] = field(default=None)


def popov_comparison(
    n: int,
    p: float,
    m: int,
    trials: int,
    master_seed: int = 0,
    scale: Optional[float] = None,
    initial: Optional[Partition] = None,
) -> PopovReport:
    """Runs the pile-based game and, for contrast, the card-based game from the
    same start. Snapshots use scaling ``sqrt(n)`` unless ``scale`` is given;
    for triangular ``n`` the fixed point ``(k, ..., 1)`` is added as overlay."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    scale = math.sqrt(n) if scale is None else float(scale)
    initial = triangular_start(n) if initial is None else initial
    pile, card, lengths, largest = [], [], [], []
    for t in range(trials):
        seed = trial_seed(master_seed, t)
        run = play_streaming(GameParams(n, p, Variant.PILE_BASED, seed), initial, m, record_every=max(m, 1), scale=scale)
        lam = run.final
        pile.append(rescale(boundary(lam), scale, n))
        lengths.append(len(lam))
        largest.append(lam.part(1))
        if 0 < p < 1:
            crun = play_streaming(GameParams(n, p, Variant.CARD_BASED, seed), initial, m, record_every=max(m, 1))
            card.append(rescale(boundary(sort_composition(crun.final)), scale, n))
    k = triangular_rank(n)
    ref = None
    if k * (k + 1) // 2 == n:
        ref = rescale(boundary(Partition(range(k, 0, -1))), scale, n)
    return PopovReport(
        n=n,
        p=p,
        m=m,
        scale=scale,
        pile_snapshots=tuple(pile),
        card_snapshots=tuple(card),
        pile_lengths=np.array(lengths),
        pile_largest=np.array(largest),
        deterministic_reference=ref,
    )
