"""Acceptance suite: one test per criterion, tolerances as stated.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary lists
one PASS/FAIL line per criterion.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from bulgarian.bounds import (
    binomial_lower_tail,
    binomial_upper_tail,
    chernoff_abs,
    chernoff_lower,
    chernoff_upper,
    finite_n_bound,
    survival_per_unit_time,
    theorem_rate,
)
from bulgarian.cli import main
from bulgarian.engine import GameParams
from bulgarian.exact import (
    is_aperiodic_by_loops,
    is_irreducible,
    stationary_exact,
    stationary_residual,
    total_variation,
    transition_matrix,
)
from bulgarian.experiments import (
    alpha_marginal_check,
    cycle_detect,
    limit_shape_experiment,
    stationary_experiment,
)
from bulgarian.partitions import (
    Partition,
    StepFunction,
    WeakComposition,
    boundary,
    exponential,
    rescale,
    sort_composition,
    step_reference,
    sup_distance,
)

from oracles import grid_sup_distance

SEED = 20261016


def detail(record_property, text):
    record_property("detail", text)


def random_partition(rng, n):
    # sorted stars-and-bars composition with a random number of parts
    k = int(rng.integers(1, n + 1))
    cuts = np.sort(rng.choice(np.arange(1, n), size=k - 1, replace=False)) if k > 1 else np.array([], int)
    parts = np.diff(np.concatenate(([0], cuts, [n])))
    return Partition(sorted(parts.tolist(), reverse=True))


@pytest.mark.criterion(1, "stationary oracle equivalence, TV < 0.02")
@pytest.mark.parametrize("n,p", [(4, 0.3), (6, 0.3), (8, 0.5)])
def test_c01_stationary_oracle(n, p, record_property):
    start = time.perf_counter()
    rep = stationary_experiment(GameParams(n, p, master_seed=SEED), burn_in=1000, samples=10**5, thinning=10)
    elapsed = time.perf_counter() - start
    tv = total_variation(rep.distribution, stationary_exact(n, p))
    detail(record_property, f"({n},{p}) TV={tv:.4f} in {elapsed:.0f}s")
    assert tv < 0.02
    assert elapsed < 60


@pytest.mark.criterion(2, "exact chain diagnostics")
def test_c02_chain_diagnostics(record_property):
    worst_row = worst_res = 0.0
    for n in range(1, 11):
        for p in (0.1, 0.5, 0.9):
            T = transition_matrix(n, p)
            worst_row = max(worst_row, float(np.abs(T.sum(axis=1) - 1).max()))
            pi = stationary_exact(n, p)
            worst_res = max(worst_res, stationary_residual(pi, T))
            assert is_irreducible(T), (n, p)
            assert is_aperiodic_by_loops(T), (n, p)
    detail(record_property, f"max row error {worst_row:.1e}, max residual {worst_res:.1e}")
    assert worst_row <= 1e-10
    assert worst_res <= 1e-10


@pytest.mark.criterion(3, "n=2, p=0.5: pi(1,1) = 2/3")
def test_c03_two_cards(record_property):
    exact = stationary_exact(2, 0.5)[Partition([1, 1])]
    rep = stationary_experiment(GameParams(2, 0.5, master_seed=SEED), burn_in=1000, samples=10**5, thinning=10)
    empirical = rep.distribution[Partition([1, 1])]
    detail(record_property, f"exact {exact:.12f}, empirical {empirical:.4f}")
    assert abs(exact - 2 / 3) <= 1e-10
    assert abs(empirical - 2 / 3) <= 0.01


@pytest.mark.criterion(4, "bowl marginal law")
def test_c04_marginals(record_property):
    start = time.perf_counter()
    stats = alpha_marginal_check(10**4, 0.02, 100, [1, 10, 50], trials=2000, master_seed=SEED)
    elapsed = time.perf_counter() - start
    detail(record_property, ", ".join(f"k={s.k} z={s.z_mean:+.2f} var={s.variance_ratio:.3f}" for s in stats))
    for s in stats:
        assert abs(s.z_mean) <= 4
        assert abs(s.variance_ratio - 1) <= 0.10
    assert elapsed < 120


@pytest.mark.criterion(5, "sorting never increases the distance (10^4 triples)")
def test_c05_sorting_inequality(record_property):
    rng = np.random.default_rng(SEED)
    start = time.perf_counter()
    violations = 0
    for _ in range(10**4):
        length = int(rng.integers(1, 60))
        parts = rng.integers(0, 40, size=length)
        if parts.sum() == 0:
            parts[0] = 1
        alpha = WeakComposition(parts.tolist())
        a = float(rng.choice([1.0, 2.0, 5.0, 10.0, 1 / rng.uniform(0.01, 0.5)]))
        if rng.random() < 0.5:
            g = exponential(float(rng.uniform(0.1, 5)), float(rng.uniform(0.1, 3)))
        else:
            k = int(rng.integers(1, 12))
            vals = np.sort(rng.uniform(0, 2, size=k))[::-1]
            width = float(rng.uniform(0.05, 2))
            g = step_reference(StepFunction(np.arange(k) * width, vals, k * width))
        raw = sup_distance(rescale(boundary(alpha), a, alpha.n), g)
        srt = sup_distance(rescale(boundary(sort_composition(alpha)), a, alpha.n), g)
        violations += srt > raw
    elapsed = time.perf_counter() - start
    detail(record_property, f"{violations} violations in {elapsed:.1f}s")
    assert violations == 0
    assert elapsed < 30


@pytest.mark.criterion(6, "Chernoff domination and elementary inequalities")
def test_c06_chernoff(record_property):
    checked = 0
    for n in (10, 100, 1000):
        for p in (Fraction(1, 10), Fraction(1, 2)):
            mu = n * p
            for i in range(1, 21):
                eta = Fraction(i, 20)
                hi = math.ceil((1 + eta) * mu)
                lo = math.floor((1 - eta) * mu)
                up = binomial_upper_tail(n, float(p), hi)
                down = binomial_lower_tail(n, float(p), lo)
                both = min(1.0, up + down)
                m, e = float(mu), float(eta)
                assert up <= math.nextafter(chernoff_upper(m, e), math.inf), (n, p, eta)
                assert down <= math.nextafter(chernoff_lower(m, e), math.inf), (n, p, eta)
                assert both <= math.nextafter(chernoff_abs(m, float(eta * mu)), math.inf), (n, p, eta)
                checked += 3
    rng = np.random.default_rng(SEED)
    ps = np.sort(rng.uniform(1e-3, 1 - 1e-3, 10**4))
    assert np.all(np.diff(survival_per_unit_time(ps)) < 0)
    ys = rng.uniform(0, 1, 10**4)
    ns = rng.integers(1, 10**4, 10**4)
    assert all((1 - y) ** int(k) >= 1 - k * y - 1e-15 for y, k in zip(ys, ns))
    detail(record_property, f"{checked} tail checks, 2x10^4 inequality points")


@pytest.mark.criterion(7, "exact metric vs 1e-6 grid oracle")
def test_c07_grid_oracle(record_property):
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 1001))
        lam = random_partition(rng, n)
        a = int(rng.choice([1, 10, 20, 50, 100]))
        exact = sup_distance(rescale(boundary(lam), a, n), exponential())
        worst = max(worst, abs(exact - grid_sup_distance(lam.parts, n, a)))
    detail(record_property, f"max disagreement {worst:.1e}")
    assert worst <= 1e-9


@pytest.mark.criterion(8, "n=10^5, p=0.01, m=500 terminal distances")
def test_c08_terminal_distances(record_property):
    start = time.perf_counter()
    rep = limit_shape_experiment(GameParams(10**5, 0.01, master_seed=SEED), m=500, epsilon=0.15, trials=50)
    elapsed = time.perf_counter() - start
    median = float(np.median(rep.distances))
    detail(record_property, f"median {median:.4f}, {rep.prob_within(0.15):.0%} <= 0.15, {elapsed:.0f}s")
    assert median <= 0.1
    assert rep.prob_within(0.15) >= 0.9
    assert elapsed < 300


@pytest.mark.slow
@pytest.mark.criterion(9, "finite-n bound and simulation at n=10^6, eps=0.3")
def test_c09_informative_scale(record_property):
    n, p, eps = 10**6, 0.01, 0.3
    m = math.ceil(theorem_rate(eps) * n) + 1
    bound = finite_n_bound(n, p, eps, m)
    start = time.perf_counter()
    rep = limit_shape_experiment(GameParams(n, p, master_seed=SEED), m=m, epsilon=eps, trials=20)
    elapsed = time.perf_counter() - start
    detail(
        record_property,
        f"m={m}, bound {bound.combined:.2e}, {rep.count_within}/20 within, max {rep.distances.max():.4f}, {elapsed:.0f}s",
    )
    assert bound.combined < 1e-100
    assert rep.count_within == 20
    assert elapsed < 600


@pytest.mark.criterion(10, "deterministic game fixed points and near-triangular cycles")
def test_c10_deterministic(record_property):
    rng = np.random.default_rng(SEED)
    for k in range(1, 11):
        n = k * (k + 1) // 2
        staircase = Partition(range(k, 0, -1))
        for _ in range(100):
            rep = cycle_detect(random_partition(rng, n))
            assert rep.cycle == (staircase,), n
    cycles = 0
    for n in range(1, 31):
        k = (math.isqrt(8 * n + 1) - 1) // 2
        if k * (k + 1) // 2 == n:
            continue
        for _ in range(50):
            rep = cycle_detect(random_partition(rng, n))
            assert all(rep.near_triangular), (n, rep.cycle)
            cycles += 1
    detail(record_property, f"1000 triangular starts, {cycles} non-triangular starts")


CLI_RUNS = [
    ["simulate", "--n", "2000", "--p", "0.05", "--rounds", "60", "--record-every", "10", "--seed", "7"],
    ["simulate", "--n", "300", "--variant", "pile", "--p", "0.2", "--rounds", "50", "--seed", "7"],
    ["limit-shape", "--n", "3000", "--p", "0.05", "--trials", "4", "--epsilon", "0.2", "--seed", "7"],
    ["stationary", "--n", "6", "--p", "0.3", "--samples", "2000", "--seed", "7"],
    ["stationary", "--n", "3000", "--p", "0.05", "--samples", "20", "--seed", "7"],
    ["stationary-exact", "--n", "7", "--p", "0.4"],
    ["cycle", "--n", "20", "--start", "single"],
    ["marginals", "--n", "1000", "--p", "0.05", "--rounds", "20", "--ks", "1,5,20", "--trials", "50", "--seed", "7"],
    ["bounds", "--n", "1000000", "--p", "0.01", "--epsilon", "0.3"],
    ["popov", "--n", "200", "--p", "0.1", "--rounds", "100", "--trials", "2", "--seed", "7"],
]


@pytest.mark.criterion(11, "byte-identical CSV/JSON on rerun")
def test_c11_reproducible_outputs(tmp_path, monkeypatch, capsys, record_property):
    monkeypatch.setenv("BULGARIA_THREADS", "1")
    for i, argv in enumerate(CLI_RUNS):
        # same config, including output paths, so the second run overwrites the first
        out, js = tmp_path / f"{i}.csv", tmp_path / f"{i}.json"
        blobs = []
        for _ in range(2):
            assert main(argv + ["--out", str(out), "--json", str(js)]) == 0
            blobs.append((out.read_bytes(), js.read_bytes()))
        assert blobs[0] == blobs[1], argv
    capsys.readouterr()
    detail(record_property, f"{len(CLI_RUNS)} subcommand runs")
