import math
import random
from types import SimpleNamespace

import pytest

from granarch.objectives import (
    MetricsRecord,
    ObjectiveConfig,
    dominates,
    infeasible_record,
    normalize_size,
    pareto_frontier,
    scalar_fitness,
)

CFG = ObjectiveConfig()


def rec(key, acc, pre, recall, size, feasible=True):
    m = (
        MetricsRecord(acc, pre, recall, size)
        if feasible
        else infeasible_record("boom")
    )
    return SimpleNamespace(key=key, metrics=m, fitness=scalar_fitness(m, CFG))


# ---------------------------------------------------------------------------
# normalize_size / scalar_fitness
# ---------------------------------------------------------------------------


def test_normalize_size_of_zero_is_one():
    assert normalize_size(0, CFG) == 1.0


def test_normalize_size_at_range_is_inverse_e():
    assert normalize_size(100_000, CFG) == pytest.approx(math.exp(-1), abs=1e-12)


def test_normalize_size_worked_value():
    assert normalize_size(11_520, CFG) == pytest.approx(0.89120, abs=1e-4)


def test_normalize_size_strictly_decreasing_and_in_unit_interval():
    sizes = [i * 5000 for i in range(100)]
    values = [normalize_size(s, CFG) for s in sizes]
    assert all(b < a for a, b in zip(values, values[1:]))
    assert all(0.0 < v <= 1.0 for v in values)


def test_scalar_fitness_maximum():
    assert scalar_fitness(MetricsRecord(1.0, 1.0, 1.0, 0), CFG) == 4.0


def test_scalar_fitness_vanishes_for_huge_models():
    assert scalar_fitness(MetricsRecord(0.0, 0.0, 0.0, 10**9), CFG) < 1e-4


def test_scalar_fitness_measured_anchor_row():
    # 100% / 98% / 100% at 11 536 B
    m = MetricsRecord(1.0, 0.98, 1.0, 11_536)
    assert scalar_fitness(m, CFG) == pytest.approx(2.98 + math.exp(-0.11536), abs=1e-12)


def test_scalar_fitness_zero_for_infeasible():
    assert scalar_fitness(infeasible_record("train crash"), CFG) == 0.0


def test_scalar_fitness_monotone_in_each_metric():
    base = MetricsRecord(0.5, 0.5, 0.5, 10_000)
    f0 = scalar_fitness(base, CFG)
    assert scalar_fitness(MetricsRecord(0.6, 0.5, 0.5, 10_000), CFG) > f0
    assert scalar_fitness(MetricsRecord(0.5, 0.6, 0.5, 10_000), CFG) > f0
    assert scalar_fitness(MetricsRecord(0.5, 0.5, 0.6, 10_000), CFG) > f0
    assert scalar_fitness(MetricsRecord(0.5, 0.5, 0.5, 20_000), CFG) < f0


def test_metrics_record_rejects_out_of_range():
    with pytest.raises(ValueError):
        MetricsRecord(1.2, 0.5, 0.5, 100)
    with pytest.raises(ValueError):
        MetricsRecord(0.5, -0.1, 0.5, 100)
    with pytest.raises(ValueError):
        MetricsRecord(0.5, 0.5, 0.5, -1)


# ---------------------------------------------------------------------------
# dominates
# ---------------------------------------------------------------------------


def test_dominates_examples():
    a = MetricsRecord(0.9, 0.9, 0.9, 1000)
    b = MetricsRecord(0.8, 0.9, 0.9, 1000)
    assert not dominates(a, a)  # identical: no strict improvement
    assert dominates(a, b)
    c = MetricsRecord(0.9, 0.7, 0.9, 1000)
    d = MetricsRecord(0.8, 0.9, 0.9, 1000)
    assert not dominates(c, d) and not dominates(d, c)


def _random_metrics(rng):
    return MetricsRecord(
        round(rng.uniform(0, 1), 2),
        round(rng.uniform(0, 1), 2),
        round(rng.uniform(0, 1), 2),
        rng.randrange(1, 20) * 1000,
    )


def _coarse_metrics(rng):
    # few distinct levels so dominance chains are frequent
    levels = (0.0, 0.25, 0.5, 0.75, 1.0)
    return MetricsRecord(
        rng.choice(levels), rng.choice(levels), rng.choice(levels), rng.choice((1, 2, 3)) * 1000
    )


def test_dominance_is_irreflexive_antisymmetric_transitive():
    rng = random.Random(5)
    triples_checked = 0
    for _ in range(20_000):
        a, b, c = (_coarse_metrics(rng) for _ in range(3))
        assert not dominates(a, a)
        if dominates(a, b):
            assert not dominates(b, a)
        if dominates(a, b) and dominates(b, c):
            assert dominates(a, c)
            triples_checked += 1
    assert triples_checked > 50  # the premise actually fired


# ---------------------------------------------------------------------------
# pareto_frontier
# ---------------------------------------------------------------------------


def test_frontier_of_empty_log_is_empty():
    assert pareto_frontier([]) == []


def test_frontier_three_record_example():
    a = rec("a", 1.0, 1.0, 1.0, 11_520)
    b = rec("b", 0.9, 0.7, 0.8, 9_200)
    c = rec("c", 0.95, 1.0, 1.0, 12_000)
    assert pareto_frontier([a, b, c]) == [b, a]  # c dominated by a; sorted by size


def test_frontier_excludes_infeasible_records():
    good = rec("a", 0.5, 0.5, 0.5, 1000)
    bad = rec("b", 0, 0, 0, 0, feasible=False)
    assert pareto_frontier([good, bad]) == [good]


def test_frontier_collapses_duplicate_keys_to_best_fitness():
    worse = rec("a", 0.5, 0.5, 0.5, 1000)
    better = rec("a", 0.9, 0.9, 0.9, 1000)
    out = pareto_frontier([worse, better])
    assert out == [better]


def test_frontier_keeps_one_representative_for_exact_metric_ties():
    first = rec("SR:375|x", 0.9, 0.9, 0.9, 1000)
    twin = rec("SR:750|x", 0.9, 0.9, 0.9, 1000)
    out = pareto_frontier([twin, first])
    assert out == [first]  # lexicographically smallest key


def _brute_force_frontier(records):
    """Independent O(n^2) reference: inline comparisons, no library dominance calls."""
    feasible = [r for r in records if r.metrics.feasible]
    best = {}
    for r in feasible:
        held = best.get(r.key)
        if held is None or (-r.fitness, r.metrics.model_size_bytes, r.key) < (
            -held.fitness,
            held.metrics.model_size_bytes,
            held.key,
        ):
            best[r.key] = r
    candidates = list(best.values())

    def beats(x, y):
        mx, my = x.metrics, y.metrics
        ge = (
            mx.accuracy >= my.accuracy
            and mx.precision >= my.precision
            and mx.recall >= my.recall
            and mx.model_size_bytes <= my.model_size_bytes
        )
        gt = (
            mx.accuracy > my.accuracy
            or mx.precision > my.precision
            or mx.recall > my.recall
            or mx.model_size_bytes < my.model_size_bytes
        )
        return ge and gt

    keep = []
    for r in candidates:
        if not any(beats(o, r) for o in candidates):
            keep.append(r)
    reps = {}
    for r in keep:
        t = (r.metrics.accuracy, r.metrics.precision, r.metrics.recall, r.metrics.model_size_bytes)
        if t not in reps or r.key < reps[t].key:
            reps[t] = r
    return sorted(reps.values(), key=lambda r: (r.metrics.model_size_bytes, r.key))


def _random_log(rng, n):
    records = []
    for i in range(n):
        key = f"SR:{rng.randrange(1, n + 1)}|g{i % (n // 2 + 1)}"  # duplicate keys possible
        if rng.random() < 0.05:
            records.append(rec(key, 0, 0, 0, 0, feasible=False))
        else:
            m = _random_metrics(rng)
            records.append(rec(key, m.accuracy, m.precision, m.recall, m.model_size_bytes))
    return records


def test_frontier_matches_brute_force_on_random_logs():
    rng = random.Random(99)
    for _ in range(50):
        records = _random_log(rng, rng.randrange(1, 200))
        assert pareto_frontier(records) == _brute_force_frontier(records)


def test_frontier_internal_consistency():
    rng = random.Random(123)
    records = [
        rec(f"k{i}", rng.random(), rng.random(), rng.random(), rng.randrange(1, 10**6))
        for i in range(300)
    ]
    frontier = pareto_frontier(records)
    for m in frontier:
        assert not any(dominates(o.metrics, m.metrics) for o in frontier)
    member_keys = {m.key for m in frontier}
    for r in records:
        if r.key not in member_keys:
            assert any(dominates(m.metrics, r.metrics) for m in frontier)
