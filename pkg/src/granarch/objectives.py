"""Metric normalization, scalar fitness, dominance, and Pareto frontier extraction.

The scalar fitness (sum of the three predictive metrics plus a normalized size
term) is used only for internal comparison during the search; the final output
is the Pareto frontier over all four raw metrics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Protocol


@dataclass(frozen=True)
class MetricsRecord:
    """Result of evaluating one genome.

    Infeasible records (trainer crash, protocol violation, timeout) carry an
    error description, are assigned fitness 0, and never enter the frontier.
    """

    accuracy: float
    precision: float
    recall: float
    model_size_bytes: int
    feasible: bool = True
    error: Optional[str] = None

    def __post_init__(self) -> None:
        if self.feasible:
            for name in ("accuracy", "precision", "recall"):
                v = getattr(self, name)
                if not 0.0 <= v <= 1.0:
                    raise ValueError(f"{name} out of [0, 1]: {v}")
            if self.model_size_bytes < 0:
                raise ValueError(f"model_size_bytes negative: {self.model_size_bytes}")


def infeasible_record(error: str) -> MetricsRecord:
    return MetricsRecord(0.0, 0.0, 0.0, 0, feasible=False, error=error)


@dataclass(frozen=True)
class ObjectiveConfig:
    approx_model_size_range: float = 100_000.0

    def __post_init__(self) -> None:
        if self.approx_model_size_range <= 0:
            raise ValueError(
                f"approx_model_size_range must be positive, got {self.approx_model_size_range}"
            )


def normalize_size(model_size_bytes: float, cfg: ObjectiveConfig) -> float:
    """Map a byte count into (0, 1]: exp(-size / approx_model_size_range)."""
    return math.exp(-model_size_bytes / cfg.approx_model_size_range)


def scalar_fitness(m: MetricsRecord, cfg: ObjectiveConfig) -> float:
    """Sum of accuracy, precision, recall, and the normalized size term; 0 if infeasible."""
    if not m.feasible:
        return 0.0
    return m.accuracy + m.precision + m.recall + normalize_size(m.model_size_bytes, cfg)


def dominates(a: MetricsRecord, b: MetricsRecord) -> bool:
    """True iff a is at least as good as b on all four metrics and strictly better on one.

    Higher is better for accuracy/precision/recall, lower is better for size.
    """
    if not (
        a.accuracy >= b.accuracy
        and a.precision >= b.precision
        and a.recall >= b.recall
        and a.model_size_bytes <= b.model_size_bytes
    ):
        return False
    return (
        a.accuracy > b.accuracy
        or a.precision > b.precision
        or a.recall > b.recall
        or a.model_size_bytes < b.model_size_bytes
    )


class EvaluatedRecord(Protocol):
    """Anything carrying a canonical genome key, its metrics, and a scalar fitness."""

    key: str
    metrics: MetricsRecord
    fitness: float


def _metric_tuple(m: MetricsRecord) -> tuple[float, float, float, int]:
    return (m.accuracy, m.precision, m.recall, m.model_size_bytes)


def pareto_frontier(records: Iterable[EvaluatedRecord]) -> list[EvaluatedRecord]:
    """Non-dominated feasible records, deduplicated and sorted by model size.

    Records sharing a genome key are collapsed to the best-fitness occurrence
    before filtering. Frontier members tied on all four metrics are collapsed
    to the lexicographically smallest key.
    """
    best_by_key: dict[str, EvaluatedRecord] = {}
    for rec in records:
        if not rec.metrics.feasible:
            continue
        held = best_by_key.get(rec.key)
        if held is None or _dedup_order(rec) < _dedup_order(held):
            best_by_key[rec.key] = rec

    # Size-sorted sweep: a record can only be dominated by one that sorts
    # before it (smaller size, or equal size with metrics that are no worse),
    # and by transitivity it suffices to test against records already kept.
    ordered = sorted(
        best_by_key.values(),
        key=lambda r: (
            r.metrics.model_size_bytes,
            -r.metrics.accuracy,
            -r.metrics.precision,
            -r.metrics.recall,
        ),
    )
    non_dominated: list[EvaluatedRecord] = []
    for rec in ordered:
        if not any(dominates(kept.metrics, rec.metrics) for kept in non_dominated):
            non_dominated.append(rec)

    # Exact four-metric ties keep one representative each.
    by_metrics: dict[tuple[float, float, float, int], EvaluatedRecord] = {}
    for rec in non_dominated:
        t = _metric_tuple(rec.metrics)
        held = by_metrics.get(t)
        if held is None or rec.key < held.key:
            by_metrics[t] = rec

    return sorted(by_metrics.values(), key=lambda r: (r.metrics.model_size_bytes, r.key))


def _dedup_order(rec: EvaluatedRecord) -> tuple[float, int, str]:
    # Prefer higher fitness, then smaller size, then smaller key.
    return (-rec.fitness, rec.metrics.model_size_bytes, rec.key)
