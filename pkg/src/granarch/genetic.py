"""Genetic search loop: initialization, selection, variation, and replacement.

Offspring replace the worst members of the population, so the best individual
always survives and per-generation best fitness is non-decreasing. The loop is
bounded by an evaluation budget counting unique evaluator invocations; cached
re-evaluations are free.
"""

from __future__ import annotations

import enum
import random
import time
from dataclasses import dataclass
from typing import Callable, Optional

from .dsp import DspConfig
from .evaluation import (
    BudgetExhausted,
    EvaluationDispatcher,
    EvaluationOutcome,
    Evaluator,
    TrainConfig,
)
from .objectives import MetricsRecord, ObjectiveConfig, pareto_frontier, scalar_fitness
from .runlog import LogRecord
from .search_space import (
    DataGenome,
    Genome,
    LayerGene,
    SearchSpace,
    canonical_encode,
    mutate_loci,
    random_genome,
    trivial_genome,
    trivial_layer,
)


class InitMode(enum.Enum):
    TRIVIAL = "TRIVIAL"
    RANDOM = "RANDOM"


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 10
    update_ratio: float = 0.5
    crossover_ratio: float = 0.2
    eval_budget: int = 300
    tournament_size: int = 2
    init_mode: InitMode = InitMode.TRIVIAL
    seed: int = 0

    def __post_init__(self) -> None:
        if self.population_size < 2:
            raise ValueError(f"population_size must be >= 2, got {self.population_size}")
        if not 0.0 < self.update_ratio <= 1.0:
            raise ValueError(f"update_ratio must be in (0, 1], got {self.update_ratio}")
        if not 0.0 <= self.crossover_ratio <= 1.0:
            raise ValueError(f"crossover_ratio must be in [0, 1], got {self.crossover_ratio}")
        if self.eval_budget < self.population_size:
            raise ValueError(
                f"eval_budget ({self.eval_budget}) must be >= population_size "
                f"({self.population_size})"
            )
        if self.tournament_size < 2:
            raise ValueError(f"tournament_size must be >= 2, got {self.tournament_size}")


@dataclass(frozen=True)
class Member:
    genome: Genome
    key: str
    metrics: MetricsRecord
    fitness: float


@dataclass(frozen=True)
class Population:
    members: tuple[Member, ...]
    generation_index: int = 0


def _selection_order(member: Member) -> tuple[float, int, str]:
    # min() over this picks the preferred member: highest fitness,
    # then smallest model, then smallest canonical key.
    return (-member.fitness, member.metrics.model_size_bytes, member.key)


def _pick(rng: random.Random, a, b):
    return a if rng.random() < 0.5 else b


def _step_ordinal(values: tuple, current, rng: random.Random):
    """Move one position in an ordered value set; boundaries force the legal direction."""
    idx = values.index(current)
    if idx == 0:
        return values[1]
    if idx == len(values) - 1:
        return values[idx - 1]
    return values[idx + rng.choice((-1, 1))]


def mutate(genome: Genome, space: SearchSpace, rng: random.Random) -> Genome:
    """Change exactly one locus of the genome.

    The locus is drawn uniformly among sample rate, preprocessing, layer count,
    and every per-layer gene whose value set allows a change. Ordinal loci step
    one position; categorical loci switch to another value; a layer-count
    increase appends a trivial layer and a decrease drops the last layer.
    """
    loci = mutate_loci(genome, space)
    if not loci:
        return genome
    kind, layer_idx = rng.choice(loci)

    data = genome.data
    layers = list(genome.layers)
    if kind == "SR":
        data = DataGenome(_step_ordinal(space.sample_rates, data.sample_rate_hz, rng), data.preprocessing)
    elif kind == "PT":
        others = tuple(p for p in space.preprocessing_types if p != data.preprocessing)
        data = DataGenome(data.sample_rate_hz, rng.choice(others))
    elif kind == "L":
        n = len(layers)
        if n == space.layers_min:
            grow = True
        elif n == space.layers_max:
            grow = False
        else:
            grow = rng.choice((False, True))
        if grow:
            layers.append(trivial_layer(space))
        else:
            layers.pop()
    else:
        layer = layers[layer_idx]
        if kind == "F":
            layer = LayerGene(_step_ordinal(space.filters, layer.filters, rng), layer.kernel_size, layer.activation)
        elif kind == "FS":
            layer = LayerGene(layer.filters, _step_ordinal(space.kernel_sizes, layer.kernel_size, rng), layer.activation)
        else:  # AF
            others = tuple(a for a in space.activations if a != layer.activation)
            layer = LayerGene(layer.filters, layer.kernel_size, rng.choice(others))
        layers[layer_idx] = layer
    return Genome(data, tuple(layers))


def crossover(parent_a: Genome, parent_b: Genome, rng: random.Random) -> Genome:
    """Gene-wise uniform recombination.

    Each data gene and the layer count come from either parent with equal
    probability. Layers present in both parents mix per-gene; layers present
    in only one parent are copied whole.
    """
    sr = _pick(rng, parent_a.data.sample_rate_hz, parent_b.data.sample_rate_hz)
    pt = _pick(rng, parent_a.data.preprocessing, parent_b.data.preprocessing)
    n = _pick(rng, len(parent_a.layers), len(parent_b.layers))
    layers = []
    for i in range(n):
        in_a = i < len(parent_a.layers)
        in_b = i < len(parent_b.layers)
        if in_a and in_b:
            la, lb = parent_a.layers[i], parent_b.layers[i]
            layers.append(
                LayerGene(
                    _pick(rng, la.filters, lb.filters),
                    _pick(rng, la.kernel_size, lb.kernel_size),
                    _pick(rng, la.activation, lb.activation),
                )
            )
        else:
            layers.append(parent_a.layers[i] if in_a else parent_b.layers[i])
    return Genome(DataGenome(sr, pt), tuple(layers))


def tournament_select(population: Population, k: int, rng: random.Random) -> Genome:
    """Fittest of k members drawn uniformly with replacement.

    Ties break toward the smaller model, then the smaller canonical key.
    """
    members = population.members
    draws = [members[rng.randrange(len(members))] for _ in range(k)]
    return min(draws, key=_selection_order).genome


def step_generation(
    population: Population,
    cfg: GaConfig,
    space: SearchSpace,
    dispatcher: EvaluationDispatcher,
    objective: ObjectiveConfig,
    rng: random.Random,
) -> Population:
    """Produce one generation: offspring replace the worst members.

    Each offspring comes from crossover of two tournament winners with
    probability crossover_ratio, otherwise from mutation of one winner. If the
    evaluation budget runs out mid-generation, the offspring evaluated so far
    still enter the population.
    """
    n_new = max(1, int(cfg.population_size * cfg.update_ratio + 0.5))
    offspring: list[Member] = []
    for _ in range(n_new):
        if rng.random() < cfg.crossover_ratio:
            parent_a = tournament_select(population, cfg.tournament_size, rng)
            parent_b = tournament_select(population, cfg.tournament_size, rng)
            child = crossover(parent_a, parent_b, rng)
        else:
            parent = tournament_select(population, cfg.tournament_size, rng)
            child = mutate(parent, space, rng)
        try:
            outcome = dispatcher.evaluate(child)
        except BudgetExhausted:
            break
        offspring.append(_to_member(child, outcome, objective))

    members = population.members
    order = sorted(range(len(members)), key=lambda i: _selection_order(members[i]))
    replaced = set(order[len(members) - len(offspring):])
    survivors = [m for i, m in enumerate(members) if i not in replaced]
    return Population(tuple(survivors + offspring), population.generation_index + 1)


def _to_member(genome: Genome, outcome: EvaluationOutcome, objective: ObjectiveConfig) -> Member:
    return Member(genome, outcome.key, outcome.metrics, scalar_fitness(outcome.metrics, objective))


@dataclass
class SearchResult:
    log: list[LogRecord]
    frontier: list[LogRecord]
    generations: int
    evaluations: int
    cache_hits: int
    best_fitness: float
    stalled: bool = False


def _initial_genomes(cfg: GaConfig, space: SearchSpace, rng: random.Random) -> list[Genome]:
    if cfg.init_mode is InitMode.TRIVIAL:
        # One trivial individual plus single-step mutants; an all-identical
        # population would make crossover a no-op for a whole generation.
        base = trivial_genome(space)
        return [base] + [mutate(base, space, rng) for _ in range(cfg.population_size - 1)]
    genomes: list[Genome] = []
    seen: set[str] = set()
    for _ in range(cfg.population_size):
        g = random_genome(space, rng)
        for _attempt in range(100):
            if canonical_encode(g) not in seen:
                break
            g = random_genome(space, rng)
        seen.add(canonical_encode(g))
        genomes.append(g)
    return genomes


def run_search(
    cfg: GaConfig,
    space: SearchSpace,
    evaluator: Evaluator,
    *,
    objective: ObjectiveConfig = ObjectiveConfig(),
    dsp: DspConfig = DspConfig(),
    train: Optional[TrainConfig] = None,
    on_record: Optional[Callable[[LogRecord], None]] = None,
    max_stall_generations: int = 1000,
) -> SearchResult:
    """Run a full budget-bounded search and extract the Pareto frontier.

    The log records every unique evaluator invocation in order; rerunning with
    the same config, seed, and evaluator reproduces it exactly (timestamps
    aside). max_stall_generations guards against search spaces too small to
    ever reach the budget with unique genomes.
    """
    if train is None:
        train = TrainConfig(seed=cfg.seed)
    rng = random.Random(cfg.seed)
    log: list[LogRecord] = []
    generation = 0

    dispatcher = EvaluationDispatcher(
        evaluator, dsp, train, eval_budget=cfg.eval_budget
    )

    def record_outcome(outcome: EvaluationOutcome, genome: Genome) -> None:
        rec = LogRecord(
            seq=outcome.seq,
            generation=generation,
            key=outcome.key,
            genome=genome,
            metrics=outcome.metrics,
            fitness=scalar_fitness(outcome.metrics, objective),
            source=evaluator.source,
            timestamp=time.time(),
        )
        log.append(rec)
        if on_record is not None:
            on_record(rec)

    dispatcher.on_evaluated = record_outcome

    members = []
    for genome in _initial_genomes(cfg, space, rng):
        outcome = dispatcher.evaluate(genome)  # budget >= population size, cannot exhaust
        members.append(_to_member(genome, outcome, objective))
    population = Population(tuple(members), 0)

    stall = 0
    stalled = False
    while dispatcher.evaluations < cfg.eval_budget:
        generation = population.generation_index + 1
        before = dispatcher.evaluations
        population = step_generation(population, cfg, space, dispatcher, objective, rng)
        if dispatcher.evaluations == before:
            stall += 1
            if stall >= max_stall_generations:
                stalled = True
                break
        else:
            stall = 0

    return SearchResult(
        log=log,
        frontier=pareto_frontier(log),
        generations=population.generation_index,
        evaluations=dispatcher.evaluations,
        cache_hits=dispatcher.cache_hits,
        best_fitness=max((r.fitness for r in log), default=0.0),
        stalled=stalled,
    )
