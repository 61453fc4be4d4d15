"""Genome types for joint input-granularity / CNN-layer candidates and their search space.

A candidate couples two data genes (sample rate, preprocessing type) with an
ordered list of convolutional layer genes. The search space fixes the allowed
value set for every gene and thereby also the mutation neighborhoods.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union


class Preprocessing(enum.Enum):
    """Audio preprocessing type. Values are the short codes used in text keys."""

    SPECTROGRAM = "SP"
    MEL_SPECTROGRAM = "MS"
    MFCC = "MFCC"


class Activation(enum.Enum):
    """Per-layer activation function. Values are the single-letter key codes."""

    RELU = "R"
    SIGMOID = "S"


@dataclass(frozen=True)
class DataGenome:
    sample_rate_hz: int
    preprocessing: Preprocessing


@dataclass(frozen=True)
class LayerGene:
    filters: int
    kernel_size: int
    activation: Activation


@dataclass(frozen=True)
class Genome:
    data: DataGenome
    layers: tuple[LayerGene, ...]


PreprocessingLike = Union[Preprocessing, str]
ActivationLike = Union[Activation, str]


def _as_preprocessing(value: PreprocessingLike) -> Preprocessing:
    if isinstance(value, Preprocessing):
        return value
    try:
        return Preprocessing(value)
    except ValueError:
        try:
            return Preprocessing[value]
        except KeyError:
            raise ValueError(f"unknown preprocessing: {value!r}") from None


def _as_activation(value: ActivationLike) -> Activation:
    if isinstance(value, Activation):
        return value
    try:
        return Activation(value)
    except ValueError:
        try:
            return Activation[value]
        except KeyError:
            raise ValueError(f"unknown activation: {value!r}") from None


def make_genome(
    sample_rate_hz: int,
    preprocessing: PreprocessingLike,
    layers: Iterable[tuple[int, int, ActivationLike]],
) -> Genome:
    """Build a Genome from plain values; accepts enum members or their codes/names."""
    data = DataGenome(sample_rate_hz, _as_preprocessing(preprocessing))
    genes = tuple(LayerGene(f, k, _as_activation(a)) for f, k, a in layers)
    return Genome(data, genes)


def _check_increasing(name: str, values: Sequence[int]) -> None:
    if not values:
        raise ValueError(f"{name}: must be non-empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{name}: values must be strictly increasing, got {values}")


@dataclass(frozen=True)
class SearchSpace:
    """Allowed value sets per gene.

    Ordinal sets (sample_rates, filters, kernel_sizes) are strictly increasing
    tuples; categorical sets (preprocessing_types, activations) are ordered so
    that "first listed" is well defined for trivial individuals.
    """

    sample_rates: tuple[int, ...] = (375, 750, 1500, 3000, 6000, 12000, 24000, 48000)
    preprocessing_types: tuple[Preprocessing, ...] = (
        Preprocessing.SPECTROGRAM,
        Preprocessing.MEL_SPECTROGRAM,
        Preprocessing.MFCC,
    )
    layers_min: int = 1
    layers_max: int = 5
    filters: tuple[int, ...] = (2, 4, 8, 16, 32, 64, 128)
    kernel_sizes: tuple[int, ...] = (3, 5)
    activations: tuple[Activation, ...] = (Activation.RELU, Activation.SIGMOID)

    def __post_init__(self) -> None:
        _check_increasing("sample_rates", self.sample_rates)
        _check_increasing("filters", self.filters)
        _check_increasing("kernel_sizes", self.kernel_sizes)
        if not self.preprocessing_types:
            raise ValueError("preprocessing_types: must be non-empty")
        if not self.activations:
            raise ValueError("activations: must be non-empty")
        if len(set(self.preprocessing_types)) != len(self.preprocessing_types):
            raise ValueError("preprocessing_types: duplicate values")
        if len(set(self.activations)) != len(self.activations):
            raise ValueError("activations: duplicate values")
        if self.layers_min < 1:
            raise ValueError(f"layers_min: must be >= 1, got {self.layers_min}")
        if self.layers_max < self.layers_min:
            raise ValueError(
                f"layers_max: must be >= layers_min ({self.layers_min}), got {self.layers_max}"
            )
        if any(r <= 0 for r in self.sample_rates):
            raise ValueError("sample_rates: values must be positive")
        if any(f <= 0 for f in self.filters):
            raise ValueError("filters: values must be positive")
        if any(k <= 0 or k % 2 == 0 for k in self.kernel_sizes):
            raise ValueError("kernel_sizes: values must be positive odd integers")


def validate(genome: Genome, space: SearchSpace) -> list[str]:
    """Check every gene against its value set; returns a list of violations (empty = ok)."""
    violations = []
    if genome.data.sample_rate_hz not in space.sample_rates:
        violations.append(f"sample_rate not in set: {genome.data.sample_rate_hz}")
    if genome.data.preprocessing not in space.preprocessing_types:
        violations.append(f"preprocessing not in set: {genome.data.preprocessing.value}")
    n = len(genome.layers)
    if not space.layers_min <= n <= space.layers_max:
        violations.append(
            f"layer count out of range: {n} not in [{space.layers_min}, {space.layers_max}]"
        )
    for i, layer in enumerate(genome.layers):
        if layer.filters not in space.filters:
            violations.append(f"layer {i}: filters not in set: {layer.filters}")
        if layer.kernel_size not in space.kernel_sizes:
            violations.append(f"layer {i}: kernel_size not in set: {layer.kernel_size}")
        if layer.activation not in space.activations:
            violations.append(f"layer {i}: activation not in set: {layer.activation.value}")
    return violations


def canonical_encode(genome: Genome) -> str:
    """Deterministic, injective text key for a genome.

    Grammar: ``SR:<hz>|PT:<SP|MS|MFCC>|L:<n>`` followed by one
    ``|F:<f>,FS:<k>,AF:<R|S>`` block per layer.
    """
    parts = [
        f"SR:{genome.data.sample_rate_hz}",
        f"PT:{genome.data.preprocessing.value}",
        f"L:{len(genome.layers)}",
    ]
    for layer in genome.layers:
        parts.append(f"F:{layer.filters},FS:{layer.kernel_size},AF:{layer.activation.value}")
    return "|".join(parts)


def canonical_decode(key: str) -> Genome:
    """Inverse of canonical_encode; raises ValueError on any grammar violation."""
    fields = key.split("|")
    if len(fields) < 3:
        raise ValueError(f"bad genome key: {key!r}")
    sr = _expect_int(fields[0], "SR")
    pt = _expect_prefix(fields[1], "PT")
    n = _expect_int(fields[2], "L")
    if len(fields) - 3 != n:
        raise ValueError(f"bad genome key: layer count {n} but {len(fields) - 3} layer blocks")
    layers = []
    for block in fields[3:]:
        sub = block.split(",")
        if len(sub) != 3:
            raise ValueError(f"bad layer block: {block!r}")
        f = _expect_int(sub[0], "F")
        k = _expect_int(sub[1], "FS")
        a = _expect_prefix(sub[2], "AF")
        layers.append((f, k, a))
    return make_genome(sr, pt, layers)


def _expect_prefix(field_text: str, tag: str) -> str:
    prefix = tag + ":"
    if not field_text.startswith(prefix):
        raise ValueError(f"expected {tag!r} field, got {field_text!r}")
    return field_text[len(prefix):]


def _expect_int(field_text: str, tag: str) -> int:
    raw = _expect_prefix(field_text, tag)
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"expected integer for {tag}, got {raw!r}") from None


def trivial_layer(space: SearchSpace) -> LayerGene:
    """The minimal layer gene: smallest filter count and kernel, first activation."""
    return LayerGene(space.filters[0], space.kernel_sizes[0], space.activations[0])


def trivial_genome(space: SearchSpace) -> Genome:
    """The smallest individual: every ordinal gene at its set minimum,
    layer count at layers_min, categoricals at the first listed value."""
    data = DataGenome(space.sample_rates[0], space.preprocessing_types[0])
    return Genome(data, (trivial_layer(space),) * space.layers_min)


Locus = tuple[str, int]  # ("SR" | "PT" | "L" | "F" | "FS" | "AF", layer index or -1)


def mutate_loci(genome: Genome, space: SearchSpace) -> list[Locus]:
    """Mutable loci of a genome under a space: singleton value sets are excluded."""
    loci: list[Locus] = []
    if len(space.sample_rates) > 1:
        loci.append(("SR", -1))
    if len(space.preprocessing_types) > 1:
        loci.append(("PT", -1))
    if space.layers_min < space.layers_max:
        loci.append(("L", -1))
    for i in range(len(genome.layers)):
        if len(space.filters) > 1:
            loci.append(("F", i))
        if len(space.kernel_sizes) > 1:
            loci.append(("FS", i))
        if len(space.activations) > 1:
            loci.append(("AF", i))
    return loci


def random_genome(space: SearchSpace, rng: random.Random) -> Genome:
    """Draw each gene uniformly from its set; layer count uniform over the allowed range."""
    data = DataGenome(rng.choice(space.sample_rates), rng.choice(space.preprocessing_types))
    n = rng.randint(space.layers_min, space.layers_max)
    layers = tuple(
        LayerGene(
            rng.choice(space.filters),
            rng.choice(space.kernel_sizes),
            rng.choice(space.activations),
        )
        for _ in range(n)
    )
    return Genome(data, layers)
