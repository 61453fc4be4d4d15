"""Realizes genomes into concrete CNN descriptions and estimates their size in bytes.

The realized network is a stack of stride-1, same-padding 2-D convolutions
followed by flatten, a hidden dense layer, and a dense output layer, so every
genome is realizable and spatial dimensions pass through unchanged. The byte
estimate is analytic (weights at bytes_per_weight plus a flat serialization
overhead); an external trainer can replace it with a measured value.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .dsp import DspConfig, buffer_size_bytes, feature_shape
from .search_space import Activation, Genome


@dataclass(frozen=True)
class EstimatorConfig:
    bytes_per_weight: int = 4
    serialization_overhead_bytes: int = 2048

    def __post_init__(self) -> None:
        if self.bytes_per_weight not in (1, 2, 4, 8):
            raise ValueError(f"bytes_per_weight must be 1, 2, 4, or 8, got {self.bytes_per_weight}")
        if self.serialization_overhead_bytes < 0:
            raise ValueError("serialization_overhead_bytes must be non-negative")


@dataclass(frozen=True)
class ConvLayerSpec:
    filters: int
    kernel_size: int
    activation: Activation
    output_shape: tuple[int, int, int]


@dataclass(frozen=True)
class ArchitectureSpec:
    input_shape: tuple[int, int, int]
    conv_layers: tuple[ConvLayerSpec, ...]
    dense_width: int
    n_classes: int
    total_parameters: int


DENSE_WIDTH = 10
N_CLASSES = 2


def realize(
    genome: Genome,
    dsp: DspConfig,
    cfg: EstimatorConfig = EstimatorConfig(),
    dense_width: int = DENSE_WIDTH,
    n_classes: int = N_CLASSES,
) -> ArchitectureSpec:
    """Concrete architecture for a genome: convolutions in gene order, then dense head."""
    rows, cols, channels = feature_shape(genome.data, dsp)
    conv_layers = tuple(
        ConvLayerSpec(g.filters, g.kernel_size, g.activation, (rows, cols, g.filters))
        for g in genome.layers
    )
    spec = ArchitectureSpec((rows, cols, channels), conv_layers, dense_width, n_classes, 0)
    return replace(spec, total_parameters=count_parameters(spec))


def count_parameters(spec: ArchitectureSpec) -> int:
    """Trainable parameter count: conv kernels and biases plus the two dense layers."""
    total = 0
    c_in = spec.input_shape[2]
    for layer in spec.conv_layers:
        total += (layer.kernel_size**2 * c_in + 1) * layer.filters
        c_in = layer.filters
    rows, cols, _ = spec.input_shape
    flat = rows * cols * c_in
    total += (flat + 1) * spec.dense_width
    total += (spec.dense_width + 1) * spec.n_classes
    return total


def estimate_model_size_bytes(
    genome: Genome, dsp: DspConfig, cfg: EstimatorConfig = EstimatorConfig()
) -> int:
    """Serialized size estimate: weight bytes plus flat container overhead."""
    spec = realize(genome, dsp, cfg)
    return spec.total_parameters * cfg.bytes_per_weight + cfg.serialization_overhead_bytes


def total_footprint_bytes(
    genome: Genome, dsp: DspConfig, cfg: EstimatorConfig = EstimatorConfig()
) -> int:
    """Model bytes plus the raw input buffer and one feature tensor.

    The model-size objective alone understates deployment memory; the input
    buffer scales with the genome's sample rate and the feature tensor with
    its preprocessing type.
    """
    rows, cols, _ = feature_shape(genome.data, dsp)
    return (
        estimate_model_size_bytes(genome, dsp, cfg)
        + buffer_size_bytes(dsp.sample_bits, genome.data.sample_rate_hz, dsp.window_s)
        + rows * cols * cfg.bytes_per_weight
    )
