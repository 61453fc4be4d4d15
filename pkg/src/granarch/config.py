"""Run configuration: a JSON key/value tree with every parameter defaulted.

An empty document is a complete, valid configuration reproducing the default
experiment setup; sections override individual fields. fixed_data pins the two
data genes and shrinks the search space to the pinned values.
"""

from __future__ import annotations

import dataclasses
import enum
import json
from dataclasses import dataclass
from typing import Any, Optional

from .dsp import DspConfig
from .estimator import EstimatorConfig
from .evaluation import TrainConfig
from .genetic import GaConfig, InitMode
from .objectives import ObjectiveConfig
from .search_space import Activation, Preprocessing, SearchSpace


class ConfigError(Exception):
    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")


class EvaluatorKind(enum.Enum):
    SYNTHETIC = "synthetic"
    EXTERNAL = "external"


@dataclass(frozen=True)
class RunConfig:
    ga: GaConfig = GaConfig()
    space: SearchSpace = SearchSpace()
    dsp: DspConfig = DspConfig()
    objective: ObjectiveConfig = ObjectiveConfig()
    estimator: EstimatorConfig = EstimatorConfig()
    train: TrainConfig = TrainConfig()
    evaluator: EvaluatorKind = EvaluatorKind.SYNTHETIC
    worker_command: Optional[str] = None
    fixed_data: Optional[tuple[int, Preprocessing]] = None


_SECTIONS = {
    "ga",
    "space",
    "dsp",
    "objective",
    "estimator",
    "train",
    "evaluator",
    "worker_command",
    "fixed_data",
}


def _parse_enum(enum_cls, raw: Any, field: str):
    if isinstance(raw, enum_cls):
        return raw
    if isinstance(raw, str):
        for member in enum_cls:
            if raw == member.value or raw.upper() == member.name:
                return member
    allowed = ", ".join(m.value for m in enum_cls)
    raise ConfigError(field, f"expected one of {allowed}, got {raw!r}")


def _apply_section(defaults, overrides: dict, section: str, coerce=None):
    known = {f.name: f for f in dataclasses.fields(defaults)}
    kwargs = {}
    for name, raw in overrides.items():
        if name not in known:
            raise ConfigError(f"{section}.{name}", "unknown field")
        kwargs[name] = coerce(name, raw) if coerce else raw
    try:
        return dataclasses.replace(defaults, **kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(section, str(exc)) from None


def _coerce_ga(name: str, raw):
    if name == "init_mode":
        return _parse_enum(InitMode, raw, "ga.init_mode")
    return raw


def _coerce_space(name: str, raw):
    if name == "preprocessing_types":
        return tuple(_parse_enum(Preprocessing, v, f"space.{name}") for v in raw)
    if name == "activations":
        return tuple(_parse_enum(Activation, v, f"space.{name}") for v in raw)
    if name in ("sample_rates", "filters", "kernel_sizes"):
        return tuple(raw)
    return raw


def parse_config(doc: dict) -> RunConfig:
    """Build a RunConfig from a parsed JSON document, materializing all defaults."""
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "configuration must be a JSON object")
    unknown = set(doc) - _SECTIONS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown section")

    ga = _apply_section(GaConfig(), doc.get("ga", {}), "ga", _coerce_ga)
    space = _apply_section(SearchSpace(), doc.get("space", {}), "space", _coerce_space)
    dsp = _apply_section(DspConfig(), doc.get("dsp", {}), "dsp")
    objective = _apply_section(ObjectiveConfig(), doc.get("objective", {}), "objective")
    estimator = _apply_section(EstimatorConfig(), doc.get("estimator", {}), "estimator")
    train = _apply_section(TrainConfig(), doc.get("train", {}), "train")
    evaluator = _parse_enum(EvaluatorKind, doc.get("evaluator", "synthetic"), "evaluator")
    worker_command = doc.get("worker_command")
    if worker_command is not None and not isinstance(worker_command, str):
        raise ConfigError("worker_command", "must be a string")
    if evaluator is EvaluatorKind.EXTERNAL and not worker_command:
        raise ConfigError("worker_command", "required when evaluator is external")

    fixed_data = None
    if doc.get("fixed_data") is not None:
        raw = doc["fixed_data"]
        if not isinstance(raw, dict) or set(raw) != {"sample_rate_hz", "preprocessing"}:
            raise ConfigError("fixed_data", "expected {sample_rate_hz, preprocessing}")
        sr = raw["sample_rate_hz"]
        if not isinstance(sr, int) or sr <= 0:
            raise ConfigError("fixed_data.sample_rate_hz", f"must be a positive integer, got {sr!r}")
        pt = _parse_enum(Preprocessing, raw["preprocessing"], "fixed_data.preprocessing")
        fixed_data = (sr, pt)

    cfg = RunConfig(ga, space, dsp, objective, estimator, train, evaluator, worker_command, fixed_data)
    return pin_fixed_data(cfg) if fixed_data else cfg


def pin_fixed_data(cfg: RunConfig, sr: Optional[int] = None, pt: Optional[Preprocessing] = None) -> RunConfig:
    """Pin the data genes for the whole run; the space shrinks to the pinned values."""
    if sr is None or pt is None:
        assert cfg.fixed_data is not None
        sr, pt = cfg.fixed_data
    space = dataclasses.replace(cfg.space, sample_rates=(sr,), preprocessing_types=(pt,))
    return dataclasses.replace(cfg, space=space, fixed_data=(sr, pt))


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from None
    return parse_config(doc)


def serialize_config(cfg: RunConfig) -> dict:
    """Full document with every default materialized; parse(serialize(c)) == c."""
    doc: dict[str, Any] = {
        "ga": {
            "population_size": cfg.ga.population_size,
            "update_ratio": cfg.ga.update_ratio,
            "crossover_ratio": cfg.ga.crossover_ratio,
            "eval_budget": cfg.ga.eval_budget,
            "tournament_size": cfg.ga.tournament_size,
            "init_mode": cfg.ga.init_mode.value,
            "seed": cfg.ga.seed,
        },
        "space": {
            "sample_rates": list(cfg.space.sample_rates),
            "preprocessing_types": [p.value for p in cfg.space.preprocessing_types],
            "layers_min": cfg.space.layers_min,
            "layers_max": cfg.space.layers_max,
            "filters": list(cfg.space.filters),
            "kernel_sizes": list(cfg.space.kernel_sizes),
            "activations": [a.value for a in cfg.space.activations],
        },
        "dsp": {
            "window_s": cfg.dsp.window_s,
            "frame_size": cfg.dsp.frame_size,
            "hop_length": cfg.dsp.hop_length,
            "n_mels": cfg.dsp.n_mels,
            "n_mfcc": cfg.dsp.n_mfcc,
            "sample_bits": cfg.dsp.sample_bits,
            "source_rate_hz": cfg.dsp.source_rate_hz,
        },
        "objective": {"approx_model_size_range": cfg.objective.approx_model_size_range},
        "estimator": {
            "bytes_per_weight": cfg.estimator.bytes_per_weight,
            "serialization_overhead_bytes": cfg.estimator.serialization_overhead_bytes,
        },
        "train": {
            "epochs": cfg.train.epochs,
            "batch_size": cfg.train.batch_size,
            "dataset_dir": cfg.train.dataset_dir,
            "seed": cfg.train.seed,
        },
        "evaluator": cfg.evaluator.value,
        "worker_command": cfg.worker_command,
        "fixed_data": None,
    }
    if cfg.fixed_data is not None:
        sr, pt = cfg.fixed_data
        doc["fixed_data"] = {"sample_rate_hz": sr, "preprocessing": pt.value}
    return doc
