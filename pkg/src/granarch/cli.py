"""Command-line surface: run searches, recompute frontiers, estimate footprints, dump features."""

from __future__ import annotations

import argparse
import dataclasses
import sys
from typing import Optional

from .config import ConfigError, EvaluatorKind, RunConfig, load_config, pin_fixed_data
from .dsp import (
    WavError,
    buffer_size_bytes,
    compute_features,
    prepare_window,
    read_wav,
    resample_pow2,
)
from .estimator import estimate_model_size_bytes, realize, total_footprint_bytes
from .evaluation import ExternalEvaluator, SyntheticEvaluator, WorkerError
from .genetic import run_search
from .objectives import pareto_frontier
from .runlog import LogWriter, frontier_csv, read_log
from .search_space import (
    Genome,
    Preprocessing,
    canonical_decode,
    canonical_encode,
    make_genome,
    validate,
)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="granarch")
    sub = parser.add_subparsers(dest="command", required=True)

    p_search = sub.add_parser("search", help="run a genetic search and export the frontier")
    p_search.add_argument("--config", help="JSON run configuration (defaults used if omitted)")
    p_search.add_argument("--seed", type=int, help="override the configured random seed")
    p_search.add_argument("--out", required=True, help="evaluation log output path (JSON lines)")
    p_search.add_argument("--evaluator", choices=["synthetic", "external"])
    p_search.add_argument("--worker-cmd", help="trainer worker command (external evaluator)")
    p_search.add_argument("--fixed-sr", type=int, help="pin the sample rate (Fixed Data mode)")
    p_search.add_argument("--fixed-pt", choices=[p.value for p in Preprocessing],
                          help="pin the preprocessing type (Fixed Data mode)")

    p_pareto = sub.add_parser("pareto", help="print the Pareto frontier of a log as CSV")
    p_pareto.add_argument("log", help="evaluation log path")

    p_est = sub.add_parser("estimate", help="print shape, parameters, and footprint of a genome")
    _add_genome_args(p_est)
    p_est.add_argument("--config", help="JSON run configuration for dsp/estimator overrides")

    p_feat = sub.add_parser("features", help="compute a feature tensor from a WAV file as CSV")
    p_feat.add_argument("--wav", required=True)
    p_feat.add_argument("--sr", type=int, required=True, help="target sample rate in Hz")
    p_feat.add_argument("--pt", choices=[p.value for p in Preprocessing], required=True)
    p_feat.add_argument("--config", help="JSON run configuration for dsp overrides")
    p_feat.add_argument("--out", help="output CSV path (stdout if omitted)")
    return parser


def _add_genome_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--key", help="canonical genome key")
    parser.add_argument("--sr", type=int, help="sample rate in Hz")
    parser.add_argument("--pt", choices=[p.value for p in Preprocessing])
    parser.add_argument(
        "--layer",
        action="append",
        metavar="F,FS,AF",
        help="one conv layer as filters,kernel,activation; repeat per layer",
    )


def _genome_from_args(args) -> Genome:
    if args.key:
        return canonical_decode(args.key)
    if args.sr is None or args.pt is None or not args.layer:
        raise ValueError("provide --key or all of --sr, --pt, and at least one --layer")
    layers = []
    for spec in args.layer:
        parts = spec.split(",")
        if len(parts) != 3:
            raise ValueError(f"bad --layer {spec!r}: expected F,FS,AF")
        layers.append((int(parts[0]), int(parts[1]), parts[2]))
    return make_genome(args.sr, args.pt, layers)


def _load_run_config(path: Optional[str]) -> RunConfig:
    return load_config(path) if path else RunConfig()


def cmd_search(args) -> int:
    try:
        cfg = _load_run_config(args.config)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, ga=dataclasses.replace(cfg.ga, seed=args.seed))
        if args.evaluator:
            cfg = dataclasses.replace(cfg, evaluator=EvaluatorKind(args.evaluator))
        if args.worker_cmd:
            cfg = dataclasses.replace(cfg, worker_command=args.worker_cmd)
        if args.fixed_sr is not None or args.fixed_pt is not None:
            if args.fixed_sr is None or args.fixed_pt is None:
                raise ConfigError("fixed_data", "--fixed-sr and --fixed-pt must be given together")
            cfg = pin_fixed_data(cfg, args.fixed_sr, Preprocessing(args.fixed_pt))
        if cfg.evaluator is EvaluatorKind.EXTERNAL and not cfg.worker_command:
            raise ConfigError("worker_command", "required when evaluator is external")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if cfg.evaluator is EvaluatorKind.EXTERNAL:
        evaluator = ExternalEvaluator(cfg.worker_command)
        try:
            evaluator.start()
        except WorkerError as exc:
            print(f"worker spawn failure: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
    else:
        evaluator = SyntheticEvaluator(cfg.estimator)

    train = dataclasses.replace(cfg.train, seed=cfg.ga.seed)
    try:
        with LogWriter(args.out) as writer:
            result = run_search(
                cfg.ga,
                cfg.space,
                evaluator,
                objective=cfg.objective,
                dsp=cfg.dsp,
                train=train,
                on_record=writer.append,
            )
        frontier_path = args.out + ".pareto.csv"
        with open(frontier_path, "w", encoding="utf-8") as fh:
            fh.write(frontier_csv(result.frontier, n_layer_columns=max(5, cfg.space.layers_max)))
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    finally:
        if isinstance(evaluator, ExternalEvaluator):
            evaluator.close()

    print(f"generations: {result.generations}")
    print(f"unique evaluations: {result.evaluations}")
    print(f"cache hits: {result.cache_hits}")
    print(f"best fitness: {result.best_fitness:.6f}")
    print(f"frontier size: {len(result.frontier)}")
    print(f"log: {args.out}")
    print(f"frontier: {frontier_path}")
    if result.stalled:
        print("warning: search stalled before reaching the evaluation budget", file=sys.stderr)
    return EXIT_OK


def cmd_pareto(args) -> int:
    try:
        records, errors = read_log(args.log)
    except OSError as exc:
        print(f"cannot read log: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for lineno, message in errors:
        print(f"{args.log}:{lineno}: {message}", file=sys.stderr)
    n_layers = max([5] + [len(r.genome.layers) for r in records])
    sys.stdout.write(frontier_csv(pareto_frontier(records), n_layer_columns=n_layers))
    return EXIT_OK


def cmd_estimate(args) -> int:
    try:
        cfg = _load_run_config(args.config)
        genome = _genome_from_args(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    violations = validate(genome, cfg.space)
    if violations:
        for v in violations:
            print(f"invalid genome: {v}", file=sys.stderr)
        return EXIT_CONFIG

    spec = realize(genome, cfg.dsp, cfg.estimator)
    rows, cols, channels = spec.input_shape
    buffer_bytes = buffer_size_bytes(
        cfg.dsp.sample_bits, genome.data.sample_rate_hz, cfg.dsp.window_s
    )
    print(f"genome: {canonical_encode(genome)}")
    print(f"feature shape: {rows} x {cols} x {channels}")
    print(f"parameters: {spec.total_parameters}")
    print(f"model size estimate: {estimate_model_size_bytes(genome, cfg.dsp, cfg.estimator)} B")
    print(f"input buffer: {buffer_bytes} B")
    print(f"total footprint: {total_footprint_bytes(genome, cfg.dsp, cfg.estimator)} B")
    return EXIT_OK


def cmd_features(args) -> int:
    try:
        cfg = _load_run_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        samples, rate = read_wav(args.wav)
        samples = resample_pow2(samples, rate, args.sr)
    except (WavError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    windowed = prepare_window(samples, args.sr, cfg.dsp.window_s)
    tensor = compute_features(windowed, Preprocessing(args.pt), cfg.dsp, args.sr)

    lines = [",".join(repr(v) for v in row) for row in tensor.values.tolist()]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "search": cmd_search,
        "pareto": cmd_pareto,
        "estimate": cmd_estimate,
        "features": cmd_features,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
