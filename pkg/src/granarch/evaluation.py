"""Performance estimation: evaluator contract, synthetic oracle, cache, worker client.

Two evaluators implement the same contract. The synthetic oracle is a fully
deterministic closed-form stand-in for a training run, so searches are
reproducible and fast; the external evaluator delegates to a trainer worker
process over a line-delimited JSON protocol on stdin/stdout.
"""

from __future__ import annotations

import json
import math
import queue
import shlex
import subprocess
import threading
from dataclasses import dataclass
from typing import Callable, Optional, Protocol

from .dsp import DspConfig
from .estimator import EstimatorConfig, estimate_model_size_bytes, realize
from .objectives import MetricsRecord, infeasible_record
from .search_space import Genome, Preprocessing, canonical_encode, make_genome

PROTOCOL_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    batch_size: int = 32
    dataset_dir: str = ""
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass(frozen=True)
class EvaluationRequest:
    id: int
    genome: Genome
    dsp: DspConfig
    train: TrainConfig


class Evaluator(Protocol):
    """Common contract: map a request to a MetricsRecord, never raise for a bad genome."""

    source: str

    def evaluate(self, request: EvaluationRequest) -> MetricsRecord: ...


# ---------------------------------------------------------------------------
# Synthetic oracle
# ---------------------------------------------------------------------------

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF

# Invented accuracy model: saturating gains from data granularity and model
# capacity, with a small preprocessing-type multiplier favoring MFCC.
_PT_FACTOR = {Preprocessing.MFCC: 1.00, Preprocessing.MEL_SPECTROGRAM: 0.97, Preprocessing.SPECTROGRAM: 0.94}
_CAPACITY_SCALE = 20_000.0


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash."""
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK64
    return h


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def oracle_noise(key: str, seed: int, salt: int) -> float:
    """Deterministic pseudo-noise in [-0.02, 0.02] keyed by genome, seed, and salt."""
    h = fnv1a64(f"{key}:{seed}:{salt}".encode())
    return ((h % 4001) / 4000.0 - 0.5) * 0.04


def oracle_base(genome: Genome, dsp: DspConfig, cfg: EstimatorConfig = EstimatorConfig()) -> float:
    """Pre-noise oracle accuracy for a genome.

    Monotone non-decreasing in sample rate and parameter count; MFCC >= mel
    spectrogram >= spectrogram at equal granularity and capacity.
    """
    params = realize(genome, dsp, cfg).total_parameters
    g = _clamp01(math.log2(genome.data.sample_rate_hz / 375) / 7)
    c = _clamp01(params / _CAPACITY_SCALE)
    granularity = 0.6 + 0.4 * (1 - math.exp(-4 * g)) / (1 - math.exp(-4))
    capacity = 0.7 + 0.3 * (1 - math.exp(-5 * c)) / (1 - math.exp(-5))
    return _PT_FACTOR[genome.data.preprocessing] * granularity * capacity


def synthetic_oracle(
    genome: Genome, dsp: DspConfig, cfg: EstimatorConfig, seed: int
) -> MetricsRecord:
    """Deterministic surrogate for a full training run."""
    key = canonical_encode(genome)
    base = oracle_base(genome, dsp, cfg)
    accuracy = _clamp01(base + oracle_noise(key, seed, 1))
    precision = _clamp01(accuracy - 0.03 + oracle_noise(key, seed, 2))
    recall = _clamp01(accuracy - 0.01 + oracle_noise(key, seed, 3))
    return MetricsRecord(accuracy, precision, recall, estimate_model_size_bytes(genome, dsp, cfg))


class SyntheticEvaluator:
    """Evaluator backed by the synthetic oracle; pure and freely parallel."""

    source = "synthetic"

    def __init__(self, estimator: EstimatorConfig = EstimatorConfig()):
        self.estimator = estimator

    def evaluate(self, request: EvaluationRequest) -> MetricsRecord:
        return synthetic_oracle(request.genome, request.dsp, self.estimator, request.train.seed)


# ---------------------------------------------------------------------------
# Cache and budgeted dispatch
# ---------------------------------------------------------------------------


class EvaluationCache:
    """Canonical key -> MetricsRecord map; insert-once, safe for concurrent use."""

    def __init__(self) -> None:
        self._records: dict[str, MetricsRecord] = {}
        self._lock = threading.Lock()

    def get(self, key: str) -> Optional[MetricsRecord]:
        with self._lock:
            return self._records.get(key)

    def put(self, key: str, record: MetricsRecord) -> None:
        with self._lock:
            self._records.setdefault(key, record)

    def __contains__(self, key: str) -> bool:
        return self.get(key) is not None

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)


class BudgetExhausted(RuntimeError):
    """Raised by the dispatcher when a fresh evaluation would exceed the budget."""


@dataclass(frozen=True)
class EvaluationOutcome:
    key: str
    metrics: MetricsRecord
    from_cache: bool
    seq: Optional[int]  # 1-based evaluator-invocation number; None for cache hits


class EvaluationDispatcher:
    """Routes genome evaluations through the cache and enforces the evaluation budget.

    Cache hits are free; each fresh evaluation consumes one unit of budget and
    gets a strictly increasing sequence number. Evaluator exceptions become
    infeasible records so a failing worker can never abort a search.
    """

    def __init__(
        self,
        evaluator: Evaluator,
        dsp: DspConfig,
        train: TrainConfig,
        cache: Optional[EvaluationCache] = None,
        eval_budget: Optional[int] = None,
    ):
        self.evaluator = evaluator
        self.dsp = dsp
        self.train = train
        self.cache = cache if cache is not None else EvaluationCache()
        self.eval_budget = eval_budget
        self.evaluations = 0
        self.cache_hits = 0
        # Called once per fresh evaluation with (outcome, genome); cache hits skip it.
        self.on_evaluated: Optional[Callable[[EvaluationOutcome, Genome], None]] = None

    def evaluate(self, genome: Genome) -> EvaluationOutcome:
        key = canonical_encode(genome)
        cached = self.cache.get(key)
        if cached is not None:
            self.cache_hits += 1
            return EvaluationOutcome(key, cached, True, None)
        if self.eval_budget is not None and self.evaluations >= self.eval_budget:
            raise BudgetExhausted(f"evaluation budget of {self.eval_budget} reached")
        self.evaluations += 1
        request = EvaluationRequest(self.evaluations, genome, self.dsp, self.train)
        try:
            record = self.evaluator.evaluate(request)
        except Exception as exc:  # contract: failures become infeasible records
            record = infeasible_record(f"evaluator failure: {exc}")
        self.cache.put(key, record)
        outcome = EvaluationOutcome(key, record, False, self.evaluations)
        if self.on_evaluated is not None:
            self.on_evaluated(outcome, genome)
        return outcome


# ---------------------------------------------------------------------------
# Wire format
# ---------------------------------------------------------------------------


def genome_to_wire(genome: Genome) -> dict:
    return {
        "sample_rate_hz": genome.data.sample_rate_hz,
        "preprocessing": genome.data.preprocessing.value,
        "layers": [
            {"filters": g.filters, "kernel_size": g.kernel_size, "activation": g.activation.name}
            for g in genome.layers
        ],
    }


def genome_from_wire(obj: dict) -> Genome:
    return make_genome(
        int(obj["sample_rate_hz"]),
        obj["preprocessing"],
        [(int(g["filters"]), int(g["kernel_size"]), g["activation"]) for g in obj["layers"]],
    )


def dsp_to_wire(dsp: DspConfig) -> dict:
    return {
        "window_s": dsp.window_s,
        "frame_size": dsp.frame_size,
        "hop_length": dsp.hop_length,
        "n_mels": dsp.n_mels,
        "n_mfcc": dsp.n_mfcc,
        "sample_bits": dsp.sample_bits,
        "source_rate_hz": dsp.source_rate_hz,
    }


def request_to_wire(request: EvaluationRequest) -> dict:
    return {
        "type": "evaluate",
        "id": request.id,
        "genome": genome_to_wire(request.genome),
        "dsp": dsp_to_wire(request.dsp),
        "train": {
            "epochs": request.train.epochs,
            "batch_size": request.train.batch_size,
            "dataset_dir": request.train.dataset_dir,
            "seed": request.train.seed,
        },
    }


# ---------------------------------------------------------------------------
# External trainer worker
# ---------------------------------------------------------------------------


class WorkerError(Exception):
    """Spawn, handshake, or stream failure of a trainer worker process."""


class WorkerHandle:
    """One trainer worker subprocess speaking line-delimited JSON on stdin/stdout.

    A background thread drains stdout into a queue so reads can time out
    without blocking; stderr passes through for worker-side diagnostics.
    """

    def __init__(self, command: str, handshake_timeout_s: float = 60.0):
        self.command = command
        self.handshake_timeout_s = handshake_timeout_s
        self._proc: Optional[subprocess.Popen] = None
        self._lines: queue.Queue = queue.Queue()

    def start(self) -> None:
        argv = shlex.split(self.command)
        if not argv:
            raise WorkerError("empty worker command")
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise WorkerError(f"failed to spawn worker {argv[0]!r}: {exc}") from exc
        # each worker incarnation owns its queue, so a late EOF from a killed
        # predecessor can never leak a sentinel into the current stream
        self._lines = queue.Queue()
        thread = threading.Thread(
            target=self._drain_stdout, args=(self._proc, self._lines), daemon=True
        )
        thread.start()
        self._handshake()

    @staticmethod
    def _drain_stdout(proc: subprocess.Popen, sink: queue.Queue) -> None:
        assert proc.stdout is not None
        for line in proc.stdout:
            sink.put(line)
        sink.put(None)  # EOF sentinel

    def _handshake(self) -> None:
        line = self.read_line(self.handshake_timeout_s)
        if line is None:
            raise WorkerError("worker exited before handshake")
        try:
            hello = json.loads(line)
        except json.JSONDecodeError:
            raise WorkerError(f"bad handshake line: {line!r}") from None
        if hello.get("type") != "hello":
            raise WorkerError(f"expected hello, got {hello!r}")
        if hello.get("protocol") != PROTOCOL_VERSION:
            raise WorkerError(
                f"protocol version mismatch: worker speaks {hello.get('protocol')}, "
                f"engine speaks {PROTOCOL_VERSION}"
            )

    @property
    def alive(self) -> bool:
        return self._proc is not None and self._proc.poll() is None

    def send(self, obj: dict) -> None:
        if self._proc is None or self._proc.stdin is None:
            raise WorkerError("worker not started")
        try:
            self._proc.stdin.write(json.dumps(obj) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise WorkerError(f"worker pipe closed: {exc}") from exc

    def read_line(self, timeout_s: float) -> Optional[str]:
        """Next stdout line, or None at EOF. Raises TimeoutError."""
        try:
            line = self._lines.get(timeout=timeout_s)
        except queue.Empty:
            raise TimeoutError(f"no worker output within {timeout_s} s") from None
        return line

    def stop(self) -> None:
        proc = self._proc
        self._proc = None
        if proc is None:
            return
        try:
            if proc.poll() is None and proc.stdin is not None:
                proc.stdin.write(json.dumps({"type": "shutdown"}) + "\n")
                proc.stdin.flush()
        except (BrokenPipeError, OSError):
            pass
        try:
            proc.wait(timeout=5.0)
        except subprocess.TimeoutExpired:
            proc.kill()
            proc.wait()


class ExternalEvaluator:
    """Evaluator that delegates to a trainer worker process.

    Timeouts, crashes, and protocol violations map to infeasible records; the
    worker is restarted afterwards so the next request can proceed.
    """

    source = "external"

    def __init__(self, worker_command: str, timeout_s: float = 600.0):
        self.worker_command = worker_command
        self.timeout_s = timeout_s
        self.restarts = 0
        self._handle: Optional[WorkerHandle] = None

    def start(self) -> None:
        """Spawn the worker and complete the handshake. Raises WorkerError."""
        handle = WorkerHandle(self.worker_command)
        handle.start()
        self._handle = handle

    def close(self) -> None:
        if self._handle is not None:
            self._handle.stop()
            self._handle = None

    def evaluate(self, request: EvaluationRequest) -> MetricsRecord:
        if self._handle is None:
            try:
                self.start()
            except WorkerError as exc:
                return infeasible_record(f"worker spawn failure: {exc}")
        assert self._handle is not None
        try:
            self._handle.send(request_to_wire(request))
            line = self._handle.read_line(self.timeout_s)
        except TimeoutError:
            self._restart()
            return infeasible_record(f"timeout after {self.timeout_s} s")
        except WorkerError as exc:
            self._restart()
            return infeasible_record(f"worker failure: {exc}")
        if line is None:
            self._restart()
            return infeasible_record("worker exited mid-request")
        return self._map_response(line, request.id)

    def _map_response(self, line: str, request_id: int) -> MetricsRecord:
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            self._restart()
            return infeasible_record(f"protocol violation: unparseable response {line!r}")
        kind = obj.get("type")
        if obj.get("id") != request_id:
            self._restart()
            return infeasible_record(
                f"protocol violation: response id {obj.get('id')} != request id {request_id}"
            )
        if kind == "error":
            return infeasible_record(f"worker error: {obj.get('message', '')}")
        if kind != "result":
            self._restart()
            return infeasible_record(f"protocol violation: unexpected type {kind!r}")
        try:
            accuracy = float(obj["accuracy"])
            precision = float(obj["precision"])
            recall = float(obj["recall"])
            size = int(obj["model_size_bytes"])
        except (KeyError, TypeError, ValueError) as exc:
            self._restart()
            return infeasible_record(f"protocol violation: bad result fields ({exc})")
        if not all(0.0 <= v <= 1.0 for v in (accuracy, precision, recall)) or size <= 0:
            return infeasible_record("protocol violation: metric out of range")
        return MetricsRecord(accuracy, precision, recall, size)

    def _restart(self) -> None:
        self.restarts += 1
        if self._handle is not None:
            self._handle.stop()
            self._handle = None
        try:
            self.start()
        except WorkerError:
            self._handle = None  # next evaluate() retries the spawn


def external_evaluate(
    request: EvaluationRequest, worker: ExternalEvaluator, timeout_s: Optional[float] = None
) -> MetricsRecord:
    """One request/response cycle against a running worker."""
    if timeout_s is not None:
        worker.timeout_s = timeout_s
    return worker.evaluate(request)
