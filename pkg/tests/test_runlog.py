import json

import pytest

from granarch.objectives import MetricsRecord, infeasible_record
from granarch.runlog import (
    LogParseError,
    LogRecord,
    LogWriter,
    frontier_csv,
    read_log,
    record_from_json,
    record_to_json,
)
from granarch.search_space import make_genome


def sample_record(seq=1, key_suffix="R", size=9240):
    genome = make_genome(375, "MFCC", [(2, 3, key_suffix)])
    from granarch.search_space import canonical_encode

    return LogRecord(
        seq=seq,
        generation=0,
        key=canonical_encode(genome),
        genome=genome,
        metrics=MetricsRecord(0.9, 0.71, 0.8, size),
        fitness=3.2,
        source="synthetic",
        timestamp=1700000000.25,
    )


def test_record_json_round_trip():
    rec = sample_record()
    assert record_from_json(record_to_json(rec)) == rec


def test_record_json_round_trip_infeasible():
    rec = sample_record()
    rec = LogRecord(rec.seq, rec.generation, rec.key, rec.genome,
                    infeasible_record("worker died"), 0.0, "external", rec.timestamp)
    parsed = record_from_json(record_to_json(rec))
    assert parsed == rec
    assert parsed.metrics.error == "worker died"


def test_record_parse_errors_are_reported():
    with pytest.raises(LogParseError):
        record_from_json("{not json")
    with pytest.raises(LogParseError):
        record_from_json(json.dumps({"seq": 1}))


def test_log_writer_and_reader(tmp_path):
    path = tmp_path / "run.jsonl"
    records = [sample_record(seq=i) for i in range(1, 4)]
    with LogWriter(str(path)) as writer:
        for rec in records:
            writer.append(rec)
    parsed, errors = read_log(str(path))
    assert errors == []
    assert parsed == records


def test_read_log_collects_malformed_lines(tmp_path):
    path = tmp_path / "run.jsonl"
    good = record_to_json(sample_record())
    path.write_text(good + "\n" + "garbage line\n" + good + "\n")
    records, errors = read_log(str(path))
    assert len(records) == 2
    assert len(errors) == 1 and errors[0][0] == 2


def test_frontier_csv_layout():
    rec = sample_record()
    text = frontier_csv([rec])
    lines = text.strip().split("\n")
    assert lines[0] == (
        "SR,PT,F1,FS1,AF1,F2,FS2,AF2,F3,FS3,AF3,F4,FS4,AF4,F5,FS5,AF5,Acc,Pre,Rec,MS"
    )
    assert lines[1] == "375,MFCC,2,3,R,,,,,,,,,,,,,0.9,0.71,0.8,9240"


def test_frontier_csv_empty():
    assert frontier_csv([]).count("\n") == 1
