"""Scripted trainer worker for protocol fault-injection tests.

Usage: python fake_worker.py MODE
Modes:
  ok        respond to every request with fixed valid metrics
  garbage   respond with a non-JSON line
  wrong-id  respond with id + 1000
  error     respond with an error object
  flaky     exit without responding to request id 1, behave like ok afterwards
  slow      sleep 5 s before responding
  badproto  advertise protocol version 99 in the hello line
  silent    never print the hello line
  range     respond with accuracy 7.0 (out of range)
"""

import json
import sys
import time

MODE = sys.argv[1] if len(sys.argv) > 1 else "ok"


def emit(obj):
    sys.stdout.write(json.dumps(obj) + "\n")
    sys.stdout.flush()


def main():
    if MODE == "silent":
        time.sleep(30)
        return
    emit({"type": "hello", "protocol": 99 if MODE == "badproto" else 1})
    for line in sys.stdin:
        req = json.loads(line)
        if req.get("type") == "shutdown":
            return
        rid = req.get("id", -1)
        if MODE == "garbage":
            sys.stdout.write("!! this is not json !!\n")
            sys.stdout.flush()
        elif MODE == "wrong-id":
            emit({"type": "result", "id": rid + 1000, "accuracy": 0.5, "precision": 0.5,
                  "recall": 0.5, "model_size_bytes": 1000})
        elif MODE == "error":
            emit({"type": "error", "id": rid, "message": "synthetic training failure"})
        elif MODE == "flaky" and rid == 1:
            sys.exit(3)
        elif MODE == "slow":
            time.sleep(5)
            emit({"type": "result", "id": rid, "accuracy": 0.5, "precision": 0.5,
                  "recall": 0.5, "model_size_bytes": 1000})
        elif MODE == "range":
            emit({"type": "result", "id": rid, "accuracy": 7.0, "precision": 0.5,
                  "recall": 0.5, "model_size_bytes": 1000})
        else:
            emit({"type": "result", "id": rid, "accuracy": 0.9, "precision": 0.8,
                  "recall": 0.7, "model_size_bytes": 4321})


if __name__ == "__main__":
    main()
