/**
 * Wire types and the line-delimited JSON protocol loop.
 *
 * One JSON object per line on stdin/stdout. The worker announces itself with
 * a hello line, answers each evaluate request with exactly one result or
 * error line carrying the same id, and exits cleanly on shutdown. Requests
 * are handled one at a time, in arrival order.
 */

import * as readline from "readline";

export const PROTOCOL_VERSION = 1;

export type PreprocessingCode = "SP" | "MS" | "MFCC";
export type ActivationName = "RELU" | "SIGMOID";

export interface WireLayer {
  filters: number;
  kernel_size: number;
  activation: ActivationName;
}

export interface WireGenome {
  sample_rate_hz: number;
  preprocessing: PreprocessingCode;
  layers: WireLayer[];
}

export interface WireDsp {
  window_s: number;
  frame_size: number;
  hop_length: number;
  n_mels: number;
  n_mfcc: number;
  sample_bits: number;
  source_rate_hz: number;
}

export interface WireTrain {
  epochs: number;
  batch_size: number;
  dataset_dir: string;
  seed: number;
}

export interface EvaluateRequest {
  type: "evaluate";
  id: number;
  genome: WireGenome;
  dsp: WireDsp;
  train: WireTrain;
}

export interface ResultResponse {
  type: "result";
  id: number;
  accuracy: number;
  precision: number;
  recall: number;
  model_size_bytes: number;
}

export interface ErrorResponse {
  type: "error";
  id: number;
  message: string;
}

export type Handler = (request: EvaluateRequest) => Promise<ResultResponse>;

function emit(obj: unknown): void {
  process.stdout.write(JSON.stringify(obj) + "\n");
}

function validateRequest(obj: any): string | null {
  if (obj.type !== "evaluate") return `unknown request type ${JSON.stringify(obj.type)}`;
  if (typeof obj.id !== "number") return "missing or non-numeric id";
  const g = obj.genome;
  if (!g || typeof g.sample_rate_hz !== "number" || g.sample_rate_hz <= 0)
    return "genome.sample_rate_hz must be a positive number";
  if (!["SP", "MS", "MFCC"].includes(g.preprocessing))
    return `genome.preprocessing must be SP, MS, or MFCC, got ${JSON.stringify(g.preprocessing)}`;
  if (!Array.isArray(g.layers) || g.layers.length === 0)
    return "genome.layers must be a non-empty array";
  for (const layer of g.layers) {
    if (typeof layer.filters !== "number" || layer.filters <= 0)
      return "layer.filters must be a positive number";
    if (typeof layer.kernel_size !== "number" || layer.kernel_size <= 0)
      return "layer.kernel_size must be a positive number";
    if (!["RELU", "SIGMOID"].includes(layer.activation))
      return `layer.activation must be RELU or SIGMOID, got ${JSON.stringify(layer.activation)}`;
  }
  if (!obj.dsp || typeof obj.dsp.frame_size !== "number") return "missing dsp section";
  if (!obj.train || typeof obj.train.dataset_dir !== "string") return "missing train section";
  return null;
}

/** Run the protocol loop until shutdown or stdin EOF. */
export async function serveProtocol(handler: Handler): Promise<void> {
  emit({ type: "hello", protocol: PROTOCOL_VERSION });

  const rl = readline.createInterface({ input: process.stdin, terminal: false });
  const pending: string[] = [];
  let notify: (() => void) | null = null;
  let closed = false;

  rl.on("line", (line) => {
    pending.push(line);
    notify?.();
  });
  rl.on("close", () => {
    closed = true;
    notify?.();
  });

  const nextLine = async (): Promise<string | null> => {
    while (pending.length === 0) {
      if (closed) return null;
      await new Promise<void>((resolve) => {
        notify = resolve;
      });
      notify = null;
    }
    return pending.shift()!;
  };

  for (;;) {
    const line = await nextLine();
    if (line === null) return;
    if (line.trim() === "") continue;

    let obj: any;
    try {
      obj = JSON.parse(line);
    } catch (err) {
      emit({ type: "error", id: -1, message: `malformed request line: ${err}` });
      continue;
    }
    if (obj?.type === "shutdown") {
      rl.close();
      return;
    }
    const id = typeof obj?.id === "number" ? obj.id : -1;
    const problem = validateRequest(obj);
    if (problem !== null) {
      emit({ type: "error", id, message: problem });
      continue;
    }
    try {
      emit(await handler(obj as EvaluateRequest));
    } catch (err) {
      emit({ type: "error", id, message: `evaluation failed: ${(err as Error)?.message ?? err}` });
    }
  }
}
