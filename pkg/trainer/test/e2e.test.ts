import { execFileSync } from "child_process";
import * as fs from "fs";
import * as os from "os";
import * as path from "path";

import { afterAll, describe, expect, it } from "vitest";

import { frameCount } from "../src/features";
import { makeDataset } from "./helpers";

const tmp = fs.mkdtempSync(path.join(os.tmpdir(), "trainer-e2e-"));
afterAll(() => fs.rmSync(tmp, { recursive: true, force: true }));

const WORKER = path.join(__dirname, "..", "dist", "worker.js");

function analyticEstimate(genome: any): number {
  const rows = genome.preprocessing === "SP" ? 1025 : genome.preprocessing === "MS" ? 80 : 13;
  const cols = frameCount(Math.round(5.0 * genome.sample_rate_hz), 512);
  let total = 0;
  let cIn = 1;
  for (const layer of genome.layers) {
    total += (layer.kernel_size ** 2 * cIn + 1) * layer.filters;
    cIn = layer.filters;
  }
  total += (rows * cols * cIn + 1) * 10 + 22;
  return total * 4 + 2048;
}

describe("engine + worker micro-run", () => {
  it("completes a budget-12 search with feasible worker-measured records", () => {
    const datasetDir = path.join(tmp, "dataset");
    makeDataset(datasetDir, 15, 5); // 20 clips at 6 kHz

    const config = {
      ga: { population_size: 4, update_ratio: 0.5, eval_budget: 12, seed: 5 },
      space: {
        sample_rates: [375, 750],
        preprocessing_types: ["MFCC"],
        layers_min: 1,
        layers_max: 2,
        filters: [2, 4],
        kernel_sizes: [3, 5],
      },
      train: { epochs: 2, batch_size: 8, dataset_dir: datasetDir },
      evaluator: "external",
      worker_command: `node ${WORKER}`,
    };
    const configPath = path.join(tmp, "config.json");
    fs.writeFileSync(configPath, JSON.stringify(config));
    const logPath = path.join(tmp, "run.jsonl");

    const stdout = execFileSync(
      "python3",
      ["-m", "granarch", "search", "--config", configPath, "--out", logPath],
      { encoding: "utf-8", timeout: 540_000 }
    );
    expect(stdout).toContain("unique evaluations: 12");

    const records = fs
      .readFileSync(logPath, "utf-8")
      .trim()
      .split("\n")
      .map((line) => JSON.parse(line));
    expect(records.length).toBe(12);
    expect(records.map((r) => r.seq)).toEqual([...Array(12)].map((_, i) => i + 1));

    for (const record of records) {
      expect(record.source).toBe("external");
      expect(record.metrics.feasible).toBe(true);
      for (const name of ["accuracy", "precision", "recall"] as const) {
        expect(record.metrics[name]).toBeGreaterThanOrEqual(0);
        expect(record.metrics[name]).toBeLessThanOrEqual(1);
      }
      const measured = record.metrics.model_size_bytes;
      const estimate = analyticEstimate(record.genome);
      const ratio = Math.max(measured / estimate, estimate / measured);
      expect(ratio).toBeLessThanOrEqual(2);
    }

    // the frontier CSV was produced and is non-trivial
    const frontier = fs.readFileSync(logPath + ".pareto.csv", "utf-8");
    expect(frontier.split("\n")[0]).toMatch(/^SR,PT,/);
    expect(frontier.trim().split("\n").length).toBeGreaterThan(1);
  }, 600_000);
});
