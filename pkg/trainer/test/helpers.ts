/** Shared fixtures: deterministic synthetic WAV datasets with a usable split. */

import * as fs from "fs";
import * as path from "path";

import { isTestFile } from "../src/dataset";
import { WireDsp } from "../src/protocol";
import { writeWav } from "../src/wav";

export const DSP: WireDsp = {
  window_s: 5,
  frame_size: 2048,
  hop_length: 512,
  n_mels: 80,
  n_mfcc: 13,
  sample_bits: 16,
  source_rate_hz: 48_000,
};

/** Small LCG so fixtures are identical on every run. */
function lcg(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state * 1103515245 + 12345) % 0x80000000;
    return state / 0x80000000;
  };
}

function clip(freqHz: number, noise: number, seed: number, rateHz: number, seconds: number): Float64Array {
  const n = Math.round(rateHz * seconds);
  const out = new Float64Array(n);
  const rand = lcg(seed);
  for (let i = 0; i < n; i++) {
    out[i] = 0.4 * Math.sin((2 * Math.PI * freqHz * i) / rateHz) + noise * (rand() - 0.5);
  }
  return out;
}

/**
 * Write nNormal + nAnomalous labeled clips; normal clips carry a low tone,
 * anomalous ones a high tone with more noise. Filenames are chosen so the
 * hash split leaves both train and test files in each class.
 */
export function makeDataset(
  dir: string,
  nNormal: number,
  nAnomalous: number,
  rateHz = 6000,
  seconds = 5.0
): void {
  fs.mkdirSync(path.join(dir, "normal"), { recursive: true });
  fs.mkdirSync(path.join(dir, "anomalous"), { recursive: true });
  const pickNames = (prefix: string, count: number): string[] => {
    const names: string[] = [];
    let train = 0;
    let test = 0;
    for (let i = 0; names.length < count; i++) {
      const name = `${prefix}_${i}.wav`;
      const isTest = isTestFile(name);
      // keep the split balanced: at least one file on each side per class
      if (isTest && test >= Math.max(1, Math.floor(count / 4))) continue;
      if (!isTest && train >= count - Math.max(1, Math.floor(count / 4))) continue;
      names.push(name);
      if (isTest) test += 1;
      else train += 1;
    }
    return names;
  };
  pickNames("normal", nNormal).forEach((name, i) => {
    writeWav(path.join(dir, "normal", name), clip(180, 0.1, 11 + i, rateHz, seconds), rateHz);
  });
  pickNames("anomaly", nAnomalous).forEach((name, i) => {
    writeWav(path.join(dir, "anomalous", name), clip(950, 0.5, 211 + i, rateHz, seconds), rateHz);
  });
}
