/**
 * Labeled WAV dataset: `normal/` and `anomalous/` subdirectories.
 *
 * The anomalous class is the positive class everywhere. The train/test split
 * is a pure function of the filename: a file is a test file iff
 * fnv1a64(basename) mod 5 == 0, giving a deterministic ~80/20 split that is
 * stable across runs and machines.
 */

import * as fs from "fs";
import * as path from "path";

import { fnv1a64 } from "./fnv";
import { readWav } from "./wav";

export const MAX_NORMAL_DEFAULT = 900;
export const MAX_ANOMALOUS_DEFAULT = 200;

export interface ClipRecord {
  name: string;
  samples: Float64Array;
  rateHz: number;
  label: 0 | 1; // 1 = anomalous (positive class)
}

export interface Dataset {
  train: ClipRecord[];
  test: ClipRecord[];
  skipped: number;
}

export function isTestFile(name: string): boolean {
  return fnv1a64(name) % 5n === 0n;
}

function listWavs(dir: string): string[] {
  return fs
    .readdirSync(dir)
    .filter((f) => f.toLowerCase().endsWith(".wav"))
    .sort();
}

function loadClass(dir: string, label: 0 | 1, limit: number): { clips: ClipRecord[]; skipped: number } {
  const clips: ClipRecord[] = [];
  let skipped = 0;
  for (const name of listWavs(dir).slice(0, limit)) {
    try {
      const { samples, rateHz } = readWav(path.join(dir, name));
      clips.push({ name, samples, rateHz, label });
    } catch {
      skipped += 1; // unreadable clips are dropped unless the class empties out
    }
  }
  return { clips, skipped };
}

export function loadDataset(
  datasetDir: string,
  maxNormal: number = MAX_NORMAL_DEFAULT,
  maxAnomalous: number = MAX_ANOMALOUS_DEFAULT
): Dataset {
  const normalDir = path.join(datasetDir, "normal");
  const anomalousDir = path.join(datasetDir, "anomalous");
  for (const dir of [normalDir, anomalousDir]) {
    if (!fs.existsSync(dir)) throw new Error(`dataset directory missing: ${dir}`);
  }
  const normal = loadClass(normalDir, 0, maxNormal);
  const anomalous = loadClass(anomalousDir, 1, maxAnomalous);
  for (const [cls, loaded] of [["normal", normal], ["anomalous", anomalous]] as const) {
    if (loaded.clips.length === 0) throw new Error(`no readable WAV files in class ${cls}`);
  }
  const all = [...normal.clips, ...anomalous.clips];
  const train = all.filter((c) => !isTestFile(c.name));
  const test = all.filter((c) => isTestFile(c.name));
  return { train, test, skipped: normal.skipped + anomalous.skipped };
}
