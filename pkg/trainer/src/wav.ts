/** Minimal RIFF/WAVE reader for 16-bit PCM; multi-channel files yield channel 0. */

import * as fs from "fs";

export interface WavData {
  samples: Float64Array; // scaled to [-1, 1]
  rateHz: number;
}

export function readWav(path: string): WavData {
  const blob = fs.readFileSync(path);
  if (blob.length < 12 || blob.toString("ascii", 0, 4) !== "RIFF" || blob.toString("ascii", 8, 12) !== "WAVE") {
    throw new Error(`${path}: not a RIFF/WAVE file`);
  }
  let fmt: { format: number; channels: number; rate: number; bits: number } | null = null;
  let pos = 12;
  while (pos + 8 <= blob.length) {
    const chunkId = blob.toString("ascii", pos, pos + 4);
    const chunkSize = blob.readUInt32LE(pos + 4);
    const bodyStart = pos + 8;
    if (chunkId === "fmt ") {
      if (chunkSize < 16 || bodyStart + 16 > blob.length) throw new Error(`${path}: fmt chunk too short`);
      fmt = {
        format: blob.readUInt16LE(bodyStart),
        channels: blob.readUInt16LE(bodyStart + 2),
        rate: blob.readUInt32LE(bodyStart + 4),
        bits: blob.readUInt16LE(bodyStart + 14),
      };
    } else if (chunkId === "data") {
      if (!fmt) throw new Error(`${path}: data chunk before fmt chunk`);
      if (fmt.format !== 1 || fmt.bits !== 16) {
        throw new Error(`${path}: unsupported encoding (format ${fmt.format}, ${fmt.bits}-bit); need 16-bit PCM`);
      }
      if (bodyStart + chunkSize > blob.length) throw new Error(`${path}: truncated data chunk`);
      const frameBytes = 2 * fmt.channels;
      if (chunkSize % frameBytes) throw new Error(`${path}: data chunk ends mid-frame`);
      const frames = chunkSize / frameBytes;
      const samples = new Float64Array(frames);
      for (let i = 0; i < frames; i++) {
        samples[i] = blob.readInt16LE(bodyStart + i * frameBytes) / 32768;
      }
      return { samples, rateHz: fmt.rate };
    }
    pos = bodyStart + chunkSize + (chunkSize & 1);
  }
  throw new Error(`${path}: missing ${fmt ? "data" : "fmt"} chunk`);
}

/** Write a mono 16-bit PCM file; used by tests and dataset generators. */
export function writeWav(path: string, samples: ArrayLike<number>, rateHz: number): void {
  const n = samples.length;
  const data = Buffer.alloc(n * 2);
  for (let i = 0; i < n; i++) {
    const v = Math.max(-1, Math.min(1, samples[i]));
    data.writeInt16LE(Math.round(v * 32767), i * 2);
  }
  const fmt = Buffer.alloc(16);
  fmt.writeUInt16LE(1, 0); // PCM
  fmt.writeUInt16LE(1, 2); // mono
  fmt.writeUInt32LE(rateHz, 4);
  fmt.writeUInt32LE(rateHz * 2, 8);
  fmt.writeUInt16LE(2, 12);
  fmt.writeUInt16LE(16, 14);
  const header = Buffer.alloc(12);
  header.write("RIFF", 0, "ascii");
  header.writeUInt32LE(4 + 8 + fmt.length + 8 + data.length, 4);
  header.write("WAVE", 8, "ascii");
  const chunks = [
    header,
    Buffer.from("fmt "),
    uint32(fmt.length),
    fmt,
    Buffer.from("data"),
    uint32(data.length),
    data,
  ];
  fs.writeFileSync(path, Buffer.concat(chunks));
}

function uint32(value: number): Buffer {
  const b = Buffer.alloc(4);
  b.writeUInt32LE(value, 0);
  return b;
}
