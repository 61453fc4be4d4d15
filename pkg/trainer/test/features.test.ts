import { describe, expect, it } from "vitest";

import {
  computeFeatures,
  featureRows,
  frameCount,
  melFilterbank,
  mfcc,
  powerSpectrogram,
  prepareWindow,
  resamplePow2,
} from "../src/features";
import { DSP } from "./helpers";

function sine(freqHz: number, rateHz: number, seconds: number): Float64Array {
  const n = Math.round(rateHz * seconds);
  const out = new Float64Array(n);
  for (let i = 0; i < n; i++) out[i] = Math.sin((2 * Math.PI * freqHz * i) / rateHz);
  return out;
}

describe("resamplePow2", () => {
  it("is the identity at ratio 1", () => {
    const x = Float64Array.from([0.1, -0.2, 0.3]);
    expect(Array.from(resamplePow2(x, 6000, 6000))).toEqual([0.1, -0.2, 0.3]);
  });

  it("preserves DC on interior samples", () => {
    const x = new Float64Array(101).fill(1);
    const y = resamplePow2(x, 12_000, 6000);
    for (let i = 1; i < y.length - 1; i++) expect(y[i]).toBeCloseTo(1, 12);
  });

  it("rejects the Nyquist alternation", () => {
    const x = new Float64Array(100);
    for (let i = 0; i < x.length; i++) x[i] = i % 2 ? -1 : 1;
    const y = resamplePow2(x, 12_000, 6000);
    for (let i = 1; i < y.length - 1; i++) expect(Math.abs(y[i])).toBeLessThan(1e-12);
  });

  it("produces ceil(n / ratio) samples", () => {
    for (const n of [1, 5, 7, 100, 1001]) {
      for (const ratio of [1, 2, 4, 8, 16]) {
        expect(resamplePow2(new Float64Array(n), 48_000, 48_000 / ratio).length).toBe(
          Math.ceil(n / ratio)
        );
      }
    }
  });

  it("rejects non power-of-two ratios", () => {
    expect(() => resamplePow2(new Float64Array(4), 48_000, 16_000)).toThrow(/power of two/);
    expect(() => resamplePow2(new Float64Array(4), 44_100, 6000)).toThrow(/integer/);
  });
});

describe("framing and window preparation", () => {
  it("computes centered frame counts", () => {
    expect(frameCount(30_000, 512)).toBe(59);
    expect(frameCount(3750, 512)).toBe(8);
    expect(frameCount(1, 512)).toBe(1);
  });

  it("trims long audio and pads short audio", () => {
    const long = prepareWindow(new Float64Array(10_000).fill(0.5), 750, 5);
    expect(long.length).toBe(3750);
    const short = prepareWindow(new Float64Array(10).fill(0.5), 750, 5);
    expect(short.length).toBe(3750);
    expect(short[9]).toBe(0.5);
    expect(short[10]).toBe(0);
  });
});

describe("spectrogram", () => {
  it("maps silence to the -100 dB floor", () => {
    const spect = powerSpectrogram(new Float64Array(3750), DSP);
    expect(spect.length).toBe(1025);
    expect(spect[0].length).toBe(8);
    for (const row of spect) for (const v of row) expect(v).toBe(-100);
  });

  it("peaks within one bin of a bin-aligned sinusoid", () => {
    const rate = 6000;
    const k = 64;
    const tone = sine((k * rate) / DSP.frame_size, rate, 5);
    const spect = powerSpectrogram(tone, DSP);
    const frames = spect[0].length;
    for (let t = 5; t < frames - 5; t++) {
      let arg = 0;
      for (let r = 1; r < spect.length; r++) if (spect[r][t] > spect[arg][t]) arg = r;
      expect(Math.abs(arg - k)).toBeLessThanOrEqual(1);
    }
  });

  it("reproduces the closed-form peak power of a bin-aligned sine", () => {
    // unit sine on bin k under a periodic Hann window: |X_k| = N/4
    const rate = 6000;
    const k = 100;
    const tone = sine((k * rate) / DSP.frame_size, rate, 5);
    const spect = powerSpectrogram(tone, DSP);
    const expectedDb = 20 * Math.log10(DSP.frame_size / 4);
    const frames = spect[0].length;
    for (let t = 5; t < frames - 5; t++) {
      let peak = -Infinity;
      for (let r = 0; r < spect.length; r++) peak = Math.max(peak, spect[r][t]);
      expect(Math.abs(peak - expectedDb)).toBeLessThan(0.1);
    }
  });

  it("matches a naive in-test DFT on a random signal", () => {
    // replicate padding, windowing, and dB conversion with an O(n^2) DFT and
    // compare whole matrices; exercises the radix-2 FFT path at N = 64
    const nFft = 64;
    const hop = 32;
    const dsp = { ...DSP, frame_size: nFft, hop_length: hop };
    let state = 1234;
    const signal = new Float64Array(100);
    for (let i = 0; i < signal.length; i++) {
      state = (state * 1103515245 + 12345) % 0x80000000;
      signal[i] = state / 0x80000000 - 0.5;
    }
    const got = powerSpectrogram(signal, dsp);

    const padded = new Float64Array(signal.length + nFft);
    padded.set(signal, nFft / 2);
    const frames = 1 + Math.floor(signal.length / hop);
    expect(got[0].length).toBe(frames);
    for (let t = 0; t < frames; t++) {
      for (let k = 0; k <= nFft / 2; k++) {
        let re = 0;
        let im = 0;
        for (let n = 0; n < nFft; n++) {
          const w = 0.5 * (1 - Math.cos((2 * Math.PI * n) / nFft));
          const v = padded[t * hop + n] * w;
          re += v * Math.cos((-2 * Math.PI * k * n) / nFft);
          im += v * Math.sin((-2 * Math.PI * k * n) / nFft);
        }
        const expectedDb = 10 * Math.log10(Math.max(re * re + im * im, 1e-10));
        expect(Math.abs(got[k][t] - expectedDb)).toBeLessThan(1e-9);
      }
    }
  });
});

describe("mel and mfcc", () => {
  it("builds a non-negative filterbank with positive row sums", () => {
    for (const rate of [375, 48_000]) {
      const bank = melFilterbank(80, 2048, rate);
      expect(bank.length).toBe(80);
      expect(bank[0].length).toBe(1025);
      for (const row of bank) {
        let sum = 0;
        for (const v of row) {
          expect(v).toBeGreaterThanOrEqual(0);
          sum += v;
        }
        expect(sum).toBeGreaterThan(0);
      }
    }
  });

  it("collapses a constant mel spectrum into coefficient zero", () => {
    const coeffs = mfcc(new Float64Array(3750), DSP, 750);
    expect(coeffs.length).toBe(13);
    for (const v of coeffs[0]) expect(v).toBeCloseTo(-100 * Math.sqrt(80), 9);
    for (let k = 1; k < 13; k++) for (const v of coeffs[k]) expect(Math.abs(v)).toBeLessThan(1e-9);
  });

  it("produces engine-compatible shapes for every preprocessing type", () => {
    for (const rate of [375, 750, 6000]) {
      const samples = prepareWindow(sine(100, rate, 5), rate, DSP.window_s);
      const cols = frameCount(Math.round(DSP.window_s * rate), DSP.hop_length);
      for (const pt of ["SP", "MS", "MFCC"] as const) {
        const feat = computeFeatures(samples, pt, DSP, rate);
        expect(feat.length).toBe(featureRows(pt, DSP));
        expect(feat[0].length).toBe(cols);
      }
    }
  });
});
