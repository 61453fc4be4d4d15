/**
 * Audio preprocessing: power-of-two resampling, dB power spectrogram,
 * mel spectrogram, and MFCCs.
 *
 * Conventions match the engine so tensor shapes agree exactly: centered
 * frames with half-frame zero padding (1 + floor(n / hop) frames), periodic
 * Hann window, power floor 1e-10 before dB, mel curve 2595*log10(1 + f/700),
 * orthonormal DCT-II along the mel axis.
 */

import { PreprocessingCode, WireDsp } from "./protocol";

const DB_FLOOR = 1e-10;

export type Matrix = Float64Array[]; // row-major: rows x cols

export function resamplePow2(samples: Float64Array, fromHz: number, toHz: number): Float64Array {
  if (fromHz % toHz !== 0) throw new Error(`resample ratio ${fromHz}/${toHz} is not an integer`);
  let ratio = fromHz / toHz;
  if (ratio & (ratio - 1)) throw new Error(`resample ratio ${ratio} is not a power of two`);
  let out = samples;
  while (ratio > 1) {
    const n = out.length;
    const half = new Float64Array(Math.ceil(n / 2));
    for (let i = 0; i < n; i += 2) {
      const prev = i > 0 ? out[i - 1] : 0;
      const next = i + 1 < n ? out[i + 1] : 0;
      half[i / 2] = 0.25 * prev + 0.5 * out[i] + 0.25 * next;
    }
    out = half;
    ratio /= 2;
  }
  return out;
}

/** Trim or zero-pad to exactly round(windowS * rateHz) samples. */
export function prepareWindow(samples: Float64Array, rateHz: number, windowS: number): Float64Array {
  const n = Math.round(windowS * rateHz);
  const out = new Float64Array(n);
  out.set(samples.subarray(0, Math.min(n, samples.length)));
  return out;
}

export function frameCount(nSamples: number, hopLength: number): number {
  return 1 + Math.floor(nSamples / hopLength);
}

/** In-place iterative radix-2 FFT; falls back to a direct DFT for other sizes. */
function fft(re: Float64Array, im: Float64Array): void {
  const n = re.length;
  if (n & (n - 1)) {
    directDft(re, im);
    return;
  }
  for (let i = 1, j = 0; i < n; i++) {
    let bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      [re[i], re[j]] = [re[j], re[i]];
      [im[i], im[j]] = [im[j], im[i]];
    }
  }
  for (let len = 2; len <= n; len <<= 1) {
    const angle = (-2 * Math.PI) / len;
    const wRe = Math.cos(angle);
    const wIm = Math.sin(angle);
    for (let i = 0; i < n; i += len) {
      let curRe = 1;
      let curIm = 0;
      for (let k = 0; k < len / 2; k++) {
        const uRe = re[i + k];
        const uIm = im[i + k];
        const vRe = re[i + k + len / 2] * curRe - im[i + k + len / 2] * curIm;
        const vIm = re[i + k + len / 2] * curIm + im[i + k + len / 2] * curRe;
        re[i + k] = uRe + vRe;
        im[i + k] = uIm + vIm;
        re[i + k + len / 2] = uRe - vRe;
        im[i + k + len / 2] = uIm - vIm;
        const nextRe = curRe * wRe - curIm * wIm;
        curIm = curRe * wIm + curIm * wRe;
        curRe = nextRe;
      }
    }
  }
}

function directDft(re: Float64Array, im: Float64Array): void {
  const n = re.length;
  const outRe = new Float64Array(n);
  const outIm = new Float64Array(n);
  for (let k = 0; k < n; k++) {
    let sumRe = 0;
    let sumIm = 0;
    for (let t = 0; t < n; t++) {
      const angle = (-2 * Math.PI * k * t) / n;
      const c = Math.cos(angle);
      const s = Math.sin(angle);
      sumRe += re[t] * c - im[t] * s;
      sumIm += re[t] * s + im[t] * c;
    }
    outRe[k] = sumRe;
    outIm[k] = sumIm;
  }
  re.set(outRe);
  im.set(outIm);
}

function toDb(matrix: Matrix): Matrix {
  return matrix.map((row) => row.map((v) => 10 * Math.log10(Math.max(v, DB_FLOOR))));
}

/** Linear power spectra, shape (frameSize/2 + 1) x frames. */
function linearPowerFrames(samples: Float64Array, dsp: WireDsp): Matrix {
  const nFft = dsp.frame_size;
  const half = Math.floor(nFft / 2);
  const bins = half + 1;
  const frames = frameCount(samples.length, dsp.hop_length);
  const padded = new Float64Array(samples.length + 2 * half);
  padded.set(samples, half);

  const window = new Float64Array(nFft);
  for (let i = 0; i < nFft; i++) window[i] = 0.5 * (1 - Math.cos((2 * Math.PI * i) / nFft));

  const power: Matrix = Array.from({ length: bins }, () => new Float64Array(frames));
  const re = new Float64Array(nFft);
  const im = new Float64Array(nFft);
  for (let t = 0; t < frames; t++) {
    const offset = t * dsp.hop_length;
    for (let i = 0; i < nFft; i++) {
      re[i] = padded[offset + i] * window[i];
      im[i] = 0;
    }
    fft(re, im);
    for (let k = 0; k < bins; k++) {
      power[k][t] = re[k] * re[k] + im[k] * im[k];
    }
  }
  return power;
}

export function powerSpectrogram(samples: Float64Array, dsp: WireDsp): Matrix {
  return toDb(linearPowerFrames(samples, dsp));
}

function hzToMel(f: number): number {
  return 2595 * Math.log10(1 + f / 700);
}

function melToHz(m: number): number {
  return 700 * (Math.pow(10, m / 2595) - 1);
}

export function melFilterbank(nMels: number, nFft: number, rateHz: number): Matrix {
  const bins = Math.floor(nFft / 2) + 1;
  const top = hzToMel(rateHz / 2);
  const hzPoints: number[] = [];
  for (let i = 0; i < nMels + 2; i++) hzPoints.push(melToHz((top * i) / (nMels + 1)));
  const bank: Matrix = [];
  for (let j = 0; j < nMels; j++) {
    const row = new Float64Array(bins);
    const [lower, center, upper] = [hzPoints[j], hzPoints[j + 1], hzPoints[j + 2]];
    for (let i = 0; i < bins; i++) {
      const f = (i * rateHz) / nFft;
      const rising = (f - lower) / (center - lower);
      const falling = (upper - f) / (upper - center);
      row[i] = Math.max(0, Math.min(rising, falling));
    }
    bank.push(row);
  }
  return bank;
}

export function melSpectrogram(samples: Float64Array, dsp: WireDsp, rateHz: number): Matrix {
  const linear = linearPowerFrames(samples, dsp);
  const bank = melFilterbank(dsp.n_mels, dsp.frame_size, rateHz);
  const frames = linear[0].length;
  const out: Matrix = [];
  for (const filter of bank) {
    const row = new Float64Array(frames);
    for (let k = 0; k < filter.length; k++) {
      const w = filter[k];
      if (w === 0) continue;
      for (let t = 0; t < frames; t++) row[t] += w * linear[k][t];
    }
    out.push(row);
  }
  return toDb(out);
}

export function mfcc(samples: Float64Array, dsp: WireDsp, rateHz: number): Matrix {
  const melDb = melSpectrogram(samples, dsp, rateHz);
  const n = dsp.n_mels;
  const frames = melDb[0].length;
  const out: Matrix = Array.from({ length: dsp.n_mfcc }, () => new Float64Array(frames));
  // orthonormal DCT-II down the mel axis
  const scale0 = Math.sqrt(1 / n);
  const scale = Math.sqrt(2 / n);
  for (let k = 0; k < dsp.n_mfcc; k++) {
    for (let t = 0; t < frames; t++) {
      let sum = 0;
      for (let m = 0; m < n; m++) {
        sum += melDb[m][t] * Math.cos((Math.PI * k * (2 * m + 1)) / (2 * n));
      }
      out[k][t] = sum * (k === 0 ? scale0 : scale);
    }
  }
  return out;
}

export function featureRows(pt: PreprocessingCode, dsp: WireDsp): number {
  if (pt === "SP") return Math.floor(dsp.frame_size / 2) + 1;
  if (pt === "MS") return dsp.n_mels;
  return dsp.n_mfcc;
}

export function computeFeatures(
  samples: Float64Array,
  pt: PreprocessingCode,
  dsp: WireDsp,
  rateHz: number
): Matrix {
  if (pt === "SP") return powerSpectrogram(samples, dsp);
  if (pt === "MS") return melSpectrogram(samples, dsp, rateHz);
  return mfcc(samples, dsp, rateHz);
}
