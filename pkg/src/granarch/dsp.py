"""Audio ingestion and feature extraction: spectrogram, mel spectrogram, MFCC.

All transforms are pure functions over numpy arrays. The framing convention is
a centered short-time transform: the signal is zero-padded by half a frame on
each side, giving 1 + floor(n_samples / hop_length) frames regardless of
preprocessing type, so feature shapes are computable without audio.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np
from scipy.fft import dct

from .search_space import DataGenome, Preprocessing

# Power floor applied before dB conversion; maps silence to exactly -100 dB.
_DB_FLOOR = 1e-10


class WavError(Exception):
    """Base class for WAV parsing failures."""


class WavHeaderError(WavError):
    """File is not a well-formed RIFF/WAVE container."""


class WavEncodingError(WavError):
    """File uses an encoding other than 16-bit PCM."""


class WavTruncatedError(WavError):
    """The data chunk ends before its declared length."""


@dataclass(frozen=True)
class DspConfig:
    """Feature extraction parameters.

    window_s is the length of audio one model invocation analyzes;
    source_rate_hz is the rate audio fixtures are captured at before
    power-of-two downsampling to a genome's rate.
    """

    window_s: float = 5.0
    frame_size: int = 2048
    hop_length: int = 512
    n_mels: int = 80
    n_mfcc: int = 13
    sample_bits: int = 16
    source_rate_hz: int = 48_000

    def __post_init__(self) -> None:
        if self.window_s <= 0:
            raise ValueError(f"window_s must be positive, got {self.window_s}")
        for name in ("frame_size", "hop_length", "n_mels", "n_mfcc", "sample_bits", "source_rate_hz"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.hop_length > self.frame_size:
            raise ValueError(
                f"hop_length ({self.hop_length}) must not exceed frame_size ({self.frame_size})"
            )
        if self.n_mfcc > self.n_mels:
            raise ValueError(f"n_mfcc ({self.n_mfcc}) must not exceed n_mels ({self.n_mels})")


@dataclass(frozen=True)
class FeatureTensor:
    """A rows x cols feature matrix with a single channel."""

    values: np.ndarray
    preprocessing: Preprocessing

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def channels(self) -> int:
        return 1

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.rows, self.cols, 1)


def buffer_size_bytes(sample_bits: int, sample_rate_hz: int, window_s: float) -> int:
    """Bytes needed to buffer window_s seconds of raw audio at the given bit width."""
    return math.ceil(sample_bits * sample_rate_hz * window_s / 8)


def read_wav(path) -> tuple[np.ndarray, int]:
    """Read a 16-bit PCM RIFF/WAVE file.

    Returns (samples, rate_hz) with samples scaled to [-1, 1]. Multi-channel
    files yield channel 0 only. Raises WavHeaderError, WavEncodingError, or
    WavTruncatedError on the corresponding defect.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 12 or blob[0:4] != b"RIFF" or blob[8:12] != b"WAVE":
        raise WavHeaderError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    pos = 12
    while pos + 8 <= len(blob):
        chunk_id = blob[pos : pos + 4]
        (chunk_size,) = struct.unpack_from("<I", blob, pos + 4)
        body_start = pos + 8
        if chunk_id == b"fmt ":
            if chunk_size < 16 or body_start + 16 > len(blob):
                raise WavHeaderError(f"{path}: fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", blob, body_start)
        elif chunk_id == b"data":
            if fmt is None:
                raise WavHeaderError(f"{path}: data chunk before fmt chunk")
            audio_format, channels, rate, _byte_rate, _block_align, bits = fmt
            if audio_format != 1 or bits != 16:
                raise WavEncodingError(
                    f"{path}: unsupported encoding (format tag {audio_format}, {bits}-bit);"
                    " only 16-bit PCM is supported"
                )
            if channels < 1 or rate < 1:
                raise WavHeaderError(f"{path}: invalid fmt fields")
            body = blob[body_start : body_start + chunk_size]
            if len(body) < chunk_size:
                raise WavTruncatedError(
                    f"{path}: data chunk declares {chunk_size} bytes, only {len(body)} present"
                )
            frame_bytes = 2 * channels
            if chunk_size % frame_bytes:
                raise WavTruncatedError(f"{path}: data chunk ends mid-frame")
            raw = np.frombuffer(body, dtype="<i2")
            mono = raw[::channels] if channels > 1 else raw
            return mono.astype(np.float64) / 32768.0, rate
        # skip unknown chunks; chunk bodies are word-aligned
        pos = body_start + chunk_size + (chunk_size & 1)

    if fmt is None:
        raise WavHeaderError(f"{path}: missing fmt chunk")
    raise WavHeaderError(f"{path}: missing data chunk")


def resample_pow2(samples: np.ndarray, from_hz: int, to_hz: int) -> np.ndarray:
    """Downsample by a power-of-two ratio using cascaded half-band stages.

    Each stage low-passes with the 3-tap kernel [0.25, 0.5, 0.25] (zero-padded
    edges) and keeps even-index samples, so output length is ceil(len / ratio).
    """
    if from_hz <= 0 or to_hz <= 0:
        raise ValueError("rates must be positive")
    if from_hz % to_hz:
        raise ValueError(f"resample ratio {from_hz}/{to_hz} is not an integer")
    ratio = from_hz // to_hz
    if ratio & (ratio - 1):
        raise ValueError(f"resample ratio {ratio} is not a power of two")
    out = np.asarray(samples, dtype=np.float64)
    while ratio > 1:
        padded = np.concatenate(([0.0], out, [0.0]))
        out = (0.25 * padded[:-2] + 0.5 * padded[1:-1] + 0.25 * padded[2:])[::2]
        ratio //= 2
    return out


def frame_count(n_samples: int, frame_size: int, hop_length: int) -> int:
    """Frames produced by a centered transform with half-frame zero padding per side."""
    return 1 + n_samples // hop_length


def prepare_window(samples: np.ndarray, rate_hz: int, window_s: float) -> np.ndarray:
    """Trim or zero-pad samples to exactly round(window_s * rate_hz) samples."""
    n = round(window_s * rate_hz)
    samples = np.asarray(samples, dtype=np.float64)
    if len(samples) >= n:
        return samples[:n]
    return np.concatenate([samples, np.zeros(n - len(samples))])


def _to_db(power: np.ndarray) -> np.ndarray:
    return 10.0 * np.log10(np.maximum(power, _DB_FLOOR))


def _linear_power_frames(samples: np.ndarray, cfg: DspConfig) -> np.ndarray:
    """Short-time power spectra, shape (frame_size/2 + 1, n_frames), pre-dB."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise ValueError("samples must be non-empty")
    n_fft = cfg.frame_size
    half = n_fft // 2
    padded = np.concatenate([np.zeros(half), x, np.zeros(half)])
    n_frames = frame_count(x.size, n_fft, cfg.hop_length)
    window = 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(n_fft) / n_fft))
    frames = np.lib.stride_tricks.sliding_window_view(padded, n_fft)[:: cfg.hop_length]
    frames = frames[:n_frames] * window
    spectrum = np.fft.rfft(frames, axis=1)
    return (spectrum.real**2 + spectrum.imag**2).T


def power_spectrogram(samples: np.ndarray, cfg: DspConfig) -> FeatureTensor:
    """dB power spectrogram with frame_size/2 + 1 frequency rows."""
    return FeatureTensor(_to_db(_linear_power_frames(samples, cfg)), Preprocessing.SPECTROGRAM)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_mels: int, n_fft: int, rate_hz: int) -> np.ndarray:
    """Triangular filters, shape (n_mels, n_fft/2 + 1), centers equally spaced in mel.

    Triangle corner frequencies are kept continuous (not snapped to bins) so
    filters stay non-degenerate even at very low sample rates.
    """
    mel_points = np.linspace(0.0, hz_to_mel(rate_hz / 2.0), n_mels + 2)
    hz_points = mel_to_hz(mel_points)
    bin_freqs = np.arange(n_fft // 2 + 1) * (rate_hz / n_fft)

    lower = hz_points[:-2, None]
    center = hz_points[1:-1, None]
    upper = hz_points[2:, None]
    rising = (bin_freqs - lower) / (center - lower)
    falling = (upper - bin_freqs) / (upper - center)
    return np.maximum(0.0, np.minimum(rising, falling))


def mel_spectrogram(samples: np.ndarray, cfg: DspConfig, rate_hz: int) -> FeatureTensor:
    """dB mel spectrogram: the filterbank applied to the linear power spectrogram."""
    linear = _linear_power_frames(samples, cfg)
    bank = mel_filterbank(cfg.n_mels, cfg.frame_size, rate_hz)
    return FeatureTensor(_to_db(bank @ linear), Preprocessing.MEL_SPECTROGRAM)


def mfcc(samples: np.ndarray, cfg: DspConfig, rate_hz: int) -> FeatureTensor:
    """First n_mfcc coefficients of the orthonormal DCT-II over the dB mel spectrum."""
    mel_db = mel_spectrogram(samples, cfg, rate_hz).values
    coeffs = dct(mel_db, type=2, norm="ortho", axis=0)
    return FeatureTensor(coeffs[: cfg.n_mfcc], Preprocessing.MFCC)


def compute_features(
    samples: np.ndarray, preprocessing: Preprocessing, cfg: DspConfig, rate_hz: int
) -> FeatureTensor:
    """Dispatch to the feature transform selected by a data genome."""
    if preprocessing is Preprocessing.SPECTROGRAM:
        return power_spectrogram(samples, cfg)
    if preprocessing is Preprocessing.MEL_SPECTROGRAM:
        return mel_spectrogram(samples, cfg, rate_hz)
    return mfcc(samples, cfg, rate_hz)


def feature_rows(preprocessing: Preprocessing, cfg: DspConfig) -> int:
    if preprocessing is Preprocessing.SPECTROGRAM:
        return cfg.frame_size // 2 + 1
    if preprocessing is Preprocessing.MEL_SPECTROGRAM:
        return cfg.n_mels
    return cfg.n_mfcc


def feature_shape(data: DataGenome, cfg: DspConfig) -> tuple[int, int, int]:
    """Shape (rows, cols, channels) of the feature tensor for a data genome.

    Pure shape arithmetic over window_s seconds of audio; no samples required.
    """
    n_samples = round(cfg.window_s * data.sample_rate_hz)
    cols = frame_count(n_samples, cfg.frame_size, cfg.hop_length)
    return (feature_rows(data.preprocessing, cfg), cols, 1)
