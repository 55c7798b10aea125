"""Raw-signal conditioning: bandpass, downsample, re-reference, baseline trim.

The chain accepts either raw-rate input (full conditioning) or
already-preprocessed 128 Hz input (baseline trim only), so preprocessed
archive files are never double-filtered.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import butter, sosfiltfilt

from .data import Recording
from .errors import FilterError, ResampleError, TrimError

BASELINE_SECONDS = 3.0


@dataclass(frozen=True)
class FilterSpec:
    """Bandpass edges and order; applied forward-backward (zero phase)."""

    low_cut_hz: float = 4.0
    high_cut_hz: float = 45.0
    order: int = 4


def bandpass(signal: np.ndarray, rate_hz: float, spec: FilterSpec | None = None) -> np.ndarray:
    """Zero-phase Butterworth bandpass along the last axis.

    Raises:
        FilterError: band edges invalid for the sample rate.
    """
    spec = spec or FilterSpec()
    nyquist = rate_hz / 2.0
    if not 0.0 < spec.low_cut_hz < spec.high_cut_hz < nyquist:
        raise FilterError(
            f"band [{spec.low_cut_hz}, {spec.high_cut_hz}] Hz invalid at "
            f"rate {rate_hz} Hz (Nyquist {nyquist})"
        )
    sos = butter(spec.order, [spec.low_cut_hz, spec.high_cut_hz],
                 btype="bandpass", fs=rate_hz, output="sos")
    return sosfiltfilt(sos, np.asarray(signal, dtype=np.float64), axis=-1)


def downsample(signal: np.ndarray, from_hz: float, to_hz: float) -> np.ndarray:
    """Anti-alias lowpass then decimate by the integer ratio from/to.

    The lowpass corner sits at 0.9x the new Nyquist. Output length is
    floor(n / ratio).

    Raises:
        ResampleError: from_hz is not an integer multiple of to_hz.
    """
    ratio = from_hz / to_hz
    if abs(ratio - round(ratio)) > 1e-9 or ratio < 1:
        raise ResampleError(f"{from_hz} -> {to_hz} Hz is not an integer decimation")
    ratio = int(round(ratio))
    x = np.asarray(signal, dtype=np.float64)
    if ratio == 1:
        return x.copy()
    sos = butter(8, 0.9 * (to_hz / 2.0), btype="lowpass", fs=from_hz, output="sos")
    filtered = sosfiltfilt(sos, x, axis=-1)
    n_out = x.shape[-1] // ratio
    return filtered[..., ::ratio][..., :n_out]


def average_reference(trial: np.ndarray) -> np.ndarray:
    """Common-average reference: subtract the per-sample channel mean."""
    x = np.asarray(trial, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError(f"expected [n_channels>=2][n_samples], got shape {x.shape}")
    return x - x.mean(axis=0, keepdims=True)


def trim_baseline(trial: np.ndarray, rate_hz: float,
                  baseline_s: float = BASELINE_SECONDS) -> np.ndarray:
    """Drop the first round(baseline_s * rate) samples of every channel.

    Raises:
        TrimError: nothing (or less) would remain.
    """
    x = np.asarray(trial)
    cut = int(round(baseline_s * rate_hz))
    if x.shape[-1] <= cut:
        raise TrimError(
            f"trial of {x.shape[-1]} samples cannot lose a "
            f"{cut}-sample baseline"
        )
    return x[..., cut:]


def prepare(rec: Recording, input_kind: str = "preprocessed",
            baseline_s: float = BASELINE_SECONDS,
            filter_spec: FilterSpec | None = None,
            target_rate_hz: float = 128.0) -> Recording:
    """Condition a Recording for feature extraction.

    input_kind "preprocessed": data is already 128 Hz, filtered and
    referenced — only the baseline is trimmed. input_kind "raw": the
    full chain runs (downsample, bandpass, common average reference,
    trim).
    """
    if input_kind not in ("raw", "preprocessed"):
        raise ValueError(f"input_kind must be 'raw' or 'preprocessed', got {input_kind!r}")

    data = np.asarray(rec.data, dtype=np.float64)
    rate = rec.sample_rate_hz
    if input_kind == "raw":
        if rate != target_rate_hz:
            data = downsample(data, rate, target_rate_hz)
            rate = target_rate_hz
        data = bandpass(data, rate, filter_spec)
        data = np.stack([average_reference(trial) for trial in data])
    if baseline_s > 0:
        data = trim_baseline(data, rate, baseline_s)
    return replace(rec, data=data, sample_rate_hz=rate)
