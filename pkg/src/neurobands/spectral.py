"""Spectral engines and sliding-window five-band power features.

The transform pair here is deliberately redundant: dft_naive computes the
direct O(N^2) sum and serves as the oracle for the radix-2 fft, which is
what the feature extractor actually calls.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .data import LabelConfig, Recording, binarize
from .errors import BandError, FftSizeError, WindowError

LOG_EPSILON = 1e-8  # guards log() on the all-zero-signal case


@dataclass(frozen=True)
class BandDefinition:
    """One frequency sub-band; membership is half-open [low_hz, high_hz)."""

    name: str
    low_hz: float
    high_hz: float


# The five sub-bands; together they tile [4, 45) Hz with no gap or overlap.
BANDS: tuple[BandDefinition, ...] = (
    BandDefinition("Delta", 4.0, 8.0),
    BandDefinition("Theta", 8.0, 12.0),
    BandDefinition("Alpha", 12.0, 16.0),
    BandDefinition("Beta", 16.0, 25.0),
    BandDefinition("Gamma", 25.0, 45.0),
)

N_BANDS = len(BANDS)


@dataclass(frozen=True)
class WindowPlan:
    """Sliding-window schedule: rectangular windows, fixed step."""

    window_size: int = 256
    step_size: int = 16

    def __post_init__(self) -> None:
        if self.window_size < 1 or self.window_size & (self.window_size - 1):
            raise FftSizeError(f"window_size {self.window_size} is not a power of two")
        if self.step_size < 1:
            raise FftSizeError(f"step_size must be >= 1, got {self.step_size}")


@dataclass
class Spectrum:
    """Complex DFT bins; bin k maps to frequency k * rate_hz / N."""

    bins: np.ndarray
    rate_hz: float

    @property
    def n(self) -> int:
        return self.bins.shape[-1]

    def frequencies(self) -> np.ndarray:
        return np.arange(self.n) * self.rate_hz / self.n


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@lru_cache(maxsize=16)
def _bit_reverse_indices(n: int) -> np.ndarray:
    idx = np.zeros(1, dtype=np.intp)
    while idx.size < n:
        idx = np.concatenate([2 * idx, 2 * idx + 1])
    return idx


def fft_bins(x: np.ndarray) -> np.ndarray:
    """Radix-2 decimation-in-time FFT over the last axis.

    Accepts any batch shape [..., N]; N must be a power of two.

    Raises:
        FftSizeError: N is not a power of two.
    """
    x = np.asarray(x)
    n = x.shape[-1]
    if not _is_pow2(n):
        raise FftSizeError(f"transform length {n} is not a power of two")
    y = x[..., _bit_reverse_indices(n)].astype(np.complex128)
    m = 2
    while m <= n:
        half = m // 2
        twiddle = np.exp(-2j * np.pi * np.arange(half) / m)
        blocks = y.reshape(*y.shape[:-1], n // m, m)
        even = blocks[..., :half]
        odd = blocks[..., half:] * twiddle
        y = np.concatenate([even + odd, even - odd], axis=-1).reshape(y.shape)
        m *= 2
    return y


def fft(x: np.ndarray, rate_hz: float = 1.0) -> Spectrum:
    """Radix-2 FFT of a single real signal, as a Spectrum."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise FftSizeError(f"fft expects a 1-D signal, got shape {x.shape}")
    return Spectrum(bins=fft_bins(x), rate_hz=rate_hz)


@lru_cache(maxsize=8)
def _dft_kernel(n: int) -> np.ndarray:
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n)


def dft_naive(x: np.ndarray, rate_hz: float = 1.0) -> Spectrum:
    """Direct-sum DFT, X[k] = sum_n x[n] exp(-2*pi*i*k*n/N).

    O(N^2); any length. Oracle for fft — shares nothing with the
    radix-2 path.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise FftSizeError(f"dft_naive expects a 1-D signal, got shape {x.shape}")
    return Spectrum(bins=_dft_kernel(x.shape[0]) @ x, rate_hz=rate_hz)


def band_power(spectrum: Spectrum, band: BandDefinition) -> float:
    """Sum of |X[k]|^2 over one-sided bins with frequency in [low, high).

    Bin 0 (DC) is never included; bins run k = 1 .. N/2.

    Raises:
        BandError: band does not fit inside (0, rate/2].
    """
    nyquist = spectrum.rate_hz / 2.0
    if not (0.0 < band.low_hz < band.high_hz <= nyquist):
        raise BandError(
            f"band [{band.low_hz}, {band.high_hz}) outside (0, {nyquist}] "
            f"at rate {spectrum.rate_hz}"
        )
    n = spectrum.n
    k = np.arange(1, n // 2 + 1)
    freqs = k * spectrum.rate_hz / n
    selected = k[(freqs >= band.low_hz) & (freqs < band.high_hz)]
    return float(np.sum(np.abs(spectrum.bins[selected]) ** 2))


@lru_cache(maxsize=8)
def _band_masks(n: int, rate_hz: float) -> np.ndarray:
    """Boolean [n_bands, n//2] selector over one-sided bins k = 1..n//2."""
    k = np.arange(1, n // 2 + 1)
    freqs = k * rate_hz / n
    return np.stack(
        [(freqs >= b.low_hz) & (freqs < b.high_hz) for b in BANDS]
    )


def extract_windows(channel: np.ndarray, plan: WindowPlan) -> np.ndarray:
    """All rectangular windows of one channel, as a [n_windows, W] view.

    Windows start at 0, step, 2*step, ...; count = floor((T - W)/step) + 1.

    Raises:
        WindowError: signal shorter than one window.
    """
    x = np.asarray(channel)
    if x.ndim != 1:
        raise WindowError(f"expected a 1-D channel, got shape {x.shape}")
    if x.shape[0] < plan.window_size:
        raise WindowError(
            f"signal length {x.shape[0]} < window size {plan.window_size}"
        )
    return sliding_window_view(x, plan.window_size)[:: plan.step_size]


def window_count(n_samples: int, plan: WindowPlan) -> int:
    if n_samples < plan.window_size:
        raise WindowError(f"signal length {n_samples} < window size {plan.window_size}")
    return (n_samples - plan.window_size) // plan.step_size + 1


@dataclass
class FeatureSet:
    """Windowed band-power matrix with per-row labels and provenance.

    Columns are electrode-major then band: column i*5+j holds band j of
    the set's i-th electrode. Values are log(power + 1e-8).
    """

    matrix: np.ndarray        # [n_rows, n_electrodes * 5]
    labels: np.ndarray        # [n_rows] in {0, 1}
    subject: np.ndarray       # [n_rows]
    trial: np.ndarray         # [n_rows]
    window_start: np.ndarray  # [n_rows], sample offset of the window
    electrode_set_id: str
    column_names: list[str] = field(default_factory=list)

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_columns(self) -> int:
        return self.matrix.shape[1]

    def take(self, indices: np.ndarray) -> "FeatureSet":
        """Row subset, preserving labels and provenance."""
        idx = np.asarray(indices)
        return FeatureSet(
            matrix=self.matrix[idx],
            labels=self.labels[idx],
            subject=self.subject[idx],
            trial=self.trial[idx],
            window_start=self.window_start[idx],
            electrode_set_id=self.electrode_set_id,
            column_names=list(self.column_names),
        )


def concat_features(parts: list[FeatureSet]) -> FeatureSet:
    """Stack feature sets from several recordings of the same electrode set."""
    if not parts:
        raise ValueError("no feature sets to concatenate")
    first = parts[0]
    for p in parts[1:]:
        if p.column_names != first.column_names:
            raise ValueError("feature sets have different column layouts")
    return FeatureSet(
        matrix=np.concatenate([p.matrix for p in parts]),
        labels=np.concatenate([p.labels for p in parts]),
        subject=np.concatenate([p.subject for p in parts]),
        trial=np.concatenate([p.trial for p in parts]),
        window_start=np.concatenate([p.window_start for p in parts]),
        electrode_set_id=first.electrode_set_id,
        column_names=list(first.column_names),
    )


def extract_features(
    rec: Recording,
    electrode_set,
    plan: WindowPlan | None = None,
    label_cfg: LabelConfig | None = None,
) -> FeatureSet:
    """Five-band log-power features for every (trial, window, electrode).

    The recording is expected to be baseline-trimmed already. Every row
    carries its source trial's binarized label.

    Raises:
        MontageError: an electrode of the set is absent from the recording.
        WindowError: trials shorter than one window.
    """
    from .electrode_sets import resolve_indices  # avoids a module cycle

    plan = plan or WindowPlan()
    label_cfg = label_cfg or LabelConfig()

    indices = resolve_indices(electrode_set, rec.channel_names)
    trial_labels = binarize(rec.labels, label_cfg.column, label_cfg.threshold)

    n_w = window_count(rec.n_samples, plan)
    masks = _band_masks(plan.window_size, rec.sample_rate_hz).astype(np.float64)
    half = plan.window_size // 2

    n_sel = len(indices)
    rows = np.empty((rec.n_trials * n_w, n_sel * N_BANDS), dtype=np.float64)
    for t in range(rec.n_trials):
        sel = np.asarray(rec.data[t][indices], dtype=np.float64)  # [n_sel, T]
        wins = sliding_window_view(sel, plan.window_size, axis=-1)[
            :, :: plan.step_size, :
        ]  # [n_sel, n_w, W]
        spectra = fft_bins(wins)
        power = np.abs(spectra[..., 1 : half + 1]) ** 2 @ masks.T  # [n_sel, n_w, 5]
        feats = np.log(power + LOG_EPSILON)
        rows[t * n_w : (t + 1) * n_w] = feats.transpose(1, 0, 2).reshape(n_w, -1)

    columns = [
        f"{name}:{band.name}"
        for name in electrode_set.electrodes
        for band in BANDS
    ]
    starts = np.arange(n_w) * plan.step_size
    return FeatureSet(
        matrix=rows,
        labels=np.repeat(trial_labels, n_w),
        subject=np.full(rec.n_trials * n_w, rec.subject_id, dtype=np.int64),
        trial=np.repeat(np.arange(rec.n_trials, dtype=np.int64), n_w),
        window_start=np.tile(starts, rec.n_trials).astype(np.int64),
        electrode_set_id=electrode_set.id,
        column_names=columns,
    )
