"""Recording data model, label binarization, and synthetic dataset generation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import LabelRangeError, SpecError
from .montage import GENEVA_ORDER

# Label matrix column order: (valence, arousal, dominance, liking).
LABEL_COLUMNS: dict[str, int] = {"valence": 0, "arousal": 1, "dominance": 2, "liking": 3}

DEFAULT_THRESHOLD = 5.0  # midpoint of the 1-9 rating scale, ">= -> high"


@dataclass(frozen=True)
class LabelConfig:
    """Which rating column to binarize and at what threshold."""

    label: str = "valence"
    threshold: float = DEFAULT_THRESHOLD

    @property
    def column(self) -> int:
        return LABEL_COLUMNS[self.label]


@dataclass
class Recording:
    """A subject's trials: data[trial][channel][sample] plus ratings.

    Immutable by convention after construction; safe to share across workers.
    """

    subject_id: int
    sample_rate_hz: float
    data: np.ndarray            # [n_trials][n_channels][n_samples]
    labels: np.ndarray          # [n_trials][4], ratings in [1, 9]
    channel_names: list[str]

    def __post_init__(self) -> None:
        if self.data.ndim != 3:
            raise ValueError(f"data must be 3-D, got shape {self.data.shape}")
        if self.labels.shape != (self.data.shape[0], 4):
            raise ValueError(
                f"labels must be [n_trials][4]; got {self.labels.shape} "
                f"for {self.data.shape[0]} trials"
            )
        if len(self.channel_names) != self.data.shape[1]:
            raise ValueError(
                f"{len(self.channel_names)} channel names for "
                f"{self.data.shape[1]} channels"
            )

    @property
    def n_trials(self) -> int:
        return self.data.shape[0]

    @property
    def n_channels(self) -> int:
        return self.data.shape[1]

    @property
    def n_samples(self) -> int:
        return self.data.shape[2]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate_hz


def binarize(labels: np.ndarray, column: int, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    """Binarize one rating column: class 1 iff rating >= threshold.

    Args:
        labels: [n_trials][4] rating matrix with values in [1, 9].
        column: rating column index (see LABEL_COLUMNS).
        threshold: cut point, must lie in (1, 9).

    Returns:
        int array of 0/1 class labels, one per trial.

    Raises:
        LabelRangeError: any rating outside [1, 9].
    """
    ratings = np.asarray(labels, dtype=np.float64)[:, column]
    if np.any(ratings < 1.0) or np.any(ratings > 9.0):
        bad = ratings[(ratings < 1.0) | (ratings > 9.0)][0]
        raise LabelRangeError(f"rating {bad} outside [1, 9]")
    if not 1.0 < threshold < 9.0:
        raise LabelRangeError(f"threshold {threshold} outside (1, 9)")
    return (ratings >= threshold).astype(np.int64)


def binarize_valence(labels: np.ndarray, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    """Binarize the valence column (column 0)."""
    return binarize(labels, LABEL_COLUMNS["valence"], threshold)


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a deterministic synthetic recording.

    Each trial of class c carries a sinusoid at the center of
    class_band_map[c] (amplitude 1) plus Gaussian noise. Ratings are set
    so that binarize_valence recovers the class at the default threshold.
    """

    n_trials: int = 8
    n_channels: int = 32
    n_samples: int = 1024
    sample_rate_hz: float = 128.0
    # class -> (low_hz, high_hz); the tone sits at the band center
    class_band_map: dict[int, tuple[float, float]] = field(
        default_factory=lambda: {0: (8.0, 12.0), 1: (25.0, 45.0)}
    )
    noise_amplitude: float = 0.1
    seed: int = 0
    # optional subset of channel indices carrying the tone; None = all
    signal_channels: tuple[int, ...] | None = None


def synth_dataset(spec: SynthSpec) -> Recording:
    """Generate a class-separable synthetic Recording from a SynthSpec.

    Output is bit-identical for identical specs. Trials alternate class
    0, 1, 0, 1, ... Class-c trials get valence 2.0 (c=0) or 8.0 (c=1).

    Raises:
        SpecError: zero trials/channels or a class_band_map missing a class.
    """
    if spec.n_trials < 1 or spec.n_channels < 1 or spec.n_samples < 1:
        raise SpecError("n_trials, n_channels and n_samples must all be >= 1")
    if not {0, 1} <= set(spec.class_band_map):
        raise SpecError("class_band_map must cover classes 0 and 1")

    rng = np.random.default_rng(spec.seed)
    classes = np.arange(spec.n_trials) % 2
    t = np.arange(spec.n_samples) / spec.sample_rate_hz

    carriers = spec.signal_channels
    if carriers is not None:
        carriers = tuple(carriers)
        if any(c < 0 or c >= spec.n_channels for c in carriers):
            raise SpecError(f"signal_channels out of range for {spec.n_channels} channels")

    data = np.empty((spec.n_trials, spec.n_channels, spec.n_samples), dtype=np.float64)
    for trial, cls in enumerate(classes):
        low, high = spec.class_band_map[int(cls)]
        tone_hz = (low + high) / 2.0
        phase = rng.uniform(0.0, 2.0 * np.pi, size=spec.n_channels)
        tone = np.sin(2.0 * np.pi * tone_hz * t[None, :] + phase[:, None])
        if carriers is not None:
            mask = np.zeros(spec.n_channels)
            mask[list(carriers)] = 1.0
            tone = tone * mask[:, None]
        noise = spec.noise_amplitude * rng.standard_normal((spec.n_channels, spec.n_samples))
        data[trial] = tone + noise

    labels = np.full((spec.n_trials, 4), 5.0)
    labels[:, 0] = np.where(classes == 1, 8.0, 2.0)

    names = list(GENEVA_ORDER[: spec.n_channels])
    if spec.n_channels > len(GENEVA_ORDER):
        raise SpecError(f"at most {len(GENEVA_ORDER)} channels supported")
    return Recording(
        subject_id=1,
        sample_rate_hz=spec.sample_rate_hz,
        data=data,
        labels=labels,
        channel_names=names,
    )
