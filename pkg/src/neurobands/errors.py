"""Exception types raised across the pipeline."""


class NeurobandsError(Exception):
    """Base class for all package errors."""


class FormatError(NeurobandsError):
    """Portable file does not start with the expected magic or has a bad header."""


class TruncatedError(NeurobandsError):
    """Portable file payload does not match the shape declared in its header."""


class MontageError(NeurobandsError):
    """Electrode name does not resolve against the 32-channel montage."""


class LabelRangeError(NeurobandsError):
    """Rating outside the 1-9 scale."""


class SpecError(NeurobandsError):
    """Invalid synthetic dataset specification."""


class FilterError(NeurobandsError):
    """Filter band incompatible with the sample rate."""


class ResampleError(NeurobandsError):
    """Downsampling ratio is not an integer."""


class TrimError(NeurobandsError):
    """Trial too short for the requested baseline trim."""


class FftSizeError(NeurobandsError):
    """Transform length is not a power of two."""


class BandError(NeurobandsError):
    """Frequency band incompatible with the spectrum's Nyquist limit."""


class WindowError(NeurobandsError):
    """Signal shorter than one window."""


class LobeError(NeurobandsError):
    """Unknown lobe name."""


class SetIdError(NeurobandsError):
    """Electrode set number outside 1..9."""


class ConfigError(NeurobandsError):
    """Invalid network configuration."""


class ShapeError(NeurobandsError):
    """Batch shape incompatible with the network."""


class StateError(NeurobandsError):
    """Backward called without a cached forward pass."""


class DataError(NeurobandsError):
    """Training data missing a class."""


class SplitError(NeurobandsError):
    """Too few rows (or trials) per class to split."""
