import numpy as np
import pytest

from neurobands.data import SynthSpec, synth_dataset
from neurobands.preprocess import prepare


@pytest.fixture
def small_recording():
    """8 trials x 32 channels x 1024 samples, theta vs gamma coded classes."""
    return synth_dataset(SynthSpec(n_trials=8, n_channels=32, n_samples=1024, seed=11))


@pytest.fixture
def trimmed_recording(small_recording):
    """Same recording with the 3 s baseline removed (640 samples left)."""
    return prepare(small_recording)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
