import numpy as np
import pytest

from neurobands.data import SynthSpec, synth_dataset
from neurobands.errors import FormatError, MontageError, TruncatedError
from neurobands.io import load_portable, read_features, write_features, write_portable
from neurobands.montage import GENEVA_ORDER
from neurobands.spectral import WindowPlan, extract_features
from neurobands.electrode_sets import lobe_set


def test_round_trip_preserves_values_at_f32(tmp_path):
    rec = synth_dataset(SynthSpec(n_trials=3, n_channels=5, n_samples=300, seed=2))
    path = tmp_path / "r.eegb"
    write_portable(rec, path)
    back = load_portable(path)
    assert back.data.shape == rec.data.shape
    assert np.array_equal(back.data, rec.data.astype(np.float32))
    assert np.array_equal(back.labels, rec.labels)
    assert back.channel_names == rec.channel_names
    assert back.subject_id == rec.subject_id
    assert back.sample_rate_hz == rec.sample_rate_hz


def test_declared_full_size_shape_round_trip(tmp_path):
    rec = synth_dataset(SynthSpec(n_trials=2, n_channels=32, n_samples=8064, seed=1))
    path = tmp_path / "full.eegb"
    write_portable(rec, path)
    back = load_portable(path)
    assert (back.n_trials, back.n_channels, back.n_samples) == (2, 32, 8064)


def test_truncated_payload(tmp_path):
    rec = synth_dataset(SynthSpec(n_trials=2, n_channels=3, n_samples=64, seed=4))
    path = tmp_path / "t.eegb"
    write_portable(rec, path)
    raw = path.read_bytes()
    path.write_bytes(raw[:-4])
    with pytest.raises(TruncatedError):
        load_portable(path)


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.eegb"
    path.write_bytes(b"NOPE!" + bytes(64))
    with pytest.raises(FormatError):
        load_portable(path)


def test_garbled_header_is_a_format_error(tmp_path):
    path = tmp_path / "g.eegb"
    path.write_bytes(b"EEGB1" + (7).to_bytes(4, "little") + b"{broken" + bytes(16))
    with pytest.raises(FormatError):
        load_portable(path)


def test_permuted_channel_names_rejected(tmp_path):
    rec = synth_dataset(SynthSpec(n_trials=1, n_channels=4, n_samples=64, seed=4))
    swapped = synth_dataset(SynthSpec(n_trials=1, n_channels=4, n_samples=64, seed=4))
    swapped.channel_names = [GENEVA_ORDER[1], GENEVA_ORDER[0],
                             GENEVA_ORDER[2], GENEVA_ORDER[3]]
    path = tmp_path / "p.eegb"
    write_portable(swapped, path)
    with pytest.raises(MontageError):
        load_portable(path)
    del rec


def test_features_container_round_trip(tmp_path, trimmed_recording):
    fs = extract_features(trimmed_recording, lobe_set("Temporal"), WindowPlan())
    path = tmp_path / "f.eegb"
    write_features(fs, path)
    back = read_features(path)
    assert back.column_names == fs.column_names
    assert back.electrode_set_id == fs.electrode_set_id
    assert np.array_equal(back.labels, fs.labels)
    assert np.array_equal(back.trial, fs.trial)
    assert np.array_equal(back.window_start, fs.window_start)
    assert np.array_equal(back.matrix, fs.matrix.astype(np.float32).astype(np.float64))


def test_write_is_deterministic(tmp_path):
    rec = synth_dataset(SynthSpec(n_trials=2, n_channels=3, n_samples=128, seed=9))
    a, b = tmp_path / "a.eegb", tmp_path / "b.eegb"
    write_portable(rec, a)
    write_portable(rec, b)
    assert a.read_bytes() == b.read_bytes()
