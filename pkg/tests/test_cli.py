import subprocess
import sys

import numpy as np
import pytest

from neurobands.io import load_portable, read_features


def run_cli(*args, env=None):
    return subprocess.run(
        [sys.executable, "-m", "neurobands.cli", *args],
        capture_output=True, text=True, env=env,
    )


@pytest.fixture(scope="module")
def synth_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "synth.eegb"
    result = run_cli("synth", "--trials", "8", "--seed", "7", "--out", str(path))
    assert result.returncode == 0, result.stderr
    return path


# --- synth ------------------------------------------------------------------

def test_synth_output_is_loadable(synth_file):
    rec = load_portable(synth_file)
    assert rec.n_trials == 8
    assert rec.n_channels == 32
    assert rec.sample_rate_hz == 128.0


def test_synth_missing_out_is_usage_error(tmp_path):
    result = run_cli("synth", "--trials", "4")
    assert result.returncode == 2


def test_synth_is_byte_deterministic(tmp_path, synth_file):
    other = tmp_path / "again.eegb"
    result = run_cli("synth", "--trials", "8", "--seed", "7", "--out", str(other))
    assert result.returncode == 0
    assert other.read_bytes() == synth_file.read_bytes()


def test_synth_bad_signal_channel_is_usage_error(tmp_path):
    result = run_cli("synth", "--signal-channels", "XX",
                     "--out", str(tmp_path / "x.eegb"))
    assert result.returncode == 2


# --- features ----------------------------------------------------------------

def test_features_set01_has_60_columns(tmp_path, synth_file):
    out = tmp_path / "f.eegb"
    result = run_cli("features", "--input", str(synth_file),
                     "--set", "set01", "--out", str(out))
    assert result.returncode == 0, result.stderr
    fs = read_features(out)
    assert fs.n_columns == 60
    assert fs.electrode_set_id == "set01"


def test_features_temporal_lobe_has_10_columns(tmp_path, synth_file):
    out = tmp_path / "f.eegb"
    result = run_cli("features", "--input", str(synth_file),
                     "--set", "lobe:temporal", "--out", str(out))
    assert result.returncode == 0, result.stderr
    assert read_features(out).n_columns == 10


def test_features_non_power_of_two_window_is_usage_error(tmp_path, synth_file):
    result = run_cli("features", "--input", str(synth_file), "--set", "set01",
                     "--window", "100", "--out", str(tmp_path / "f.eegb"))
    assert result.returncode == 2
    assert "power of two" in result.stderr


def test_features_unknown_set_is_usage_error(tmp_path, synth_file):
    result = run_cli("features", "--input", str(synth_file), "--set", "set99",
                     "--out", str(tmp_path / "f.eegb"))
    assert result.returncode == 2


def test_features_short_recording_is_runtime_error(tmp_path):
    small = tmp_path / "small.eegb"
    assert run_cli("synth", "--trials", "2", "--samples", "400",
                   "--out", str(small)).returncode == 0
    # 400 samples minus the 384-sample baseline leaves less than one window
    result = run_cli("features", "--input", str(small), "--set", "set01",
                     "--out", str(tmp_path / "f.eegb"))
    assert result.returncode == 1


def test_missing_input_file_is_runtime_error(tmp_path):
    result = run_cli("features", "--input", str(tmp_path / "absent.eegb"),
                     "--set", "set01", "--out", str(tmp_path / "f.eegb"))
    assert result.returncode == 1


# --- compare -------------------------------------------------------------------

def test_compare_single_set_writes_report(tmp_path, synth_file):
    report = tmp_path / "out.csv"
    result = run_cli("compare", "--input", str(synth_file), "--sets", "set04",
                     "--epochs", "2", "--seed", "1",
                     "--report", str(report), "--json", str(tmp_path / "out.json"),
                     "--no-figures")
    assert result.returncode == 0, result.stderr
    lines = report.read_text().splitlines()
    assert lines[0] == "set_id,n_electrodes,electrodes,prior_accuracy,our_accuracy"
    assert len(lines) == 2
    assert lines[1].startswith("set04,4,")
    assert "set04" in result.stdout


def test_compare_lobes_writes_five_rows(tmp_path, synth_file):
    report = tmp_path / "lobes.csv"
    result = run_cli("compare", "--input", str(synth_file), "--lobes",
                     "--epochs", "1", "--seed", "1",
                     "--report", str(report), "--no-figures")
    assert result.returncode == 0, result.stderr
    lines = report.read_text().splitlines()
    assert len(lines) == 6
    assert [l.split(",")[0] for l in lines[1:]] == [
        "frontal", "parietal", "occipital", "temporal", "central",
    ]


def test_compare_renders_figures_next_to_csv(tmp_path, synth_file):
    report = tmp_path / "fig.csv"
    result = run_cli("compare", "--input", str(synth_file), "--sets", "set04",
                     "--epochs", "1", "--seed", "1", "--report", str(report))
    assert result.returncode == 0, result.stderr
    assert (tmp_path / "fig.png").exists()
    assert (tmp_path / "fig_history.png").exists()


def test_compare_sweep_writes_curve(tmp_path, synth_file):
    report = tmp_path / "curve.csv"
    result = run_cli("compare", "--input", str(synth_file), "--sweep",
                     "--epochs", "1", "--seed", "1", "--report", str(report))
    assert result.returncode == 0, result.stderr
    lines = report.read_text().splitlines()
    assert lines[0] == "n_electrodes,set_id,accuracy"
    counts = [int(l.split(",")[0]) for l in lines[1:]]
    assert set(counts) <= {4, 5, 8, 12, 32}
    assert (tmp_path / "curve.png").exists()


def test_compare_is_deterministic(tmp_path, synth_file):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        result = run_cli("compare", "--input", str(synth_file), "--sets", "set04",
                         "--epochs", "2", "--seed", "1",
                         "--report", str(path), "--no-figures")
        assert result.returncode == 0, result.stderr
    assert a.read_bytes() == b.read_bytes()


def test_env_seed_fallback(tmp_path, synth_file):
    import os

    env = dict(os.environ, NEUROBANDS_SEED="7")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        result = run_cli("compare", "--input", str(synth_file), "--sets", "set04",
                         "--epochs", "1", "--report", str(path), "--no-figures",
                         env=env)
        assert result.returncode == 0, result.stderr
    assert a.read_bytes() == b.read_bytes()
