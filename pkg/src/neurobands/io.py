"""EEGB v1 portable container: recordings and feature sets on disk.

Layout (all integers little-endian):

    bytes 0-4   ASCII magic "EEGB1"
    bytes 5-8   header byte-length, unsigned 32-bit
    header      UTF-8 JSON
    payload     raw little-endian arrays, C order

Recording headers carry {version, subject_id, sample_rate_hz, n_trials,
n_channels, n_samples, channel_names, labels}; the payload is
n_trials*n_channels*n_samples binary32 values.

Feature headers carry {version, kind:"features", electrode_set_id,
columns, n_rows}; the payload is the feature matrix (binary32), the row
labels (uint8), then three int32 provenance arrays (subject, trial,
window_start), each n_rows long.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .data import Recording
from .errors import FormatError, MontageError, TruncatedError
from .montage import GENEVA_ORDER

MAGIC = b"EEGB1"


def _pack_header(header: dict) -> bytes:
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return MAGIC + struct.pack("<I", len(blob)) + blob


def _read_header(raw: bytes, path: Path) -> tuple[dict, int]:
    if raw[:5] != MAGIC:
        raise FormatError(f"{path}: bad magic {raw[:5]!r}, expected {MAGIC!r}")
    if len(raw) < 9:
        raise TruncatedError(f"{path}: file shorter than its fixed header")
    (header_len,) = struct.unpack("<I", raw[5:9])
    blob = raw[9 : 9 + header_len]
    if len(blob) != header_len:
        raise TruncatedError(f"{path}: header truncated")
    try:
        header = json.loads(blob.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: header is not valid JSON: {exc}") from exc
    return header, 9 + header_len


def write_portable(rec: Recording, path: str | Path) -> None:
    """Write a Recording as an EEGB v1 file (values cast to binary32)."""
    header = {
        "version": 1,
        "subject_id": rec.subject_id,
        "sample_rate_hz": rec.sample_rate_hz,
        "n_trials": rec.n_trials,
        "n_channels": rec.n_channels,
        "n_samples": rec.n_samples,
        "channel_names": list(rec.channel_names),
        "labels": np.asarray(rec.labels, dtype=np.float64).tolist(),
    }
    payload = np.ascontiguousarray(rec.data, dtype="<f4").tobytes()
    Path(path).write_bytes(_pack_header(header) + payload)


def load_portable(path: str | Path) -> Recording:
    """Load an EEGB v1 recording.

    Raises:
        FormatError: bad magic or unparseable header.
        TruncatedError: payload length does not match the declared shape.
        MontageError: channel names deviate from Geneva order.
    """
    path = Path(path)
    raw = path.read_bytes()
    header, offset = _read_header(raw, path)

    try:
        n_trials = int(header["n_trials"])
        n_channels = int(header["n_channels"])
        n_samples = int(header["n_samples"])
        names = list(header["channel_names"])
        labels = np.asarray(header["labels"], dtype=np.float64)
        subject_id = int(header["subject_id"])
        rate = float(header["sample_rate_hz"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: header missing or malformed field: {exc}") from exc

    expected = n_trials * n_channels * n_samples * 4
    payload = raw[offset:]
    if len(payload) != expected:
        raise TruncatedError(
            f"{path}: payload is {len(payload)} bytes, expected {expected}"
        )
    if labels.shape != (n_trials, 4):
        raise FormatError(f"{path}: labels shape {labels.shape} != ({n_trials}, 4)")

    # Channel names must match Geneva order positionally (no permutation);
    # fewer than 32 channels means a prefix of the ordering.
    if n_channels > len(GENEVA_ORDER):
        raise MontageError(f"{path}: {n_channels} channels exceed the 32-channel montage")
    expected_names = GENEVA_ORDER[:n_channels]
    if len(names) != n_channels or any(
        a.lower() != b.lower() for a, b in zip(names, expected_names)
    ):
        raise MontageError(
            f"{path}: channel names {names} do not match Geneva order "
            f"{list(expected_names)}"
        )

    data = (
        np.frombuffer(payload, dtype="<f4")
        .reshape(n_trials, n_channels, n_samples)
        .astype(np.float32)
    )
    return Recording(
        subject_id=subject_id,
        sample_rate_hz=rate,
        data=data,
        labels=labels,
        channel_names=[str(n) for n in expected_names],
    )


def write_features(fs, path: str | Path) -> None:
    """Write a FeatureSet as an EEGB v1 features container."""
    matrix = np.ascontiguousarray(fs.matrix, dtype="<f4")
    header = {
        "version": 1,
        "kind": "features",
        "electrode_set_id": fs.electrode_set_id,
        "columns": list(fs.column_names),
        "n_rows": int(matrix.shape[0]),
    }
    parts = [
        _pack_header(header),
        matrix.tobytes(),
        np.ascontiguousarray(fs.labels, dtype=np.uint8).tobytes(),
        np.ascontiguousarray(fs.subject, dtype="<i4").tobytes(),
        np.ascontiguousarray(fs.trial, dtype="<i4").tobytes(),
        np.ascontiguousarray(fs.window_start, dtype="<i4").tobytes(),
    ]
    Path(path).write_bytes(b"".join(parts))


def read_features(path: str | Path):
    """Load an EEGB v1 features container back into a FeatureSet."""
    from .spectral import FeatureSet  # late import to avoid a cycle

    path = Path(path)
    raw = path.read_bytes()
    header, offset = _read_header(raw, path)
    if header.get("kind") != "features":
        raise FormatError(f"{path}: not a features container")

    columns = list(header["columns"])
    n_rows = int(header["n_rows"])
    n_cols = len(columns)

    sizes = [n_rows * n_cols * 4, n_rows, n_rows * 4, n_rows * 4, n_rows * 4]
    if len(raw) - offset != sum(sizes):
        raise TruncatedError(
            f"{path}: payload is {len(raw) - offset} bytes, expected {sum(sizes)}"
        )
    views = []
    for size in sizes:
        views.append(raw[offset : offset + size])
        offset += size

    matrix = np.frombuffer(views[0], dtype="<f4").reshape(n_rows, n_cols).astype(np.float64)
    return FeatureSet(
        matrix=matrix,
        labels=np.frombuffer(views[1], dtype=np.uint8).astype(np.int64),
        subject=np.frombuffer(views[2], dtype="<i4").astype(np.int64),
        trial=np.frombuffer(views[3], dtype="<i4").astype(np.int64),
        window_start=np.frombuffer(views[4], dtype="<i4").astype(np.int64),
        electrode_set_id=str(header["electrode_set_id"]),
        column_names=columns,
    )
