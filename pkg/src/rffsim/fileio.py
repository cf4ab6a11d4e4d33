"""File formats: raw IQ captures and fingerprint JSON-lines records.

IQ files hold interleaved little-endian float32 I,Q pairs with no header;
the sample count is implied by the frame spec.  Fingerprint stores are one
JSON object per line with keys device_label, source, ebn0_db, b_hat (as
[re, im] pairs) and seed.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import InputSizeError
from .ofdm import FrameSpec
from .pipeline import FrameCapture, split_frame
from .separation import Fingerprint


def write_iq(path, samples) -> None:
    samples = np.asarray(samples, dtype=complex)
    interleaved = np.empty(2 * samples.size, dtype="<f4")
    interleaved[0::2] = samples.real
    interleaved[1::2] = samples.imag
    interleaved.tofile(path)


def read_iq(path) -> np.ndarray:
    raw = np.fromfile(path, dtype="<f4")
    if raw.size % 2 != 0:
        raise InputSizeError(f"{path}: odd float count {raw.size}, not I/Q pairs")
    return raw[0::2].astype(complex) + 1j * raw[1::2]


def ingest_iq_capture(path, spec: FrameSpec, pilot_fd,
                      drive: float = 1.0) -> FrameCapture:
    """Read one frame's IQ file and split it into pilot/payload portions."""
    samples = read_iq(path)
    if samples.size != spec.frame_len:
        raise InputSizeError(
            f"{path}: expected {spec.frame_len} complex samples, "
            f"found {samples.size}"
        )
    return split_frame(samples, pilot_fd, spec, drive=drive)


def fingerprint_record(fingerprint: Fingerprint, *, device_label=None,
                       ebn0_db=None, seed=None) -> dict:
    return {
        "device_label": device_label,
        "source": fingerprint.source,
        "ebn0_db": ebn0_db,
        "b_hat": [[float(c.real), float(c.imag)] for c in fingerprint.b_hat],
        "seed": seed,
    }


def append_fingerprints(path, records) -> None:
    with open(path, "a") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


def read_fingerprints(path) -> list[dict]:
    records = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            records.append(json.loads(line))
    return records
