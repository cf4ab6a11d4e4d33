"""Experiment configuration and the bundled reference transmitter profiles."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .device_channel import TransmitterProfile
from .errors import ConfigurationError
from .ofdm import PILOT_SEED, FrameSpec
from .poly_basis import BasisConfig


def default_profiles() -> tuple[TransmitterProfile, ...]:
    """The two bundled device profiles used by the stock experiments."""
    return (
        TransmitterProfile(
            coeffs=[1.0, -0.0735 - 0.0114j, -0.0986 + 0.0590j, -0.0547 - 0.0055j],
            label="transmitter-1",
        ),
        TransmitterProfile(
            coeffs=[1.0, -0.0910 + 0.1580j, 0.2503 + 0.0286j, 0.0155 + 0.0025j],
            label="transmitter-2",
        ),
    )


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a sweep needs: frame dimensions, grid, devices, seeds.

    input_backoff_db scales the modulated waveform before the transmitter
    nonlinearity (drive amplitude 10^(-ibo/20)); the default keeps the
    distortion mild enough for payload demodulation while leaving the
    nonlinear terms estimable.
    """

    n_subcarriers: int = 2048
    cp_len: int = 512
    payload_counts: tuple[int, ...] = (1, 2, 4, 8)
    ebn0_dbs: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0)
    n_trials: int = 100
    samples_per_device: int = 66
    knn_k: int = 3
    max_delay: int = 8
    n_paths: int = 5
    pdp_tau: float | None = 2.0
    basis_order: int = 7
    input_backoff_db: float = 8.0
    channel_per_frame: bool = True
    payload_average_per_symbol: bool = False
    pilot_seed: int = PILOT_SEED
    master_seed: int = 0
    profiles: tuple[TransmitterProfile, ...] = field(default_factory=default_profiles)

    def __post_init__(self):
        if not self.payload_counts or any(p < 1 for p in self.payload_counts):
            raise ConfigurationError("payload_counts must be positive and non-empty")
        if not self.ebn0_dbs:
            raise ConfigurationError("ebn0_dbs must be non-empty")
        if self.n_trials < 1 or self.samples_per_device < 2:
            raise ConfigurationError(
                "need at least 1 trial and 2 samples per device"
            )
        if len(self.profiles) < 2:
            raise ConfigurationError("need at least two device profiles")
        labels = [p.label for p in self.profiles]
        if len(set(labels)) != len(labels):
            raise ConfigurationError(f"duplicate profile labels: {labels}")

    @property
    def drive(self) -> float:
        """Amplitude applied to the modulated waveform before the nonlinearity."""
        return 10.0 ** (-self.input_backoff_db / 20.0)

    @property
    def basis_config(self) -> BasisConfig:
        return BasisConfig(order=self.basis_order, n_taps=self.max_delay + 1)

    def frame_spec(self, n_payload_symbols: int) -> FrameSpec:
        return FrameSpec(
            n_subcarriers=self.n_subcarriers,
            cp_len=self.cp_len,
            n_payload_symbols=n_payload_symbols,
        )


def _profile_from_dict(entry) -> TransmitterProfile:
    try:
        coeffs = np.array([complex(re, im) for re, im in entry["coeffs"]])
        return TransmitterProfile(coeffs=coeffs, label=str(entry["label"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(
            f"profile entries need 'label' and 'coeffs' as [re, im] pairs: {exc}"
        ) from exc


def load_config(path) -> ExperimentConfig:
    """Read an ExperimentConfig from a JSON file.

    Keys mirror the dataclass fields; profiles are given as
    {"label": ..., "coeffs": [[re, im], ...]}.  Unknown keys are rejected.
    """
    raw = json.loads(Path(path).read_text())
    if not isinstance(raw, dict):
        raise ConfigurationError("config file must contain a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigurationError(f"unknown config keys: {unknown}")
    kwargs = dict(raw)
    for key in ("payload_counts", "ebn0_dbs"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    if "profiles" in kwargs:
        kwargs["profiles"] = tuple(_profile_from_dict(p) for p in kwargs["profiles"])
    return ExperimentConfig(**kwargs)


def save_config(cfg: ExperimentConfig, path) -> None:
    """Write a config back out as JSON (the inverse of load_config)."""
    data = {
        f.name: getattr(cfg, f.name)
        for f in fields(ExperimentConfig)
        if f.name != "profiles"
    }
    data["payload_counts"] = list(cfg.payload_counts)
    data["ebn0_dbs"] = list(cfg.ebn0_dbs)
    data["profiles"] = [
        {"label": p.label,
         "coeffs": [[float(c.real), float(c.imag)] for c in p.coeffs]}
        for p in cfg.profiles
    ]
    Path(path).write_text(json.dumps(data, indent=2) + "\n")
