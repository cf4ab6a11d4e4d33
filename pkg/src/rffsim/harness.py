"""Seeded Monte Carlo experiment driver.

Every random draw flows through a seed derived from the master seed and the
coordinates of the draw, never from loop order, so results are identical
under any scheduling and unchanged cells stay unchanged when the grid is
edited.  The derivation is

    SeedSequence(master_seed,
                 spawn_key=(stream, trial, device, frame, p, ebn0_bits, attempt))

with stream tags CHANNEL=1, BITS=2, NOISE=3 (SPLIT=4 uses a shorter key of
(4, trial, p, ebn0_bits, source_index)), ebn0_bits the IEEE-754 bit pattern
of ebn0_db, and attempt the redraw counter for frames skipped on spectral
nulls.  When the channel is shared across a trial (channel_per_frame=False)
the channel stream uses frame=0 and attempt=0.
"""

from __future__ import annotations

import functools
import struct
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import ofdm
from .classifier import evaluate_split
from .config import ExperimentConfig
from .device_channel import NoiseSpec, draw_rayleigh_channel, transmit
from .errors import SpectralNullError
from .pipeline import feature_from_fingerprint, process_capture, split_frame
from .separation import Fingerprint

STREAM_CHANNEL = 1
STREAM_BITS = 2
STREAM_NOISE = 3
STREAM_SPLIT = 4

# Give up on a frame after this many spectral-null redraws; with thousands
# of subcarriers and a handful of taps even one skip is already rare.
MAX_REDRAWS = 64

CSV_HEADER = "ebn0_db,p,source,acc_mean,acc_std,n_trials,skips"


def ebn0_key(ebn0_db: float) -> int:
    """Stable integer key for an Eb/N0 value (IEEE-754 bit pattern)."""
    return int.from_bytes(struct.pack("<d", float(ebn0_db)), "little")


def derive_seed(master_seed: int, *key) -> np.random.SeedSequence:
    """One independent RNG stream per (master seed, key tuple)."""
    return np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))


@functools.lru_cache(maxsize=8)
def _pilot_fd(n_subcarriers: int, pilot_seed: int) -> np.ndarray:
    spec = ofdm.FrameSpec(n_subcarriers=n_subcarriers, cp_len=0)
    return ofdm.pilot_symbols(spec, pilot_seed)


@dataclass
class TrialRecord:
    """One feature sample with full provenance."""

    device: str
    trial: int
    frame: int
    ebn0_db: float
    p: int
    source: str
    x: float
    y: float
    seed_key: tuple
    skips: int = 0


@dataclass
class FrameOutcome:
    """Raw per-frame results (fingerprints kept for diagnostics and tests)."""

    fp_pilot: Fingerprint
    fp_payload: Fingerprint
    taps: np.ndarray
    skips: int
    seed_key: tuple


def simulate_frame(cfg: ExperimentConfig, device_idx: int, ebn0_db: float,
                   p: int, trial: int, frame: int) -> FrameOutcome:
    """Generate, transmit and fingerprint one frame (redrawing on nulls)."""
    spec = cfg.frame_spec(p)
    profile = cfg.profiles[device_idx]
    pilot = _pilot_fd(cfg.n_subcarriers, cfg.pilot_seed)
    ek = ebn0_key(ebn0_db)
    for attempt in range(MAX_REDRAWS):
        key = (trial, device_idx, frame, p, ek, attempt)
        if cfg.channel_per_frame:
            ch_key = key
        else:
            ch_key = (trial, device_idx, 0, p, ek, 0)
        taps = draw_rayleigh_channel(
            derive_seed(cfg.master_seed, STREAM_CHANNEL, *ch_key),
            cfg.max_delay, cfg.n_paths, cfg.pdp_tau)
        rng_bits = np.random.default_rng(
            derive_seed(cfg.master_seed, STREAM_BITS, *key))
        payloads = [ofdm.random_symbols(spec, rng_bits) for _ in range(p)]
        waveform = cfg.drive * ofdm.build_frame(pilot, payloads, spec)
        rx = transmit(waveform, profile, taps, NoiseSpec(ebn0_db), spec,
                      derive_seed(cfg.master_seed, STREAM_NOISE, *key))
        cap = split_frame(rx, pilot, spec, drive=cfg.drive)
        try:
            fp_pilot, fp_payload, _ = process_capture(
                cap, cfg.basis_config,
                average_per_symbol=cfg.payload_average_per_symbol)
        except SpectralNullError:
            continue
        return FrameOutcome(fp_pilot=fp_pilot, fp_payload=fp_payload,
                            taps=taps, skips=attempt, seed_key=key)
    raise SpectralNullError(
        f"frame {key[:5]} still hit spectral nulls after {MAX_REDRAWS} redraws"
    )


def run_frame_sample(cfg: ExperimentConfig, device_idx: int, ebn0_db: float,
                     p: int, trial: int, frame: int):
    """One frame -> (payload TrialRecord, pilot TrialRecord)."""
    outcome = simulate_frame(cfg, device_idx, ebn0_db, p, trial, frame)
    label = cfg.profiles[device_idx].label
    records = []
    for fp in (outcome.fp_payload, outcome.fp_pilot):
        x, y = feature_from_fingerprint(fp)
        records.append(TrialRecord(
            device=label, trial=trial, frame=frame, ebn0_db=ebn0_db, p=p,
            source=fp.source, x=x, y=y, seed_key=outcome.seed_key,
            skips=outcome.skips))
    return records[0], records[1]


@dataclass
class TrialResult:
    """All feature samples and both accuracies for one Monte Carlo trial."""

    ebn0_db: float
    p: int
    trial: int
    payload_features: dict
    pilot_features: dict
    payload_acc: float
    pilot_acc: float
    skips: int


def run_trial(cfg: ExperimentConfig, ebn0_db: float, p: int,
              trial: int) -> TrialResult:
    """samples_per_device frames for every device, then both k-NN splits."""
    payload_features = {}
    pilot_features = {}
    skips = 0
    for device_idx, profile in enumerate(cfg.profiles):
        pay = np.empty((cfg.samples_per_device, 2))
        pil = np.empty((cfg.samples_per_device, 2))
        for frame in range(cfg.samples_per_device):
            rec_pay, rec_pil = run_frame_sample(cfg, device_idx, ebn0_db, p,
                                                trial, frame)
            pay[frame] = (rec_pay.x, rec_pay.y)
            pil[frame] = (rec_pil.x, rec_pil.y)
            skips += rec_pay.skips
        payload_features[profile.label] = pay
        pilot_features[profile.label] = pil
    ek = ebn0_key(ebn0_db)
    payload_acc = evaluate_split(
        payload_features, cfg.knn_k,
        derive_seed(cfg.master_seed, STREAM_SPLIT, trial, p, ek, 0))
    pilot_acc = evaluate_split(
        pilot_features, cfg.knn_k,
        derive_seed(cfg.master_seed, STREAM_SPLIT, trial, p, ek, 1))
    return TrialResult(ebn0_db=ebn0_db, p=p, trial=trial,
                       payload_features=payload_features,
                       pilot_features=pilot_features,
                       payload_acc=payload_acc, pilot_acc=pilot_acc,
                       skips=skips)


@dataclass
class ResultRow:
    ebn0_db: float
    p: int
    source: str
    acc_mean: float
    acc_std: float
    n_trials: int
    skips: int


@dataclass
class SweepResult:
    """Aggregated sweep output plus everything needed for plots and checks."""

    config: ExperimentConfig
    rows: list
    accuracies: dict  # (ebn0, p, source) -> (n_trials,) array
    features: dict    # (ebn0, p, source) -> {label: (n_trials, samples, 2)}
    skips: dict       # (ebn0, p) -> total redraws
    wall_seconds: float = 0.0
    n_jobs: int = 1

    @property
    def pilot_baseline_p(self) -> int:
        """Payload count of the cell whose pilot records form the baseline."""
        return min(self.config.payload_counts)

    def row(self, ebn0_db: float, p: int, source: str) -> ResultRow:
        for row in self.rows:
            if (row.ebn0_db, row.p, row.source) == (ebn0_db, p, source):
                return row
        raise KeyError((ebn0_db, p, source))

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        for row in self.rows:
            lines.append(
                f"{row.ebn0_db:g},{row.p},{row.source},"
                f"{row.acc_mean:.10g},{row.acc_std:.10g},"
                f"{row.n_trials},{row.skips}"
            )
        return "\n".join(lines) + "\n"


def _run_cell(args) -> tuple:
    cfg, ebn0_db, p, trial = args
    return (ebn0_db, p, trial), run_trial(cfg, ebn0_db, p, trial)


def run_sweep(cfg: ExperimentConfig, n_jobs: int | None = None,
              progress: bool = False) -> SweepResult:
    """Full grid: every (Eb/N0, payload count) cell averaged over n_trials.

    The preamble baseline row per Eb/N0 comes from the pilot-side records of
    the smallest payload-count cell (the pilot is one symbol regardless of p,
    so a single baseline column matches the grid).
    """
    start = time.perf_counter()
    cells = [(cfg, e, p, t)
             for e in cfg.ebn0_dbs
             for p in cfg.payload_counts
             for t in range(cfg.n_trials)]
    if n_jobs is None:
        n_jobs = 1
    results = {}
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            for i, (key, res) in enumerate(pool.map(_run_cell, cells,
                                                    chunksize=1)):
                results[key] = res
                if progress:
                    _progress(i + 1, len(cells))
    else:
        for i, cell in enumerate(cells):
            key, res = _run_cell(cell)
            results[key] = res
            if progress:
                _progress(i + 1, len(cells))

    accuracies = {}
    features = {}
    skips = {}
    for e in cfg.ebn0_dbs:
        for p in cfg.payload_counts:
            trials = [results[(e, p, t)] for t in range(cfg.n_trials)]
            for source in ("payload", "pilot"):
                acc = np.array([getattr(t, f"{source}_acc") for t in trials])
                accuracies[(e, p, source)] = acc
                per_label = {}
                for label in (pr.label for pr in cfg.profiles):
                    per_label[label] = np.stack(
                        [getattr(t, f"{source}_features")[label] for t in trials])
                features[(e, p, source)] = per_label
            skips[(e, p)] = int(sum(t.skips for t in trials))

    p_base = min(cfg.payload_counts)
    rows = []
    for e in cfg.ebn0_dbs:
        for p in cfg.payload_counts:
            acc = accuracies[(e, p, "payload")]
            rows.append(ResultRow(
                ebn0_db=e, p=p, source="payload",
                acc_mean=float(np.mean(acc)),
                acc_std=float(np.std(acc, ddof=1)) if acc.size > 1 else 0.0,
                n_trials=cfg.n_trials, skips=skips[(e, p)]))
        acc = accuracies[(e, p_base, "pilot")]
        rows.append(ResultRow(
            ebn0_db=e, p=1, source="pilot",
            acc_mean=float(np.mean(acc)),
            acc_std=float(np.std(acc, ddof=1)) if acc.size > 1 else 0.0,
            n_trials=cfg.n_trials, skips=skips[(e, p_base)]))

    return SweepResult(config=cfg, rows=rows, accuracies=accuracies,
                       features=features, skips=skips,
                       wall_seconds=time.perf_counter() - start,
                       n_jobs=n_jobs)


def _progress(done: int, total: int) -> None:
    step = max(1, total // 50)
    if done % step == 0 or done == total:
        print(f"[sweep] {done}/{total} trials", file=sys.stderr, flush=True)


def emit_outputs(result: SweepResult, out_dir) -> list:
    """Write the results CSV, per-cell feature scatters and the rate curves.

    The CSV is byte-identical across runs with the same master seed; the
    plots are presentation-only.  Returns the written paths.
    """
    from pathlib import Path

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    csv_path = out_dir / "results.csv"
    csv_path.write_text(result.to_csv())
    written.append(csv_path)

    if not result.rows:
        return written

    cfg = result.config
    labels = [p.label for p in cfg.profiles]
    markers = ["o", "s", "^", "d", "v", "*"]
    for e in cfg.ebn0_dbs:
        for p in cfg.payload_counts:
            fig, ax = plt.subplots(figsize=(5.5, 4.5))
            for i, label in enumerate(labels):
                pay = result.features[(e, p, "payload")][label][0]
                pil = result.features[(e, p, "pilot")][label][0]
                m = markers[i % len(markers)]
                ax.scatter(pay[:, 0], pay[:, 1], marker=m, s=18,
                           label=f"{label} payload")
                ax.scatter(pil[:, 0], pil[:, 1], marker=m, s=30,
                           facecolors="none",
                           edgecolors=f"C{i}", label=f"{label} pilot")
            ax.set_xlabel("Re(b3_hat)")
            ax.set_ylabel("Im(b3_hat)")
            ax.set_title(f"Eb/N0 = {e:g} dB, p = {p} (trial 0)")
            ax.legend(fontsize=8)
            ax.grid(True, alpha=0.3)
            path = out_dir / f"features_ebn0_{e:g}db_p{p}.svg"
            fig.savefig(path)
            plt.close(fig)
            written.append(path)

    fig, ax = plt.subplots(figsize=(6, 4.5))
    for p in cfg.payload_counts:
        means = [result.row(e, p, "payload").acc_mean for e in cfg.ebn0_dbs]
        ax.plot(cfg.ebn0_dbs, means, marker="o", label=f"payload p={p}")
    pilot_means = [result.row(e, 1, "pilot").acc_mean for e in cfg.ebn0_dbs]
    ax.plot(cfg.ebn0_dbs, pilot_means, marker="x", linestyle="--",
            color="k", label="preamble")
    ax.set_xlabel("Eb/N0 (dB)")
    ax.set_ylabel("correct classification rate")
    ax.set_ylim(0.4, 1.02)
    ax.grid(True, alpha=0.3)
    ax.legend()
    path = out_dir / "classification_rates.svg"
    fig.savefig(path)
    plt.close(fig)
    written.append(path)
    return written
