"""Command line interface.

Subcommands: simulate (one frame -> IQ file), extract (IQ file ->
fingerprint JSON-lines), classify (fingerprint files -> accuracy), sweep
(the full Monte Carlo grid with CSV and plots).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import fileio, harness, ofdm
from .classifier import evaluate_split
from .config import ExperimentConfig, load_config
from .device_channel import NoiseSpec, draw_rayleigh_channel, transmit
from .pipeline import process_capture


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    return cfg


def _cmd_simulate(args) -> int:
    cfg = _load(args)
    labels = [p.label for p in cfg.profiles]
    device = args.device or labels[0]
    if device not in labels:
        print(f"unknown device {device!r}; choose from {labels}", file=sys.stderr)
        return 2
    device_idx = labels.index(device)
    p = args.p or cfg.payload_counts[0]
    spec = cfg.frame_spec(p)
    key = (0, device_idx, 0, p, harness.ebn0_key(args.ebn0), 0)
    taps = draw_rayleigh_channel(
        harness.derive_seed(cfg.master_seed, harness.STREAM_CHANNEL, *key),
        cfg.max_delay, cfg.n_paths, cfg.pdp_tau)
    rng_bits = np.random.default_rng(
        harness.derive_seed(cfg.master_seed, harness.STREAM_BITS, *key))
    pilot = ofdm.pilot_symbols(spec, cfg.pilot_seed)
    payloads = [ofdm.random_symbols(spec, rng_bits) for _ in range(p)]
    waveform = cfg.drive * ofdm.build_frame(pilot, payloads, spec)
    rx = transmit(waveform, cfg.profiles[device_idx], taps,
                  NoiseSpec(args.ebn0), spec,
                  harness.derive_seed(cfg.master_seed, harness.STREAM_NOISE, *key))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{device}_p{p}_ebn0_{args.ebn0:g}db_seed{cfg.master_seed}.iq"
    fileio.write_iq(path, rx)
    print(path)
    return 0


def _cmd_extract(args) -> int:
    cfg = _load(args)
    raw = fileio.read_iq(args.iq_file)
    sym_len = cfg.n_subcarriers + cfg.cp_len
    if raw.size % sym_len != 0 or raw.size < 2 * sym_len:
        print(f"{args.iq_file}: {raw.size} samples is not a whole frame of "
              f"{sym_len}-sample symbols", file=sys.stderr)
        return 2
    p = raw.size // sym_len - 1
    spec = cfg.frame_spec(p)
    cap = fileio.ingest_iq_capture(args.iq_file, spec,
                                   ofdm.pilot_symbols(spec, cfg.pilot_seed),
                                   drive=cfg.drive)
    fp_pilot, fp_payload, _ = process_capture(
        cap, cfg.basis_config,
        average_per_symbol=cfg.payload_average_per_symbol)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "fingerprints.jsonl"
    fileio.append_fingerprints(path, [
        fileio.fingerprint_record(fp, device_label=args.label,
                                  ebn0_db=args.ebn0, seed=cfg.master_seed)
        for fp in (fp_payload, fp_pilot)
    ])
    print(path)
    return 0


def _cmd_classify(args) -> int:
    cfg = _load(args)
    by_label: dict[str, list] = {}
    for path in args.fingerprints:
        for rec in fileio.read_fingerprints(path):
            if rec["source"] != args.source:
                continue
            label = rec["device_label"] or "unlabeled"
            b3 = rec["b_hat"][1]
            by_label.setdefault(label, []).append(b3)
    if len(by_label) < 2:
        print(f"need fingerprints from at least two devices, got "
              f"{sorted(by_label)}", file=sys.stderr)
        return 2
    features = {lab: np.asarray(v, dtype=float) for lab, v in by_label.items()}
    acc = evaluate_split(features, args.k, cfg.master_seed)
    print(f"accuracy {acc:.4f} ({args.source}-based, k={args.k})")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load(args)
    if args.trials is not None:
        cfg = replace(cfg, n_trials=args.trials)
    if args.samples is not None:
        cfg = replace(cfg, samples_per_device=args.samples)
    result = harness.run_sweep(cfg, n_jobs=args.jobs, progress=True)
    written = harness.emit_outputs(result, args.out)
    print(result.to_csv(), end="")
    print(f"wrote {len(written)} files to {args.out} "
          f"in {result.wall_seconds:.1f}s", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rffsim",
        description="QPSK-OFDM nonlinear RF fingerprint simulation")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--seed", type=int, default=None,
                        help="override the master seed")
        sp.add_argument("--out", default=".", help="output directory")

    sp = sub.add_parser("simulate", help="simulate one frame into an IQ file")
    common(sp)
    sp.add_argument("--device", help="profile label (default: first profile)")
    sp.add_argument("--ebn0", type=float, default=float("inf"),
                    help="Eb/N0 in dB (default: noiseless)")
    sp.add_argument("--p", type=int, default=None,
                    help="payload symbols per frame")
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("extract", help="fingerprint an IQ capture")
    common(sp)
    sp.add_argument("iq_file", help="raw interleaved float32 I/Q file")
    sp.add_argument("--label", default=None, help="device label for the records")
    sp.add_argument("--ebn0", type=float, default=None,
                    help="Eb/N0 metadata for the records")
    sp.set_defaults(func=_cmd_extract)

    sp = sub.add_parser("classify", help="k-NN accuracy from fingerprint files")
    common(sp)
    sp.add_argument("fingerprints", nargs="+", help="JSON-lines files")
    sp.add_argument("--source", choices=["payload", "pilot"], default="payload")
    sp.add_argument("--k", type=int, default=3)
    sp.set_defaults(func=_cmd_classify)

    sp = sub.add_parser("sweep", help="run the full Monte Carlo grid")
    common(sp)
    sp.add_argument("--jobs", type=int, default=None,
                    help="parallel worker processes")
    sp.add_argument("--trials", type=int, default=None,
                    help="override the trial count")
    sp.add_argument("--samples", type=int, default=None,
                    help="override samples per device")
    sp.set_defaults(func=_cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
