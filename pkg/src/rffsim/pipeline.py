"""Two-stage fingerprint extraction from a received frame.

Stage one estimates the combined linear channel from the known pilot symbol.
Stage two one-tap equalizes the payload symbols in the frequency domain,
hard-decides them, re-modulates the decided symbols into a reference
waveform, and runs the parameter separation again on the raw payload
samples; the resulting nonlinear coefficients are the payload-based
fingerprint.  The pilot-based fingerprint is kept alongside as the baseline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputSizeError, SpectralNullError
from .ofdm import FrameSpec, ofdm_modulate, qpsk_hard_decision
from .poly_basis import BasisConfig
from .separation import Fingerprint, separate

# Bins whose estimated response falls below this fraction of the peak are
# treated as spectral nulls: the frame is reported rather than regularized.
NULL_TOL = 1e-12


@dataclass
class FrameCapture:
    """Received frame split at the pilot/payload boundary.

    drive is the amplitude applied to the unit-power modulated waveform at
    the transmitter's nonlinearity input; the receiver needs it to
    regenerate reference waveforms at the matching scale.
    """

    d_p: np.ndarray
    d_u: np.ndarray
    pilot_fd: np.ndarray
    spec: FrameSpec
    drive: float = 1.0

    def __post_init__(self):
        self.d_p = np.asarray(self.d_p, dtype=complex)
        self.d_u = np.asarray(self.d_u, dtype=complex)
        self.pilot_fd = np.asarray(self.pilot_fd, dtype=complex)
        if self.d_p.size != self.spec.symbol_len:
            raise InputSizeError(
                f"pilot portion has {self.d_p.size} samples, expected "
                f"{self.spec.symbol_len}"
            )
        expected = self.spec.n_payload_symbols * self.spec.symbol_len
        if self.d_u.size != expected:
            raise InputSizeError(
                f"payload portion has {self.d_u.size} samples, expected {expected}"
            )


@dataclass
class EqualizedPayload:
    """Per-subcarrier equalized payload: soft values and judged QPSK points."""

    u_hat_e: np.ndarray  # (p, N) soft
    u_hat_f: np.ndarray  # (p, N) judged


def split_frame(rx, pilot_fd, spec: FrameSpec, drive: float = 1.0) -> FrameCapture:
    """Cut a received frame into its pilot and payload portions."""
    rx = np.asarray(rx, dtype=complex)
    if rx.size != spec.frame_len:
        raise InputSizeError(
            f"frame has {rx.size} samples, expected {spec.frame_len}"
        )
    return FrameCapture(d_p=rx[:spec.symbol_len], d_u=rx[spec.symbol_len:],
                        pilot_fd=pilot_fd, spec=spec, drive=drive)


def pilot_reference(cap: FrameCapture) -> np.ndarray:
    """The transmitted pilot waveform the receiver can reconstruct exactly."""
    return cap.drive * ofdm_modulate(cap.pilot_fd, cap.spec)


def estimate_from_pilot(cap: FrameCapture, cfg: BasisConfig):
    """Stage one: (h_hat, pilot Fingerprint) from the known pilot symbol."""
    h_hat, fingerprint = separate(pilot_reference(cap), cap.d_p, cfg,
                                  source="pilot")
    return h_hat, fingerprint


def equalize_and_demod(cap: FrameCapture, h_hat) -> EqualizedPayload:
    """FD one-tap equalization of every payload symbol, then hard decision."""
    spec = cap.spec
    n = spec.n_subcarriers
    h_fd = np.fft.fft(np.asarray(h_hat, dtype=complex), n)
    mag = np.abs(h_fd)
    peak = mag.max()
    n_null = int(np.sum(mag < NULL_TOL * peak)) if peak > 0 else n
    if n_null:
        raise SpectralNullError(
            f"channel estimate has {n_null} near-zero bins; frame skipped"
        )
    bodies = cap.d_u.reshape(spec.n_payload_symbols, spec.symbol_len)[:, spec.cp_len:]
    d_fd = np.fft.fft(bodies, axis=1) / np.sqrt(n)
    u_hat_e = d_fd / h_fd
    return EqualizedPayload(u_hat_e=u_hat_e, u_hat_f=qpsk_hard_decision(u_hat_e))


def regenerate_reference(eq: EqualizedPayload, spec: FrameSpec,
                         drive: float = 1.0) -> np.ndarray:
    """Re-modulate the judged payload symbols into the estimator's input."""
    if eq.u_hat_f.shape[0] == 0:
        raise InputSizeError("no payload symbols to regenerate")
    parts = [ofdm_modulate(sym, spec) for sym in eq.u_hat_f]
    return drive * np.concatenate(parts)


def extract_payload_fingerprint(cap: FrameCapture, eq: EqualizedPayload,
                                cfg: BasisConfig,
                                average_per_symbol: bool = False) -> Fingerprint:
    """Stage two: payload-based fingerprint from d_u and the judged symbols.

    The regression output is the raw payload record including CPs; the
    regression input is the re-modulated judged waveform.  The delayed
    blocks at the payload's leading edge are fed from the tail of the known
    pilot waveform, which is what actually precedes the payload on air.
    With average_per_symbol, each payload symbol is separated on its own
    and the coefficient estimates are averaged instead.
    """
    spec = cap.spec
    reference = regenerate_reference(eq, spec, cap.drive)
    n_hist = cfg.n_taps - 1
    pilot_tail = pilot_reference(cap)[-n_hist:] if n_hist else None
    if not average_per_symbol:
        _, fingerprint = separate(reference, cap.d_u, cfg, history=pilot_tail,
                                  source="payload", want_linear=False)
        return fingerprint
    sym_len = spec.symbol_len
    b_hats = []
    conds = []
    history = pilot_tail
    for i in range(spec.n_payload_symbols):
        chunk = slice(i * sym_len, (i + 1) * sym_len)
        _, fp = separate(reference[chunk], cap.d_u[chunk], cfg,
                         history=history, source="payload", want_linear=False)
        b_hats.append(fp.b_hat)
        conds.append(fp.condition_number)
        history = reference[chunk][-n_hist:] if n_hist else None
    return Fingerprint(b_hat=np.mean(b_hats, axis=0), source="payload",
                       condition_number=float(np.mean(conds)))


def feature_from_fingerprint(fingerprint: Fingerprint) -> tuple[float, float]:
    """Classification feature: real and imaginary parts of the second coefficient."""
    b_hat = fingerprint.b_hat
    if b_hat.size < 2:
        raise InputSizeError("fingerprint has no second coefficient")
    return float(b_hat[1].real), float(b_hat[1].imag)


def process_capture(cap: FrameCapture, cfg: BasisConfig,
                    average_per_symbol: bool = False):
    """Run both stages on one capture.

    Returns (pilot Fingerprint, payload Fingerprint, h_hat).  Raises
    SpectralNullError when the channel estimate cannot be inverted.
    """
    h_hat, fp_pilot = estimate_from_pilot(cap, cfg)
    eq = equalize_and_demod(cap, h_hat)
    fp_payload = extract_payload_fingerprint(cap, eq, cfg,
                                             average_per_symbol=average_per_symbol)
    return fp_pilot, fp_payload, h_hat
