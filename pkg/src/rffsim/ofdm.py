"""QPSK mapping and OFDM modulation with cyclic prefix.

All DFTs are unitary (1/sqrt(N) both directions) so time-domain power equals
frequency-domain power and the Eb/N0 bookkeeping stays scale-free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputSizeError

# Default seed for the frequency-domain values of the block-type pilot.  A
# pseudorandom pilot keeps the time-domain waveform non-constant-envelope,
# which the polynomial regression requires (see poly_basis).
PILOT_SEED = 42

_SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class FrameSpec:
    """OFDM frame dimensioning: subcarrier count, CP length, symbol counts."""

    n_subcarriers: int = 2048
    cp_len: int = 512
    n_pilot_symbols: int = 1
    n_payload_symbols: int = 1

    def __post_init__(self):
        if self.n_subcarriers <= 0:
            raise ValueError("n_subcarriers must be positive")
        if not 0 <= self.cp_len < self.n_subcarriers:
            raise ValueError("cp_len must satisfy 0 <= cp_len < n_subcarriers")
        if self.n_pilot_symbols != 1:
            raise ValueError("block-type pilot frames carry exactly one pilot symbol")
        if self.n_payload_symbols <= 0:
            raise ValueError("n_payload_symbols must be positive")

    @property
    def symbol_len(self) -> int:
        """Samples per OFDM symbol including the cyclic prefix."""
        return self.n_subcarriers + self.cp_len

    @property
    def frame_len(self) -> int:
        """Samples per frame (pilot symbol plus payload symbols)."""
        return (self.n_pilot_symbols + self.n_payload_symbols) * self.symbol_len


def map_bits_to_qpsk(bits, spec: FrameSpec) -> np.ndarray:
    """Gray-map a bit stream onto unit-power QPSK, two bits per subcarrier.

    Pair (b0, b1): 00 -> (+1+1j)/sqrt2, 01 -> (-1+1j)/sqrt2,
    11 -> (-1-1j)/sqrt2, 10 -> (+1-1j)/sqrt2.
    """
    bits = np.asarray(bits)
    if bits.size != 2 * spec.n_subcarriers:
        raise InputSizeError(
            f"expected {2 * spec.n_subcarriers} bits, got {bits.size}"
        )
    b0 = bits[0::2]
    b1 = bits[1::2]
    return ((1 - 2 * b1) + 1j * (1 - 2 * b0)) / _SQRT2


def qpsk_hard_decision(noisy_fd) -> np.ndarray:
    """Nearest QPSK point per element, with sign(0) decided as +1."""
    z = np.asarray(noisy_fd)
    re = np.where(z.real >= 0.0, 1.0, -1.0)
    im = np.where(z.imag >= 0.0, 1.0, -1.0)
    return (re + 1j * im) / _SQRT2


def qpsk_demap(symbols) -> np.ndarray:
    """Inverse of map_bits_to_qpsk for decided symbols."""
    z = np.asarray(symbols)
    out = np.empty(2 * z.size, dtype=np.int64)
    out[0::2] = (z.imag < 0).astype(np.int64)
    out[1::2] = (z.real < 0).astype(np.int64)
    return out


def ofdm_modulate(fd, spec: FrameSpec) -> np.ndarray:
    """Unitary IDFT plus cyclic prefix; output length N + N_cp."""
    fd = np.asarray(fd, dtype=complex)
    if fd.size != spec.n_subcarriers:
        raise InputSizeError(
            f"expected {spec.n_subcarriers} FD symbols, got {fd.size}"
        )
    body = np.fft.ifft(fd) * np.sqrt(spec.n_subcarriers)
    return np.concatenate([body[spec.n_subcarriers - spec.cp_len:], body])


def ofdm_demodulate(rx, spec: FrameSpec) -> np.ndarray:
    """Strip the cyclic prefix and apply the unitary DFT (one OFDM symbol)."""
    rx = np.asarray(rx, dtype=complex)
    if rx.size != spec.symbol_len:
        raise InputSizeError(
            f"expected {spec.symbol_len} samples, got {rx.size}"
        )
    return np.fft.fft(rx[spec.cp_len:]) / np.sqrt(spec.n_subcarriers)


def build_frame(pilot, payloads, spec: FrameSpec) -> np.ndarray:
    """Concatenate the modulated pilot symbol and payload symbols."""
    if len(payloads) != spec.n_payload_symbols:
        raise InputSizeError(
            f"expected {spec.n_payload_symbols} payload symbols, got {len(payloads)}"
        )
    parts = [ofdm_modulate(pilot, spec)]
    parts.extend(ofdm_modulate(u, spec) for u in payloads)
    return np.concatenate(parts)


def pilot_symbols(spec: FrameSpec, seed: int = PILOT_SEED) -> np.ndarray:
    """The known FD pilot vector: pseudorandom QPSK from a fixed seed."""
    rng = np.random.default_rng(seed)
    return map_bits_to_qpsk(rng.integers(0, 2, 2 * spec.n_subcarriers), spec)


def random_symbols(spec: FrameSpec, rng: np.random.Generator) -> np.ndarray:
    """One OFDM symbol's worth of QPSK symbols from random bits."""
    return map_bits_to_qpsk(rng.integers(0, 2, 2 * spec.n_subcarriers), spec)
