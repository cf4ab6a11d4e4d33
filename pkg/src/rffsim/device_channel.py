"""Transmitter and channel models.

The transmitter is a Hammerstein system: an odd-order memoryless baseband
polynomial (the device-identifying nonlinearity) followed by linear memory.
The transmitter memory and the multipath channel are lumped into one random
FIR; AWGN is added at the channel output at a requested Eb/N0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .ofdm import FrameSpec


@dataclass(frozen=True)
class TransmitterProfile:
    """Static nonlinearity of one device: odd-order coefficients [b1, b3, ..., bP].

    The leading coefficient is pinned to 1 so the linear gain is carried by
    the channel; the remaining coefficients are the device fingerprint.
    """

    coeffs: np.ndarray
    label: str = ""

    def __post_init__(self):
        coeffs = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if coeffs.ndim != 1 or coeffs.size < 1:
            raise ConfigurationError("coeffs must be a non-empty vector")
        if coeffs[0] != 1:
            raise ConfigurationError("leading coefficient must equal 1")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def order(self) -> int:
        """Highest odd polynomial order P."""
        return 2 * self.coeffs.size - 1


@dataclass(frozen=True)
class NoiseSpec:
    """AWGN level as Eb/N0 in decibels (use inf for noiseless)."""

    ebn0_db: float = float("inf")


def apply_static_nonlinearity(u, profile: TransmitterProfile) -> np.ndarray:
    """Odd-order memoryless polynomial: sum_p b_{2p-1} * u * |u|^(2(p-1))."""
    u = np.asarray(u, dtype=complex)
    a = u.real**2 + u.imag**2
    b = profile.coeffs
    gain = np.full(u.shape, b[-1], dtype=complex)
    for coeff in b[-2::-1]:
        gain = gain * a + coeff
    return u * gain


def fir_filter(x, taps) -> np.ndarray:
    """Causal FIR with zero initial history, truncated to the input length."""
    x = np.asarray(x, dtype=complex)
    taps = np.asarray(taps, dtype=complex)
    return np.convolve(x, taps)[: x.size]


def draw_rayleigh_channel(rng_seed, max_delay: int = 8, n_paths: int = 5,
                          pdp_tau: float | None = 2.0) -> np.ndarray:
    """Random Rayleigh tap-delay-line of length max_delay + 1, unit power.

    Tap 0 is always occupied (so the leading coefficient of the combined
    virtual channel is observable); the remaining path delays are drawn
    uniformly without replacement from 1..max_delay; occupied taps are
    independent circular complex Gaussian, shaped by an exponential
    power-delay profile exp(-delay/pdp_tau) so the first arrival carries
    the most energy on average (pdp_tau=None gives equal mean path power),
    then scaled to unit total power.
    """
    if n_paths < 1:
        raise ConfigurationError("n_paths must be at least 1")
    if n_paths > max_delay + 1:
        raise ConfigurationError(
            f"n_paths={n_paths} exceeds the {max_delay + 1} available delays"
        )
    if pdp_tau is not None and pdp_tau <= 0:
        raise ConfigurationError("pdp_tau must be positive (or None)")
    rng = np.random.default_rng(rng_seed)
    delays = np.zeros(n_paths, dtype=np.int64)
    if n_paths > 1:
        delays[1:] = rng.choice(np.arange(1, max_delay + 1), size=n_paths - 1, replace=False)
    gains = (rng.standard_normal(n_paths) + 1j * rng.standard_normal(n_paths)) / np.sqrt(2)
    if pdp_tau is not None:
        gains = gains * np.exp(-delays / (2.0 * pdp_tau))
    taps = np.zeros(max_delay + 1, dtype=complex)
    taps[delays] = gains
    return taps / np.linalg.norm(taps)


def add_awgn(x, noise: NoiseSpec, spec: FrameSpec, rng_seed) -> np.ndarray:
    """Add circular complex AWGN at the requested Eb/N0.

    Per-sample noise variance is sigma^2 = P_rx * (N + N_cp) / (4 N rho)
    with rho = 10^(ebn0_db/10): the CP overhead is charged to the 2 bits
    carried by each QPSK subcarrier, P_rx is measured on the noiseless
    input, and the noise density is booked per real dimension (a complex
    envelope sample carries N0/2).
    """
    x = np.asarray(x, dtype=complex)
    rho = 10.0 ** (noise.ebn0_db / 10.0)
    if np.isinf(rho):
        return x.copy()
    p_rx = np.mean(x.real**2 + x.imag**2)
    sigma2 = p_rx * spec.symbol_len / (4.0 * spec.n_subcarriers * rho)
    rng = np.random.default_rng(rng_seed)
    w = rng.standard_normal(x.size) + 1j * rng.standard_normal(x.size)
    return x + np.sqrt(sigma2 / 2.0) * w


def transmit(frame, profile: TransmitterProfile, taps, noise: NoiseSpec,
             spec: FrameSpec, rng_seed) -> np.ndarray:
    """Full chain: static nonlinearity -> combined FIR -> AWGN."""
    return add_awgn(fir_filter(apply_static_nonlinearity(frame, profile), taps),
                    noise, spec, rng_seed)
