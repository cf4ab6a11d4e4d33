"""QPSK-OFDM nonlinear RF fingerprinting testbed.

Simulates transmission through polynomially-nonlinear transmitters and
random multipath channels, separates the Hammerstein parameters from pilot
and demodulated payload symbols, and classifies devices from the recovered
nonlinear coefficients.
"""

from .classifier import LabeledFeature, evaluate_split, knn_classify
from .config import ExperimentConfig, default_profiles, load_config, save_config
from .device_channel import (
    NoiseSpec,
    TransmitterProfile,
    apply_static_nonlinearity,
    draw_rayleigh_channel,
    fir_filter,
    transmit,
)
from .harness import run_frame_sample, run_sweep, run_trial, simulate_frame
from .ofdm import (
    FrameSpec,
    build_frame,
    map_bits_to_qpsk,
    ofdm_demodulate,
    ofdm_modulate,
    pilot_symbols,
    qpsk_hard_decision,
)
from .pipeline import (
    EqualizedPayload,
    FrameCapture,
    equalize_and_demod,
    estimate_from_pilot,
    extract_payload_fingerprint,
    feature_from_fingerprint,
    process_capture,
    regenerate_reference,
    split_frame,
)
from .poly_basis import (
    BasisConfig,
    build_regression_matrix,
    compute_ortho_transform,
    conventional_basis,
    orthogonal_regression_matrix,
)
from .separation import (
    Fingerprint,
    estimate_kron_vector,
    ls_solve,
    separate,
    separate_linear,
    separate_nonlinear,
)

__version__ = "0.1.0"
