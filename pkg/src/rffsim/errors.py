"""Exception types shared across the simulator."""


class InputSizeError(ValueError):
    """Input length or shape inconsistent with frame/basis dimensions."""


class ConfigurationError(ValueError):
    """Invalid configuration values."""


class DegeneracyError(ValueError):
    """Degenerate regression input (rank-deficient basis, vanishing leading tap)."""


class SingularMatrixError(ValueError):
    """Least-squares matrix is rank deficient."""


class SpectralNullError(RuntimeError):
    """Estimated channel frequency response has a near-zero bin; the frame
    cannot be one-tap equalized and should be skipped."""
