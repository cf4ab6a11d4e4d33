"""Least-squares estimation and separation of Hammerstein parameters.

The combined "virtual channel" h (x) b (Kronecker product of FIR taps and
nonlinear coefficients) is estimated over the orthogonalized regression
matrix, then split: the leading tap block yields the nonlinear fingerprint
b_hat (normalized so its first entry is exactly 1), and a second collapsed
least squares yields the FIR estimate h_hat.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from .errors import DegeneracyError, InputSizeError, SingularMatrixError
from .poly_basis import (
    BasisConfig,
    build_regression_matrix,
    compute_ortho_transform,
)

# Relative cutoff on singular values for rank detection in ls_solve.
LS_RCOND = 1e-10

# Reused Fortran-ordered scratch for the augmented QR: fresh multi-megabyte
# allocations fault in pages every call and dominate the solve time.
_scratch = threading.local()


def _workspace(m: int, n: int) -> np.ndarray:
    cache = getattr(_scratch, "buffers", None)
    if cache is None:
        cache = _scratch.buffers = {}
    buf = cache.get((m, n))
    if buf is None:
        buf = cache[(m, n)] = np.empty((m, n), dtype=complex, order="F")
    return buf


@dataclass
class Fingerprint:
    """Estimated nonlinear coefficients with provenance.

    b_hat[0] is exactly 1 after normalization; source records whether the
    estimate came from the known pilot or from demodulated payload symbols;
    condition_number is a diagnostic of the regression that produced it.
    """

    b_hat: np.ndarray
    source: str
    condition_number: float = float("nan")


def ls_solve(a, d, *, rcond: float = LS_RCOND, return_cond: bool = False):
    """Least-squares minimizer of ||a w - d|| via orthogonal factorization.

    A Householder QR of the column-augmented matrix [a | d] yields the
    triangular factor of a together with the projected right-hand side; the
    explicit normal-equation inverse is avoided on purpose because the
    conventional polynomial basis can be ill-conditioned enough to make it
    numerically unstable.  Rank comes from the singular values of the
    triangular factor (identical to those of a); rank deficiency at the
    rcond threshold raises SingularMatrixError with the estimated rank.
    """
    a = np.asarray(a)
    d = np.asarray(d)
    if a.ndim != 2 or a.shape[0] < a.shape[1]:
        raise InputSizeError(f"need rows >= columns, got shape {a.shape}")
    if d.ndim != 1 or d.size != a.shape[0]:
        raise InputSizeError(
            f"right-hand side length {d.size} does not match {a.shape[0]} rows"
        )
    m, n = a.shape
    buf = _workspace(m, n + 1)
    buf[:, :n] = a
    buf[:, n] = d
    w, cond = _augmented_solve(buf, rcond)
    if return_cond:
        return w, cond
    return w


def _augmented_solve(buf, rcond: float) -> tuple[np.ndarray, float]:
    """Destructive QR solve of the augmented system held in buf = [a | d]."""
    n = buf.shape[1] - 1
    qr, _, _, info = lapack.zgeqrf(buf, overwrite_a=True)
    if info != 0:
        raise np.linalg.LinAlgError(f"QR factorization failed (info={info})")
    r = np.triu(qr[:n, :n])
    s = np.linalg.svd(r, compute_uv=False)
    rank = int(np.sum(s > rcond * s[0])) if s[0] > 0 else 0
    if rank < n:
        raise SingularMatrixError(
            f"regression matrix is rank deficient: estimated rank {rank} "
            f"of {n} columns"
        )
    w = scipy.linalg.solve_triangular(r, qr[:n, n], check_finite=False)
    return w, float(s[0] / s[-1])


def estimate_kron_vector(psi, d, *, return_cond: bool = False):
    """LS estimate of the stacked per-tap coefficient blocks h (x) b."""
    return ls_solve(psi, d, return_cond=return_cond)


def separate_nonlinear(kron_vector, transform, *, source: str = "payload",
                       condition_number: float = float("nan")) -> Fingerprint:
    """Extract the nonlinear coefficients from the leading tap block.

    The first (P+1)/2 entries of the Kronecker vector carry h_0 * b in the
    orthogonal basis (tap 0 is guaranteed occupied); mapping them back
    through the triangular transform and dividing by the leading element of
    that product pins b_hat[0] = 1 exactly.
    """
    kron_vector = np.asarray(kron_vector)
    n_terms = transform.shape[0]
    if kron_vector.size < n_terms:
        raise InputSizeError(
            f"need at least {n_terms} entries, got {kron_vector.size}"
        )
    scaled = np.asarray(transform) @ kron_vector[:n_terms]
    lead = scaled[0]
    if abs(lead) <= 1e-12 * np.linalg.norm(kron_vector):
        raise DegeneracyError(
            "leading tap block is numerically zero (h_0 ~ 0); cannot "
            "normalize the nonlinear coefficients"
        )
    b_hat = scaled / lead
    b_hat[0] = 1.0
    return Fingerprint(b_hat=b_hat, source=source,
                       condition_number=condition_number)


def separate_linear(psi, fingerprint: Fingerprint, transform, d) -> np.ndarray:
    """LS estimate of the FIR taps given the separated nonlinearity.

    Each delayed block of the orthogonalized matrix is collapsed against the
    fingerprint (mapped into the orthogonal basis), leaving one column per
    tap; the taps follow from a second least squares.
    """
    transform = np.asarray(transform)
    n_terms = transform.shape[0]
    b_ortho = scipy.linalg.solve_triangular(transform, fingerprint.b_hat)
    psi = np.asarray(psi)
    n_taps = psi.shape[1] // n_terms
    collapsed = psi.reshape(psi.shape[0], n_taps, n_terms) @ b_ortho
    return ls_solve(collapsed, d)


def separate(u, d, cfg: BasisConfig, *, history=None, source: str = "payload",
             want_linear: bool = True):
    """Full separation: returns (h_hat, Fingerprint) for input u, output d.

    history forwards pre-signal input samples to the delayed regression
    blocks (None keeps the zero-padding convention).  want_linear=False
    skips the FIR stage and returns (None, Fingerprint).
    """
    u = np.asarray(u, dtype=complex)
    d = np.asarray(d, dtype=complex)
    if u.size != d.size:
        raise InputSizeError(
            f"input and output lengths differ: {u.size} vs {d.size}"
        )
    if u.size <= cfg.n_columns:
        raise InputSizeError(
            f"signal length {u.size} must exceed the {cfg.n_columns} "
            "regression columns"
        )
    transform = compute_ortho_transform(u, cfg)
    n = cfg.n_columns
    buf = _workspace(u.size, n + 1)
    psi = build_regression_matrix(u, cfg, history=history, transform=transform,
                                  out=buf[:, :n])
    buf[:, n] = d
    psi_kept = psi.copy() if want_linear else None
    kron_vector, cond = _augmented_solve(buf, LS_RCOND)
    fingerprint = separate_nonlinear(kron_vector, transform, source=source,
                                     condition_number=cond)
    h_hat = None
    if want_linear:
        h_hat = separate_linear(psi_kept, fingerprint, transform, d)
    return h_hat, fingerprint
