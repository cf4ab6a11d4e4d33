"""Polynomial regression matrices for Hammerstein identification.

A signal of length m with basis order P and L+1 taps produces an
m x (L+1)*(P+1)/2 matrix of L+1 delayed blocks; block l holds the odd-order
basis [u, u|u|^2, ..., u|u|^(P-1)] of the l-delayed input.  The conventional
basis is badly conditioned, so a data-driven upper-triangular transform U is
computed that orthonormalizes the zero-delay block; applying U to every block
gives the well-conditioned matrix actually used for least squares.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegeneracyError, InputSizeError

# Relative singular-value threshold below which the basis is treated as
# rank deficient (constant-envelope input).
RANK_TOL = 1e-10


@dataclass(frozen=True)
class BasisConfig:
    """Regression dimensioning: odd polynomial order P and tap count L+1."""

    order: int = 7
    n_taps: int = 9

    def __post_init__(self):
        if self.order < 1 or self.order % 2 == 0:
            raise ValueError("order must be an odd positive integer")
        if self.n_taps < 1:
            raise ValueError("n_taps must be at least 1")

    @property
    def n_terms(self) -> int:
        """Basis functions per tap: (P+1)/2."""
        return (self.order + 1) // 2

    @property
    def n_columns(self) -> int:
        return self.n_taps * self.n_terms


def conventional_basis(u, order: int) -> np.ndarray:
    """Odd-order basis [u, u|u|^2, ..., u|u|^(P-1)] along a trailing axis.

    Accepts a scalar (returns a vector of length (P+1)/2) or an array
    (returns one basis row per sample).
    """
    if order < 1 or order % 2 == 0:
        raise ValueError("order must be an odd positive integer")
    u = np.asarray(u, dtype=complex)
    n_terms = (order + 1) // 2
    out = np.empty(u.shape + (n_terms,), dtype=complex)
    out[..., 0] = u
    if n_terms > 1:
        a = u.real**2 + u.imag**2
        for p in range(1, n_terms):
            out[..., p] = out[..., p - 1] * a
    return out


def build_regression_matrix(u, cfg: BasisConfig, history=None,
                            transform=None, out=None) -> np.ndarray:
    """Stack L+1 delayed basis blocks into one regression matrix.

    history supplies the input samples preceding u(0) that the delayed
    blocks need; None means the zero-padding convention (delays reach into
    silence).  If transform is given, each block is right-multiplied by it
    (equivalent to orthogonal_regression_matrix, fused for speed).  out, if
    given, must be an (m, n_columns) complex array and is fully overwritten.
    """
    u = np.asarray(u, dtype=complex)
    m = u.size
    n_hist = cfg.n_taps - 1
    if m <= n_hist:
        raise InputSizeError(
            f"signal length {m} must exceed the {n_hist} delayed taps"
        )
    if history is None:
        ext = np.concatenate([np.zeros(n_hist, dtype=complex), u])
    else:
        history = np.asarray(history, dtype=complex)
        if history.size < n_hist:
            raise InputSizeError(
                f"history must supply at least {n_hist} samples, got {history.size}"
            )
        ext = np.concatenate([history[history.size - n_hist:], u])
    basis = conventional_basis(ext, cfg.order)
    if transform is not None:
        basis = basis @ transform
    n_terms = basis.shape[-1]
    if out is None:
        out = np.empty((m, cfg.n_taps * n_terms), dtype=complex)
    elif out.shape != (m, cfg.n_taps * n_terms):
        raise InputSizeError(
            f"out has shape {out.shape}, expected {(m, cfg.n_taps * n_terms)}"
        )
    for l in range(cfg.n_taps):
        out[:, l * n_terms:(l + 1) * n_terms] = basis[n_hist - l:n_hist - l + m]
    return out


def compute_ortho_transform(u, cfg: BasisConfig) -> np.ndarray:
    """Upper-triangular U that orthonormalizes the zero-delay basis block.

    From the thin QR factorization of the zero-delay block with the diagonal
    of the triangular factor forced positive real (uniqueness), U is the
    inverse of that factor.  Raises DegeneracyError for rank-deficient input
    (constant-envelope signals make all basis columns collinear).
    """
    u = np.asarray(u, dtype=complex)
    n_terms = cfg.n_terms
    if u.size < n_terms:
        raise InputSizeError(
            f"need at least {n_terms} samples to orthogonalize, got {u.size}"
        )
    r = np.linalg.qr(conventional_basis(u, cfg.order), mode="r")
    s = np.linalg.svd(r, compute_uv=False)
    if s[-1] <= s[0] * RANK_TOL:
        raise DegeneracyError(
            "polynomial basis is rank deficient (constant-envelope input: "
            "all basis columns are collinear); regression requires a "
            "varying-envelope time-domain waveform"
        )
    d = np.diagonal(r)
    r = r * (np.abs(d) / d)[:, None]
    return scipy.linalg.solve_triangular(r, np.eye(n_terms, dtype=complex))


def orthogonal_regression_matrix(phi, transform) -> np.ndarray:
    """Right-multiply every delayed block of phi by the transform."""
    phi = np.asarray(phi)
    transform = np.asarray(transform)
    n_terms = transform.shape[0]
    if phi.shape[1] % n_terms != 0:
        raise InputSizeError(
            f"matrix width {phi.shape[1]} is not a multiple of the "
            f"{n_terms}-column transform"
        )
    n_taps = phi.shape[1] // n_terms
    blocks = phi.reshape(phi.shape[0], n_taps, n_terms) @ transform
    return blocks.reshape(phi.shape[0], n_taps * n_terms)
