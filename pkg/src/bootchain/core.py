"""Dense linear-algebra helpers, parameter vectors, and the Pauli basis.

Parameters are plain 1-D float64 arrays throughout the package; Hermitian
matrices appear only here and are handed to the statistical machinery as
their real coefficient vectors in the Pauli basis (the Hilbert-Schmidt norm
is isometric to the Euclidean norm of the coefficients, so everything
downstream works on R^d unchanged). Complex dtype never leaves this module.
"""

from __future__ import annotations

import itertools

import numpy as np

MAX_PAULI_DIM = 32  # memory guard: m = 2^l

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_2 = np.array([[0, 1j], [-1j, 0]], dtype=complex)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_MATRICES = (SIGMA_0, SIGMA_1, SIGMA_2, SIGMA_3)


def as_param_vector(x) -> np.ndarray:
    """Validate and return a parameter vector: 1-D, float64, finite, read-only."""
    v = np.array(x, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("parameter vector must be 1-D with length >= 1")
    if not np.all(np.isfinite(v)):
        raise ValueError("parameter vector has non-finite entries")
    v.flags.writeable = False
    return v


def check_symmetric(mat: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Validate a square real matrix as symmetric within relative tolerance."""
    m = np.asarray(mat, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("covariance matrix must be square")
    scale = max(np.abs(m).max(), 1.0)
    if np.abs(m - m.T).max() > rtol * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    return m


def check_psd(mat: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Opt-in PSD check: smallest eigenvalue >= -tol * ||mat||.

    Not run on every construction; validation cost dominates at high
    replication counts, so callers invoke this in debug paths only.
    """
    m = check_symmetric(mat)
    norm = max(np.abs(m).max(), 1.0)
    w = np.linalg.eigvalsh(m)
    if w.min() < -tol * norm:
        raise ValueError(f"matrix is not PSD: min eigenvalue {w.min():g}")
    return m


def sqrt_psd(mat: np.ndarray) -> np.ndarray:
    """Symmetric square root of a PSD matrix via eigendecomposition.

    Eigenvalues are clamped at zero, so slightly indefinite inputs (rounding
    noise) still produce a valid factor with sqrt_psd(S) @ sqrt_psd(S).T ~ S.
    """
    m = check_symmetric(mat)
    w, v = np.linalg.eigh(m)
    return (v * np.sqrt(np.maximum(w, 0.0))) @ v.T


def check_hermitian(mat: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Validate a square complex matrix as Hermitian within tolerance."""
    m = np.asarray(mat, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("Hermitian matrix must be square")
    scale = max(np.abs(m).max(), 1.0)
    if np.abs(m - m.conj().T).max() > tol * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    return m


def hs_inner(a: np.ndarray, b: np.ndarray) -> float:
    """Hilbert-Schmidt inner product Re tr(a^dagger b).

    For Hermitian inputs tr(a^dagger b) is real up to rounding; the
    imaginary part is discarded.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.real(np.vdot(a, b)))


def mat_vec(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    v = np.asarray(v, dtype=float)
    if m.ndim != 2 or m.shape[1] != v.shape[0]:
        raise ValueError(f"dimension mismatch: {m.shape} @ {v.shape}")
    return m @ v


def pauli_basis(l: int) -> list[np.ndarray]:
    """All l-fold tensor products of W_i = sigma_i / sqrt(2), i in {0,1,2,3}.

    Returns the 4^l matrices of size m = 2^l in lexicographic order of the
    index tuple (i_1, ..., i_l). The set is orthonormal and complete in the
    Hilbert-Schmidt inner product.
    """
    if l < 1:
        raise ValueError("l must be >= 1")
    if 2**l > MAX_PAULI_DIM:
        raise ValueError(f"matrix dimension 2^{l} exceeds guard {MAX_PAULI_DIM}")
    w = [s / np.sqrt(2.0) for s in PAULI_MATRICES]
    basis = []
    for idx in itertools.product(range(4), repeat=l):
        mat = w[idx[0]]
        for i in idx[1:]:
            mat = np.kron(mat, w[i])
        basis.append(mat)
    return basis


def pauli_coefficients(h: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    """Real coefficient vector of a Hermitian matrix in an orthonormal basis."""
    return np.array([hs_inner(e, h) for e in basis])


def pauli_reconstruct(coeffs: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    """Inverse of pauli_coefficients: sum_j c_j E_j."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (len(basis),):
        raise ValueError("coefficient length does not match basis size")
    out = np.zeros_like(basis[0])
    for c, e in zip(coeffs, basis):
        out += c * e
    return out
