"""Small dense complex linear algebra (dimension <= 8).

Vectors are 1-d complex numpy arrays. Orthonormal bases are square complex
arrays whose *columns* are the basis vectors.
"""

from __future__ import annotations

import numpy as np

from ._validation import check_square, check_vector
from .errors import NotHermitianError, ZeroNormError

HERMITIAN_TOL = 1e-12
ZERO_NORM_SQ = 1e-30
# Components smaller than this are skipped when fixing the eigenvector phase.
_PHASE_REF_TOL = 1e-10


def inner(u, v) -> complex:
    """Inner product <u|v>, conjugate-linear in the first argument."""
    u = check_vector(u)
    v = check_vector(v)
    if u.size != v.size:
        raise ValueError(f"dimension mismatch: {u.size} != {v.size}")
    return complex(np.vdot(u, v))


def normalize(v) -> np.ndarray:
    v = check_vector(v)
    norm_sq = float(np.vdot(v, v).real)
    if norm_sq <= ZERO_NORM_SQ:
        raise ZeroNormError(f"cannot normalise a vector with squared norm {norm_sq:.3e}")
    return v / np.sqrt(norm_sq)


def gram(vectors) -> np.ndarray:
    """Gram matrix ``G[i, j] = <v_i|v_j>`` of the columns of ``vectors``."""
    arr = np.asarray(vectors, dtype=complex)
    return arr.conj().T @ arr


def fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its first non-negligible component is real positive."""
    out = np.array(vectors, dtype=complex, copy=True)
    for k in range(out.shape[1]):
        col = out[:, k]
        nz = np.flatnonzero(np.abs(col) > _PHASE_REF_TOL)
        if nz.size:
            ref = col[nz[0]]
            out[:, k] = col * (abs(ref) / ref)
    return out


def hermitian_eig(M) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns
    -------
    eigenvalues : ndarray of float, sorted in descending order
    eigenvectors : ndarray, column ``k`` belongs to ``eigenvalues[k]``; each
        column's first non-negligible component is real and positive.

    Raises
    ------
    NotHermitianError
        If ``M`` differs from its conjugate transpose by more than 1e-12.
    """
    M = check_square(M)
    dev = np.max(np.abs(M - M.conj().T))
    if dev > HERMITIAN_TOL:
        raise NotHermitianError(f"matrix is not Hermitian (max deviation {dev:.3e})")
    # eigh only reads one triangle; symmetrise so round-off in the other is not ignored
    vals, vecs = np.linalg.eigh(0.5 * (M + M.conj().T))
    order = np.argsort(-vals, kind="stable")
    return vals[order], fix_phases(vecs[:, order])


def haar_unitaries(dim: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``size`` Haar-random ``dim x dim`` unitaries, shape ``(size, dim, dim)``.

    QR of a complex Ginibre matrix with the phases of R's diagonal absorbed
    into Q. Real and imaginary parts are interleaved in a single draw so the
    first ``k`` matrices of a larger batch equal a batch of ``k`` drawn from
    the same stream state.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    raw = rng.standard_normal((size, dim, dim, 2))
    z = (raw[..., 0] + 1j * raw[..., 1]) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[..., None, :]


def haar_random_basis(dim: int, rng: np.random.Generator) -> np.ndarray:
    """One Haar-random orthonormal basis of C^dim (columns)."""
    return haar_unitaries(dim, 1, rng)[0]
