"""Input validation helpers shared by the library, the estimators and the CLI."""

from __future__ import annotations

import numbers

import numpy as np

from .errors import DomainError

GRAM_TOL = 1e-12
MAX_DIM = 8


def check_unit_interval(value, name: str, *, closed_right: bool = True) -> float:
    """Return ``value`` as float, raising :class:`DomainError` unless it is in [0, 1]."""
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        try:
            value = float(value)
        except (TypeError, ValueError):
            raise DomainError(f"{name} must be a real number, got {value!r}") from None
    value = float(value)
    if not np.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value}")
    upper_ok = value <= 1.0 if closed_right else value < 1.0
    if value < 0.0 or not upper_ok:
        bracket = "]" if closed_right else ")"
        raise DomainError(f"{name} must lie in [0, 1{bracket}, got {value}")
    return value


def check_visibility(V, *, allow_one: bool = True) -> float:
    return check_unit_interval(V, "visibility", closed_right=allow_one)


def check_phases(deltas) -> np.ndarray:
    """Coerce phases to a 1-d float array.

    Accepts scalars, sequences, and sklearn-style ``(n_samples, 1)`` arrays.
    """
    arr = np.asarray(deltas, dtype=float)
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise ValueError(
                f"phase input must have a single feature column, got shape {arr.shape}"
            )
        arr = arr[:, 0]
    arr = np.atleast_1d(arr)
    if arr.ndim != 1:
        raise ValueError(f"phases must be 1-d, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("phases must be finite")
    return arr


def check_vector(v, *, dim: int | None = None) -> np.ndarray:
    arr = np.asarray(v, dtype=complex)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"expected a non-empty 1-d vector, got shape {arr.shape}")
    if arr.size > MAX_DIM:
        raise ValueError(f"vector dimension {arr.size} exceeds {MAX_DIM}")
    if dim is not None and arr.size != dim:
        raise ValueError(f"expected dimension {dim}, got {arr.size}")
    return arr


def check_square(M) -> np.ndarray:
    arr = np.asarray(M, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {arr.shape}")
    if arr.shape[0] > MAX_DIM:
        raise ValueError(f"matrix dimension {arr.shape[0]} exceeds {MAX_DIM}")
    return arr


def check_basis(basis, *, dim: int | None = 3, tol: float = GRAM_TOL) -> np.ndarray:
    """Validate an orthonormal basis stored column-wise.

    Column ``i`` of the returned ``(d, d)`` complex array is the basis
    vector ``|W_i>``.
    """
    arr = check_square(basis)
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"expected a {dim}x{dim} basis, got {arr.shape}")
    gram = arr.conj().T @ arr
    dev = np.max(np.abs(gram - np.eye(arr.shape[0])))
    if dev > tol:
        raise ValueError(f"basis is not orthonormal (Gram deviation {dev:.3e} > {tol:.0e})")
    return arr


def gram_deviation(basis) -> float:
    arr = np.asarray(basis, dtype=complex)
    return float(np.max(np.abs(arr.conj().T @ arr - np.eye(arr.shape[-1]))))
