"""Which-way knowledge functionals.

All basis arguments are ``(3, 3)`` complex arrays whose columns are the
detector readout vectors in the ``(|00>, |10>, |01>)`` order. The private
``_batch_*`` kernels accept a leading stack of bases ``(..., 3, 3)`` and are
what the feed-forward optimiser runs over tens of thousands of candidates.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import simpson

from ._validation import check_basis, check_phases, check_visibility, check_vector
from .errors import DarkFringeError, DomainError
from .linalg import hermitian_eig
from .model import TWO_PI, DetectorCoupling, pattern, port_probability

TIE_TOL = 1e-12
NULL_OVERLAP = 1e-30
DARK_FRINGE_TOL = 1e-12
SIMPSON_PANELS = 4096


class Path(enum.Enum):
    A = "A"
    B = "B"
    TIE = "tie"


@dataclass(frozen=True)
class ReadoutOutcome:
    index: int
    probability: float
    guess_quality: float
    guessed_path: Path


@dataclass(frozen=True)
class KnowledgeValue:
    likelihood: float

    @property
    def knowledge(self) -> float:
        return 2.0 * self.likelihood - 1.0

    def __float__(self):
        return self.knowledge


# -- vectorised kernels -----------------------------------------------------


def _batch_overlaps(bases: np.ndarray, c: DetectorCoupling):
    """Return ``(<W_i|chi_a>, <W_i|chi_b>)`` with shape ``(..., 3)`` each."""
    s = c.states
    conj = np.conj(bases)
    return s.chi_a @ conj, s.chi_b @ conj


def _guess_quality_from_overlaps(ov_a: np.ndarray, ov_b: np.ndarray):
    """Vectorised guess quality and guessed path (+1 = A, -1 = B, 0 = tie)."""
    pa = np.abs(ov_a) ** 2
    pb = np.abs(ov_b) ** 2
    total = pa + pb
    tie = (np.abs(pa - pb) <= TIE_TOL) | (total <= NULL_OVERLAP)
    safe_total = np.where(tie, 1.0, total)
    q = np.where(tie, 0.5, np.maximum(pa, pb) / safe_total)
    path = np.where(tie, 0, np.where(pa > pb, 1, -1))
    return q, path


def _batch_conditional_weights(ov_a, ov_b, deltas):
    """Unnormalised ``|<psi_delta, W_i|Psi>|^2``; shape ``(n_delta, ..., 3)``.

    ``<psi_delta, W_i|Psi> = (<W_i|chi_a> + e^{-i delta} <W_i|chi_b>) / 2``.
    """
    phase = np.exp(-1j * np.asarray(deltas, dtype=float))
    phase = phase.reshape(phase.shape + (1,) * ov_a.ndim)
    return 0.25 * np.abs(ov_a + phase * ov_b) ** 2


def _batch_knowledge_at(bases: np.ndarray, deltas, c: DetectorCoupling) -> np.ndarray:
    """Phase-dependent knowledge for a stack of bases; shape ``(n_delta, ...)``.

    No dark-fringe check: callers guarantee a non-vanishing port probability.
    """
    ov_a, ov_b = _batch_overlaps(bases, c)
    q, _ = _guess_quality_from_overlaps(ov_a, ov_b)
    w = _batch_conditional_weights(ov_a, ov_b, deltas)
    norm = w.sum(axis=-1)
    return 2.0 * (w * q).sum(axis=-1) / norm - 1.0


def _batch_knowledge_avg(bases: np.ndarray, c: DetectorCoupling) -> np.ndarray:
    ov_a, ov_b = _batch_overlaps(bases, c)
    q, _ = _guess_quality_from_overlaps(ov_a, ov_b)
    p = 0.5 * (np.abs(ov_a) ** 2 + np.abs(ov_b) ** 2)
    return 2.0 * (p * q).sum(axis=-1) - 1.0


def _check_not_dark(deltas: np.ndarray, V: float):
    prob = port_probability(deltas, V)
    if np.any(prob <= DARK_FRINGE_TOL):
        bad = np.asarray(deltas)[prob <= DARK_FRINGE_TOL]
        raise DarkFringeError(
            f"the quantum object is never detected at delta={bad.ravel()[0]:.12g} "
            f"for visibility {V:.12g}"
        )


# -- public API ---------------------------------------------------------------


def guess_quality(w, c: DetectorCoupling) -> tuple[float, Path]:
    """Best probability of naming the path correctly after reading out ``|w>``."""
    w = check_vector(w, dim=3)
    ov_a, ov_b = _batch_overlaps(w[:, None], c)
    q, path = _guess_quality_from_overlaps(ov_a, ov_b)
    return float(q[0]), {1: Path.A, -1: Path.B, 0: Path.TIE}[int(path[0])]


def guess_qualities(basis, c: DetectorCoupling) -> np.ndarray:
    """Guess quality of every basis vector, shape ``(3,)``."""
    basis = check_basis(basis)
    q, _ = _guess_quality_from_overlaps(*_batch_overlaps(basis, c))
    return q


def _outcomes(probs, basis, c) -> list[ReadoutOutcome]:
    ov_a, ov_b = _batch_overlaps(basis, c)
    q, path = _guess_quality_from_overlaps(ov_a, ov_b)
    labels = {1: Path.A, -1: Path.B, 0: Path.TIE}
    return [
        ReadoutOutcome(i, float(probs[i]), float(q[i]), labels[int(path[i])])
        for i in range(basis.shape[1])
    ]


def readout_probs(basis, c: DetectorCoupling) -> list[ReadoutOutcome]:
    """Unconditional readout probabilities ``<W_i|rho_WWD|W_i>`` with guess data."""
    basis = check_basis(basis)
    ov_a, ov_b = _batch_overlaps(basis, c)
    p = 0.5 * (np.abs(ov_a) ** 2 + np.abs(ov_b) ** 2)
    return _outcomes(p, basis, c)


def knowledge_avg(basis, c: DetectorCoupling) -> KnowledgeValue:
    """Phase-averaged which-way knowledge of a fixed readout basis."""
    outcomes = readout_probs(basis, c)
    return KnowledgeValue(sum(o.probability * o.guess_quality for o in outcomes))


def conditional_probs(basis, delta: float, c: DetectorCoupling) -> list[ReadoutOutcome]:
    """Readout probabilities conditioned on a screen click at phase ``delta``.

    Raises
    ------
    DarkFringeError
        If the click probability at ``delta`` vanishes (V = 1, delta = pi).
    """
    basis = check_basis(basis)
    _check_not_dark(np.asarray(delta), c.visibility)
    ov_a, ov_b = _batch_overlaps(basis, c)
    w = _batch_conditional_weights(ov_a, ov_b, delta)
    return _outcomes(w / w.sum(), basis, c)


def knowledge_at(basis, delta: float, c: DetectorCoupling) -> KnowledgeValue:
    outcomes = conditional_probs(basis, delta, c)
    return KnowledgeValue(sum(o.probability * o.guess_quality for o in outcomes))


def knowledge_curve(basis, deltas, c: DetectorCoupling) -> np.ndarray:
    """Vectorised :func:`knowledge_at` over an array of phases."""
    basis = check_basis(basis)
    deltas = check_phases(deltas)
    _check_not_dark(deltas, c.visibility)
    return _batch_knowledge_at(basis, deltas, c)


def natural_basis() -> np.ndarray:
    """Local computational-basis readout of both detector qubits (``|11>`` dropped)."""
    return np.eye(3, dtype=complex)


def canonical_observable(c: DetectorCoupling) -> np.ndarray:
    s = c.states
    return np.outer(s.chi_a, s.chi_a.conj()) - np.outer(s.chi_b, s.chi_b.conj())


def canonical_basis(c: DetectorCoupling) -> np.ndarray:
    """Eigenbasis of ``|chi_a><chi_a| - |chi_b><chi_b|`` in descending eigenvalue order."""
    _, vecs = hermitian_eig(canonical_observable(c))
    return vecs


def natural_k_closed(V: float) -> float:
    return 1.0 - check_visibility(V)


def canonical_k_closed(V: float) -> float:
    V = check_visibility(V)
    return float(np.sqrt(1.0 - V * V))


distinguishability = canonical_k_closed


def natural_k_at_closed(delta, V: float):
    V = check_visibility(V)
    denom = 1.0 + V * np.cos(delta)
    if np.any(denom <= DARK_FRINGE_TOL):
        raise DarkFringeError(f"natural knowledge undefined at the dark fringe (V={V})")
    return (1.0 - V) / denom


def phase_average(
    k_of_delta: Callable[[np.ndarray], np.ndarray],
    V: float,
    breakpoints=(),
    panels: int = SIMPSON_PANELS,
) -> float:
    """Average a phase-dependent quantity over the screen pattern.

    Composite Simpson rule with ``panels`` intervals on each smooth piece of
    ``[0, 2pi]``. ``k_of_delta`` must accept an array of phases. Nodes where
    the pattern vanishes are given zero weight without calling the integrand.
    """
    V = check_visibility(V)
    cuts = sorted({0.0, TWO_PI, *(float(b) for b in breakpoints if 0.0 < b < TWO_PI)})
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        nodes = np.linspace(lo, hi, panels + 1)
        weight = pattern(nodes, V)
        live = port_probability(nodes, V) > DARK_FRINGE_TOL
        values = np.zeros_like(nodes)
        values[live] = np.broadcast_to(np.asarray(k_of_delta(nodes[live]), dtype=float),
                                       nodes[live].shape)
        if not np.all(np.isfinite(values)):
            raise ValueError("integrand returned non-finite values")
        total += simpson(values * weight, x=nodes)
    return float(total)
