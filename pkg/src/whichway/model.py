"""Interferometer plus two-qubit which-way detector.

The detector lives in the three-dimensional subspace spanned by
``|00>, |10>, |01>`` (in that order); ``|11>`` is never populated.
Paths are ordered ``(a, b)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._validation import check_unit_interval, check_visibility
from .errors import DomainError

TWO_PI = 2.0 * np.pi
WWD_LABELS = ("00", "10", "01")
_ROOT_TOL = 1e-12


@dataclass(frozen=True)
class DetectorCoupling:
    """Interaction strength of the which-way detector.

    ``beta`` is real and non-negative; a relative phase between the two
    marker states only shifts the interference pattern.
    """

    beta: float

    def __post_init__(self):
        object.__setattr__(self, "beta", check_unit_interval(self.beta, "beta"))

    @classmethod
    def from_visibility(cls, V: float) -> "DetectorCoupling":
        V = check_visibility(V)
        return cls(np.sqrt(1.0 - V))

    @classmethod
    def from_theta(cls, theta: float) -> "DetectorCoupling":
        """Coupling realised by controlled ``R_y(2 theta)`` rotations."""
        beta = np.sin(theta)
        if beta < -1e-15 or np.cos(theta) < -1e-15:
            raise DomainError(f"theta must lie in [0, pi/2], got {theta}")
        return cls(float(np.clip(beta, 0.0, 1.0)))

    @property
    def alpha(self) -> float:
        return float(np.sqrt(max(0.0, 1.0 - self.beta**2)))

    @property
    def visibility(self) -> float:
        return 1.0 - self.beta**2

    @property
    def theta(self) -> float:
        return float(np.arcsin(self.beta))

    @cached_property
    def states(self) -> "WwdStatePair":
        return WwdStatePair.from_coupling(self)


@dataclass(frozen=True)
class WwdStatePair:
    """Detector marker states for the two paths in the ``(|00>, |10>, |01>)`` basis."""

    chi_a: np.ndarray
    chi_b: np.ndarray
    basis_order: tuple = WWD_LABELS

    @classmethod
    def from_coupling(cls, c: DetectorCoupling) -> "WwdStatePair":
        a, b = c.alpha, c.beta
        chi_a = np.array([a, b, 0.0], dtype=complex)
        chi_b = np.array([a, 0.0, b], dtype=complex)
        chi_a.setflags(write=False)
        chi_b.setflags(write=False)
        return cls(chi_a, chi_b)


def make_coupling(beta: float) -> DetectorCoupling:
    return DetectorCoupling(beta)


def joint_state(c: DetectorCoupling) -> np.ndarray:
    """Entangled path/detector state as a ``(2, 3)`` array.

    Row ``p`` holds the detector amplitudes attached to path ``p`` (a, b),
    so the state is ``(|a>|chi_a> + |b>|chi_b>) / sqrt(2)``.
    """
    s = c.states
    return np.stack([s.chi_a, s.chi_b]) / np.sqrt(2.0)


def rho_wwd(state: np.ndarray) -> np.ndarray:
    """Reduced 3x3 detector density matrix (trace over the path)."""
    state = np.asarray(state, dtype=complex)
    return state.T @ state.conj()


def rho_qo(state: np.ndarray) -> np.ndarray:
    """Reduced 2x2 path density matrix (trace over the detector)."""
    state = np.asarray(state, dtype=complex)
    return state @ state.conj().T


def pattern(delta, V):
    """Screen density ``(1 + V cos delta) / 2pi``, normalised over one period."""
    V = check_visibility(V)
    return (1.0 + V * np.cos(delta)) / TWO_PI


def port_probability(delta, V):
    """Probability that a fixed-phase projection onto ``|psi_delta>`` succeeds."""
    return 0.5 * (1.0 + V * np.cos(delta))


def psi_delta(delta) -> np.ndarray:
    """Path state ``(|a> + e^{i delta}|b>) / sqrt(2)``."""
    return np.array([1.0, np.exp(1j * delta)]) / np.sqrt(2.0)


def conditional_wwd_state(delta: float, state: np.ndarray) -> np.ndarray:
    """Unnormalised detector state ``<psi_delta|Psi>`` left by a screen click at ``delta``.

    Its squared norm is :func:`port_probability`.
    """
    state = np.asarray(state, dtype=complex)
    return psi_delta(delta).conj() @ state


def pattern_cdf(delta, V):
    return (delta + V * np.sin(delta)) / TWO_PI


def inverse_pattern_cdf(u, V: float) -> np.ndarray:
    """Solve ``pattern_cdf(delta, V) = u`` on ``[0, 2pi]`` by vectorised bisection."""
    u = np.asarray(u, dtype=float)
    lo = np.zeros_like(u)
    hi = np.full_like(u, TWO_PI)
    # 2pi / 2**50 < 1e-14, well below the 1e-12 bracket target
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        below = pattern_cdf(mid, V) < u
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.max(hi - lo, initial=0.0) <= _ROOT_TOL:
            break
    return 0.5 * (lo + hi)


def sample_delta(V: float, rng: np.random.Generator, size=None):
    """Draw screen phases in ``[0, 2pi)`` distributed according to :func:`pattern`."""
    V = check_visibility(V)
    u = rng.random(size)
    d = inverse_pattern_cdf(u, V)
    d = np.minimum(d, np.nextafter(TWO_PI, 0.0))
    return float(d) if size is None else d
