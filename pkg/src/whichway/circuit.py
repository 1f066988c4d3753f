"""Three-qubit statevector simulator for the interferometer circuit.

Qubit order is ``(QO, WWD_a, WWD_b)`` with the quantum object as the most
significant bit, so the computational index is ``4*qo + 2*a + b``. Path
``a`` is ``|0>`` and path ``b`` is ``|1>`` of the QO qubit.

States carry a leading shot axis: every shot is simulated as its own pure
state, gate by gate, with projective measurements sampled and collapsed per
shot. Gate angles may be per-shot arrays.
"""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_basis
from .errors import ConsistencyError, DomainError, ShotStarvationError, ShotStarvationWarning
from .knowledge import _batch_overlaps, _guess_quality_from_overlaps
from .model import DetectorCoupling, sample_delta

N_QUBITS = 3
QO, WWD_A, WWD_B = 0, 1, 2
WWD = (WWD_A, WWD_B)
PROB_TOL = 1e-10
SUPPORT_TOL = 1e-12
MIN_CONDITIONAL = 100
CHUNK = 100_000
# model order (|00>, |10>, |01>) -> WWD register index 2*a + b
_MODEL_TO_REGISTER = np.array([0, 2, 1])

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)
_X = np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple
    angle: object = None

    def matrix(self) -> np.ndarray:
        """2x2 matrix on the target; ``(n_shots, 2, 2)`` when the angle is per shot."""
        if self.name == "H":
            m = _H
        elif self.name == "X":
            m = _X
        elif self.name == "CRY":
            half = 0.5 * np.asarray(self.angle, dtype=float)
            c, s = np.cos(half), np.sin(half)
            m = np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)
        elif self.name == "P":
            ph = np.exp(1j * np.asarray(self.angle, dtype=float))
            one, zero = np.ones_like(ph), np.zeros_like(ph)
            m = np.stack([np.stack([one, zero], -1), np.stack([zero, ph], -1)], -2)
        else:
            raise ValueError(f"unknown gate {self.name!r}")
        return m


def hadamard(q: int) -> Gate:
    return Gate("H", (q,))


def pauli_x(q: int) -> Gate:
    return Gate("X", (q,))


def controlled_ry(control: int, target: int, angle) -> Gate:
    """``R_y(angle)`` on ``target`` when ``control`` is ``|1>``."""
    return Gate("CRY", (control, target), angle)


def phase(q: int, delta) -> Gate:
    """``diag(1, e^{i delta})`` on qubit ``q``."""
    return Gate("P", (q,), delta)


@dataclass
class CircuitState:
    """Batch of 3-qubit pure states, amplitudes shaped ``(n_shots, 8)``."""

    amplitudes: np.ndarray
    classical_record: list = field(default_factory=list)

    @classmethod
    def zeros(cls, n_shots: int = 1) -> "CircuitState":
        amps = np.zeros((n_shots, 2**N_QUBITS), dtype=complex)
        amps[:, 0] = 1.0
        return cls(amps)

    @property
    def n_shots(self) -> int:
        return self.amplitudes.shape[0]

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(-1, 2, 2, 2)

    def norms(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1)

    def select(self, rows) -> "CircuitState":
        return CircuitState(self.amplitudes[rows], [(k, v[rows]) for k, v in self.classical_record])


def _check_qubits(qubits):
    for q in qubits:
        if not isinstance(q, (int, np.integer)) or not 0 <= q < N_QUBITS:
            raise ValueError(f"invalid qubit index {q!r}")
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"repeated qubit in {qubits}")


def apply_gate(state: CircuitState, gate: Gate) -> CircuitState:
    _check_qubits(gate.qubits)
    n = state.n_shots
    mat = gate.matrix()
    if mat.ndim == 3 and mat.shape[0] != n:
        raise ValueError(f"gate carries {mat.shape[0]} angles for {n} shots")
    psi = state.tensor()
    if len(gate.qubits) == 1:
        (q,) = gate.qubits
        moved = np.moveaxis(psi, 1 + q, 1).reshape(n, 2, 4)
        out = np.matmul(mat, moved).reshape(n, 2, 2, 2)
        out = np.moveaxis(out, 1, 1 + q)
    else:
        ctrl, tgt = gate.qubits
        moved = np.moveaxis(psi, (1 + ctrl, 1 + tgt), (1, 2)).copy()
        moved[:, 1] = np.matmul(mat, moved[:, 1])
        out = np.moveaxis(moved, (1, 2), (1 + ctrl, 1 + tgt))
    return CircuitState(np.ascontiguousarray(out).reshape(n, 8), list(state.classical_record))


def apply_circuit(state: CircuitState, gates) -> CircuitState:
    for g in gates:
        state = apply_gate(state, g)
    return state


def embed_wwd_basis(basis) -> np.ndarray:
    """Lift a detector-subspace basis (model order) to the 4-dim WWD register.

    Outcome 3 is ``|11>``, which the interaction never populates.
    """
    basis = np.asarray(basis, dtype=complex)
    out = np.zeros(basis.shape[:-2] + (4, 4), dtype=complex)
    out[..., _MODEL_TO_REGISTER, :3] = basis
    out[..., 3, 3] = 1.0
    return out


def measure(state: CircuitState, basis, qubits, rng: np.random.Generator, label: str = "m"):
    """Projective measurement of ``qubits`` in ``basis`` (columns = outcome states).

    ``basis`` is ``(d, d)`` or per-shot ``(n_shots, d, d)`` with
    ``d = 2**len(qubits)``. Returns ``(outcomes, collapsed_state)``; the
    outcome array is appended to the classical record under ``label``.
    """
    qubits = tuple(qubits)
    _check_qubits(qubits)
    n, k = state.n_shots, len(qubits)
    d = 2**k
    basis = np.asarray(basis, dtype=complex)
    if basis.shape[-2:] != (d, d) or basis.ndim not in (2, 3):
        raise ValueError(f"basis must be ({d}, {d}) or (n_shots, {d}, {d}), got {basis.shape}")
    psi = np.moveaxis(state.tensor(), [1 + q for q in qubits], list(range(1, 1 + k)))
    psi = psi.reshape(n, d, 2 ** (N_QUBITS - k))
    # coeffs[n, j, r] = <b_j| psi_n>_r
    coeffs = np.matmul(np.swapaxes(basis.conj(), -1, -2), psi)
    basis = np.broadcast_to(basis, (n, d, d))
    probs = np.sum(np.abs(coeffs) ** 2, axis=2)
    total = probs.sum(axis=1)
    if np.any(np.abs(total - 1.0) > PROB_TOL):
        raise ConsistencyError(f"outcome probabilities sum to {total.min():.3e}..{total.max():.3e}")
    cdf = np.cumsum(probs / total[:, None], axis=1)
    u = rng.random(n)
    outcomes = np.minimum((cdf < u[:, None]).sum(axis=1), d - 1)
    rows = np.arange(n)
    p = probs[rows, outcomes]
    if np.any(p <= 0.0):
        raise ConsistencyError("sampled a zero-probability outcome")
    post = coeffs[rows, outcomes] / np.sqrt(p)[:, None]
    collapsed = basis[rows, :, outcomes][:, :, None] * post[:, None, :]
    collapsed = collapsed.reshape((n,) + (2,) * N_QUBITS)
    collapsed = np.moveaxis(collapsed, list(range(1, 1 + k)), [1 + q for q in qubits])
    record = list(state.classical_record) + [(label, outcomes)]
    return outcomes, CircuitState(np.ascontiguousarray(collapsed).reshape(n, 8), record)


# -- circuit blocks --------------------------------------------------------------


def preparation_gates(theta) -> list:
    """Slit passage plus detector interaction.

    The X conjugation makes the first controlled rotation fire on path a.
    """
    return [
        hadamard(QO),
        pauli_x(QO),
        controlled_ry(QO, WWD_A, 2.0 * np.asarray(theta)),
        pauli_x(QO),
        controlled_ry(QO, WWD_B, 2.0 * np.asarray(theta)),
    ]


def screen_gates(delta) -> list:
    """Gates after which QO outcome 0 is a click projecting onto ``|psi_delta>``."""
    return [phase(QO, -np.asarray(delta)), hadamard(QO)]


def prepare(theta, n_shots: int = 1) -> CircuitState:
    state = apply_circuit(CircuitState.zeros(n_shots), preparation_gates(theta))
    check_wwd_support(state)
    return state


def check_wwd_support(state: CircuitState, tol: float = SUPPORT_TOL):
    """Guard that the detector never populates ``|11>``."""
    leak = np.max(np.sum(np.abs(state.tensor()[:, :, 1, 1]) ** 2, axis=1))
    if leak > tol:
        raise ConsistencyError(f"detector population in |11> is {leak:.3e}")


def to_model_amplitudes(state: CircuitState) -> np.ndarray:
    """Amplitudes ``(n_shots, 2, 3)`` in the model's (path, detector) layout."""
    reg = state.amplitudes.reshape(-1, 2, 4)
    return reg[:, :, _MODEL_TO_REGISTER]


def theta_from_visibility(V: float) -> float:
    return DetectorCoupling.from_visibility(V).theta


# -- tallies ---------------------------------------------------------------------


@dataclass
class ShotTally:
    """Outcome counts keyed by tuples whose fields are named in ``keys``."""

    keys: tuple
    counts: Counter = field(default_factory=Counter)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @classmethod
    def from_columns(cls, keys, *columns) -> "ShotTally":
        cols = [np.asarray(c, dtype=np.int64) for c in columns]
        dims = tuple(int(c.max(initial=0)) + 1 for c in cols)
        flat = np.bincount(np.ravel_multi_index(cols, dims), minlength=int(np.prod(dims)))
        nz = np.flatnonzero(flat)
        return cls(
            tuple(keys),
            Counter({tuple(int(x) for x in np.unravel_index(i, dims)): int(flat[i]) for i in nz}),
        )

    def merge(self, other: "ShotTally") -> "ShotTally":
        if self.keys != other.keys:
            raise ValueError("cannot merge tallies with different keys")
        return ShotTally(self.keys, self.counts + other.counts)

    def count(self, **fixed) -> int:
        idx = {self.keys.index(k): v for k, v in fixed.items()}
        return sum(c for key, c in self.counts.items() if all(key[i] == v for i, v in idx.items()))

    def as_rows(self) -> list:
        return [list(k) + [c] for k, c in sorted(self.counts.items())]


def _chunks(shots: int):
    if shots < 1:
        raise ValueError("shots must be >= 1")
    while shots > 0:
        m = min(CHUNK, shots)
        yield m
        shots -= m


def _guess_table(basis, c: DetectorCoupling):
    q, path = _guess_quality_from_overlaps(*_batch_overlaps(basis, c))
    # slot 3 is the unpopulated |11> outcome
    return np.append(q, 0.5), np.append(path, 0)


def run_guessing_game(theta: float, basis, shots: int, rng: np.random.Generator,
                      pre_phase: float = 0.0) -> ShotTally:
    """Read out the detector, guess the path, then measure the path.

    Tally keys are ``(wwd, guess, path)`` with paths coded 0 = a, 1 = b.
    Ties are guessed by a fair coin. ``pre_phase`` applies a phase gate to
    the QO before the detector readout; path statistics must not depend on it.
    """
    basis = check_basis(basis)
    c = DetectorCoupling.from_theta(theta)
    _, path_rule = _guess_table(basis, c)
    wbasis = embed_wwd_basis(basis)
    tally = ShotTally(("wwd", "guess", "path"))
    for m in _chunks(shots):
        state = prepare(theta, m)
        if pre_phase:
            state = apply_gate(state, phase(QO, pre_phase))
        wwd, state = measure(state, wbasis, WWD, rng, "wwd")
        rule = path_rule[wwd]
        coin = rng.integers(0, 2, m)
        guess = np.where(rule == 1, 0, np.where(rule == -1, 1, coin))
        path, state = measure(state, np.eye(2), (QO,), rng, "path")
        tally = tally.merge(ShotTally.from_columns(tally.keys, wwd, guess, path))
    return tally


def guessing_estimates(tally: ShotTally, n_outcomes: int = 3) -> dict:
    """Empirical ``p_i``, ``q_i`` and knowledge with binomial standard errors."""
    n = tally.total
    p_hat, p_se, q_hat, q_se, n_i = [], [], [], [], []
    for i in range(n_outcomes):
        ni = tally.count(wwd=i)
        right = sum(c for (w, g, pth), c in tally.counts.items() if w == i and g == pth)
        p = ni / n
        q = right / ni if ni else float("nan")
        p_hat.append(p)
        p_se.append(np.sqrt(p * (1 - p) / n))
        q_hat.append(q)
        q_se.append(np.sqrt(q * (1 - q) / ni) if ni else float("nan"))
        n_i.append(ni)
    correct = sum(c for (w, g, pth), c in tally.counts.items() if g == pth) / n
    return {
        "shots": n,
        "counts": n_i,
        "p": np.array(p_hat),
        "p_se": np.array(p_se),
        "q": np.array(q_hat),
        "q_se": np.array(q_se),
        "k": 2 * correct - 1,
        "k_se": 2 * np.sqrt(correct * (1 - correct) / n),
    }


def run_phase_conditioned(
    theta: float,
    basis,
    delta: float,
    shots: int,
    rng: np.random.Generator,
    order: str = "qo_first",
) -> ShotTally:
    """Fixed-phase screen projection plus detector readout.

    Tally keys are ``(port, wwd)``; port 0 is the click projecting onto
    ``|psi_delta>``. ``order`` selects which subsystem is measured first.
    """
    if order not in ("qo_first", "wwd_first"):
        raise ValueError(f"order must be 'qo_first' or 'wwd_first', got {order!r}")
    basis = check_basis(basis)
    V = DetectorCoupling.from_theta(theta).visibility
    if 0.5 * (1 + V * np.cos(delta)) <= 1e-6:
        raise DomainError(f"port probability at delta={delta} is too small to sample")
    wbasis = embed_wwd_basis(basis)
    tally = ShotTally(("port", "wwd"))
    for m in _chunks(shots):
        state = prepare(theta, m)
        if order == "qo_first":
            state = apply_circuit(state, screen_gates(delta))
            port, state = measure(state, np.eye(2), (QO,), rng, "port")
            wwd, state = measure(state, wbasis, WWD, rng, "wwd")
        else:
            wwd, state = measure(state, wbasis, WWD, rng, "wwd")
            state = apply_circuit(state, screen_gates(delta))
            port, state = measure(state, np.eye(2), (QO,), rng, "port")
        tally = tally.merge(ShotTally.from_columns(tally.keys, port, wwd))
    if tally.count(port=0) < MIN_CONDITIONAL:
        warnings.warn(
            f"only {tally.count(port=0)} shots clicked in the psi_delta port",
            ShotStarvationWarning,
            stacklevel=2,
        )
    return tally


def conditional_estimates(tally: ShotTally, n_outcomes: int = 3) -> dict:
    n_port = tally.count(port=0)
    if n_port == 0:
        raise ShotStarvationError("no shots in the psi_delta port")
    p = np.array([tally.count(port=0, wwd=i) / n_port for i in range(n_outcomes)])
    return {
        "port_shots": n_port,
        "port_fraction": n_port / tally.total,
        "p": p,
        "p_se": np.sqrt(p * (1 - p) / n_port),
    }


def joint_frequencies(tally: ShotTally, n_outcomes: int = 4) -> np.ndarray:
    """``(2, n_outcomes)`` table of port/outcome frequencies."""
    n = tally.total
    return np.array([[tally.count(port=p, wwd=i) / n for i in range(n_outcomes)] for p in (0, 1)])


def run_feedforward_demo(theta: float, curve, shots: int, rng: np.random.Generator,
                         max_rounds: int = 1000) -> ShotTally:
    """Simulate the feed-forward protocol shot by shot.

    Each shot draws a screen phase from the pattern, repeats preparation
    and the fixed-phase projection until the ``|psi_delta>`` port clicks,
    then reads the detector out in the curve's basis at the nearest grid
    phase. Tally keys are ``(grid, wwd)``.
    """
    if curve.bases is None:
        raise ValueError("curve carries no per-phase bases")
    c = DetectorCoupling.from_theta(theta)
    if abs(c.visibility - curve.visibility) > 1e-9:
        raise ValueError(
            f"curve visibility {curve.visibility} does not match theta (V={c.visibility})"
        )
    wbases = embed_wwd_basis(curve.bases)
    tally = ShotTally(("grid", "wwd"))
    for m in _chunks(shots):
        delta = sample_delta(c.visibility, rng, size=m)
        pending = np.arange(m)
        final = np.empty((m, 8), dtype=complex)
        for _ in range(max_rounds):
            state = prepare(theta, pending.size)
            state = apply_circuit(state, screen_gates(delta[pending]))
            port, state = measure(state, np.eye(2), (QO,), rng, "port")
            hit = port == 0
            final[pending[hit]] = state.amplitudes[hit]
            pending = pending[~hit]
            if pending.size == 0:
                break
        else:
            raise ShotStarvationError(f"{pending.size} shots never clicked in {max_rounds} rounds")
        grid = np.argmin(np.abs(delta[:, None] - curve.deltas[None, :]), axis=1)
        wwd, _ = measure(CircuitState(final), wbases[grid], WWD, rng, "wwd")
        tally = tally.merge(ShotTally.from_columns(tally.keys, grid, wwd))
    return tally


def feedforward_estimate(tally: ShotTally, curve) -> tuple[float, float]:
    """Knowledge estimate ``mean(2 q - 1)`` and its standard error."""
    c = DetectorCoupling.from_visibility(curve.visibility)
    n = tally.total
    vals, weights = [], []
    for (g, i), cnt in tally.counts.items():
        q, _ = _guess_table(curve.bases[g], c)
        vals.append(2 * q[i] - 1)
        weights.append(cnt)
    vals, weights = np.array(vals), np.array(weights)
    mean = float(np.sum(vals * weights) / n)
    var = float(np.sum(weights * (vals - mean) ** 2) / max(n - 1, 1))
    return mean, float(np.sqrt(var / n))
