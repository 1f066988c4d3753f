"""Phase feed-forward protocols.

Two protocols are provided. The *simplified* one switches between the
natural and canonical readout depending on the observed phase and has a
closed-form phase average. The *full* one searches, at each phase on a grid,
for the readout basis with the largest phase-dependent knowledge by random
search over Haar-distributed bases (optionally polished locally).

Randomness: the candidate stream for phase index ``j`` is derived from
``(seed, j)`` only, so all visibilities of a sweep see the same candidate
bases (common random numbers) and the result does not depend on the order
in which tasks are scheduled.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from scipy.linalg import expm
from scipy.optimize import minimize, minimize_scalar

from ._validation import check_visibility
from .errors import DomainError
from .knowledge import (
    _batch_knowledge_at,
    _check_not_dark,
    canonical_basis,
    canonical_k_closed,
    knowledge_curve,
    natural_basis,
    natural_k_at_closed,
)
from .linalg import haar_unitaries
from .model import TWO_PI, DetectorCoupling, pattern

DOMINANCE_TOL = 1e-9


class Protocol(str, enum.Enum):
    NATURAL = "natural"
    CANONICAL = "canonical"
    SIMPLIFIED = "simplified"
    FEEDFORWARD = "feedforward"


@dataclass(frozen=True)
class OptimizerConfig:
    """Budget and seeding of the random basis search.

    The defaults are the reference budget: 50 phases, 50 000 random
    bases per phase.
    """

    samples_per_delta: int = 50_000
    delta_points: int = 50
    seed: int = 0
    refine: bool = False
    refine_iters: int = 400
    chunk_size: int = 25_000

    def __post_init__(self):
        if self.samples_per_delta < 0:
            raise ValueError("samples_per_delta must be >= 0")
        if self.delta_points < 2:
            raise ValueError("delta_points must be >= 2")
        if self.chunk_size < 1 or self.refine_iters < 1:
            raise ValueError("chunk_size and refine_iters must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a non-negative 64-bit integer")


@dataclass
class KnowledgeCurve:
    """Phase-dependent knowledge sampled on a grid.

    ``sources[j]`` names which candidate produced ``values[j]``: ``natural``,
    ``canonical``, ``random`` or ``refined``.
    """

    visibility: float
    deltas: np.ndarray
    values: np.ndarray
    protocol: Protocol
    bases: np.ndarray | None = None
    sources: tuple = field(default_factory=tuple)

    def __post_init__(self):
        self.deltas = np.asarray(self.deltas, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.deltas.shape != self.values.shape:
            raise ValueError("deltas and values must have the same shape")
        if np.any(np.diff(self.deltas) <= 0):
            raise ValueError("phase grid must be strictly increasing")
        if self.deltas[0] < 0 or self.deltas[-1] > TWO_PI + 1e-12:
            raise ValueError("phase grid must lie in [0, 2pi]")


@dataclass(frozen=True)
class SweepRecord:
    visibility: float
    kbar_canonical: float
    kbar_simplified: float
    kbar_ff: float

    @property
    def excess_canonical(self) -> float:
        return self.kbar_canonical**2 + self.visibility**2

    @property
    def excess_simplified(self) -> float:
        return self.kbar_simplified**2 + self.visibility**2

    @property
    def excess_ff(self) -> float:
        return self.kbar_ff**2 + self.visibility**2


@dataclass
class VisibilitySweep:
    records: list
    curves: list
    argmax: dict

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


def delta_grid(n: int) -> np.ndarray:
    """``n`` equally spaced phases covering ``[0, 2pi]`` including both ends."""
    return np.linspace(0.0, TWO_PI, n)


# -- simplified protocol --------------------------------------------------------


def delta_star(V: float) -> float:
    """Phase in ``(0, pi)`` where natural and canonical knowledge cross."""
    V = check_visibility(V)
    if V <= 0.0 or V >= 1.0:
        raise DomainError(f"crossing phase is undefined for visibility {V}")
    return float(np.arccos((np.sqrt((1.0 - V) / (1.0 + V)) - 1.0) / V))


def simplified_k_at(delta, V: float):
    """Pointwise best of the natural and canonical phase-dependent knowledge."""
    V = check_visibility(V)
    if V == 1.0:
        return np.zeros_like(np.asarray(delta, dtype=float))[()]
    return np.maximum(natural_k_at_closed(delta, V), canonical_k_closed(V))


def simplified_avg_closed(V: float) -> float:
    V = check_visibility(V)
    if V == 0.0:
        return 1.0
    if V == 1.0:
        return 0.0
    ds = delta_star(V)
    kc = np.sqrt(1.0 - V * V)
    return float((2.0 * kc * (ds + V * np.sin(ds)) + 2.0 * (1.0 - V) * (np.pi - ds)) / TWO_PI)


def max_simplified_excess(lo: float = 0.01, hi: float = 0.99, grid_points: int = 99):
    """Visibility maximising the simplified-protocol excess.

    Grid search followed by golden-section refinement. Returns
    ``(visibility, excess)``.
    """
    excess = lambda v: simplified_avg_closed(v) ** 2 + v * v  # noqa: E731
    vs = np.linspace(lo, hi, grid_points)
    ex = np.array([excess(v) for v in vs])
    i = int(np.clip(np.argmax(ex), 1, grid_points - 2))
    res = minimize_scalar(
        lambda v: -excess(float(np.clip(v, lo, hi))),
        bracket=(vs[i - 1], vs[i], vs[i + 1]),
        method="golden",
        tol=1e-10,
    )
    v = float(np.clip(res.x, lo, hi))
    return v, excess(v)


# -- fixed-protocol curves ------------------------------------------------------


def protocol_curve(V: float, protocol, deltas=None, delta_points: int = 50) -> KnowledgeCurve:
    """Closed-form knowledge curve for the natural, canonical or simplified protocol."""
    V = check_visibility(V)
    protocol = Protocol(protocol)
    if protocol is Protocol.FEEDFORWARD:
        raise ValueError("use ff_curve for the feed-forward protocol")
    deltas = delta_grid(delta_points) if deltas is None else np.asarray(deltas, dtype=float)
    c = DetectorCoupling.from_visibility(V)
    nat, can = natural_basis(), canonical_basis(c)
    n = deltas.size
    if protocol is Protocol.CANONICAL:
        values = np.full(n, canonical_k_closed(V))
        use_nat = np.zeros(n, dtype=bool)
    elif protocol is Protocol.NATURAL:
        values = np.asarray(natural_k_at_closed(deltas, V), dtype=float)
        use_nat = np.ones(n, dtype=bool)
    else:
        values = np.asarray(simplified_k_at(deltas, V), dtype=float) * np.ones(n)
        use_nat = values > canonical_k_closed(V)
    bases = np.where(use_nat[:, None, None], nat, can)
    sources = tuple("natural" if u else "canonical" for u in use_nat)
    return KnowledgeCurve(V, deltas, values, protocol, bases, sources)


# -- full feed-forward optimisation -------------------------------------------------


def task_rng(seed: int, delta_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(delta_index)]))


def _unitary_chart(x: np.ndarray) -> np.ndarray:
    """Map 6 reals to ``expm(iH)`` with ``H`` Hermitian and zero diagonal.

    The diagonal of ``H`` only rephases individual basis vectors, which
    leaves the knowledge unchanged, so it is dropped.
    """
    H = np.zeros((3, 3), dtype=complex)
    H[0, 1] = x[0] + 1j * x[1]
    H[0, 2] = x[2] + 1j * x[3]
    H[1, 2] = x[4] + 1j * x[5]
    H = H + H.conj().T
    return expm(1j * H)


def refine_basis(basis: np.ndarray, delta: float, c: DetectorCoupling, iters: int = 400):
    """Derivative-free local polish of a readout basis at a fixed phase.

    Returns ``(basis, knowledge)``; the input is returned unchanged unless a
    strictly better basis is found.
    """
    k0 = float(_batch_knowledge_at(basis, [delta], c)[0])

    def objective(x):
        return -float(_batch_knowledge_at(basis @ _unitary_chart(x), [delta], c)[0])

    simplex = np.vstack([np.zeros(6), 0.05 * np.eye(6)])
    res = minimize(
        objective,
        np.zeros(6),
        method="Nelder-Mead",
        options={"maxiter": iters, "initial_simplex": simplex, "xatol": 1e-9, "fatol": 1e-13},
    )
    if -res.fun > k0:
        return basis @ _unitary_chart(res.x), -float(res.fun)
    return basis, k0


def _optimize_delta(delta_index: int, delta: float, couplings, cfg: OptimizerConfig):
    """Best basis at one phase for each coupling. Returns a list of (basis, K, source)."""
    nat = natural_basis()
    best = []
    for c in couplings:
        _check_not_dark(np.asarray(delta), c.visibility)
        can = canonical_basis(c)
        k_nat, k_can = _batch_knowledge_at(np.stack([nat, can]), [delta], c)[0]
        # natural wins ties so the sources column is stable
        best.append((nat, k_nat, "natural") if k_nat >= k_can else (can, k_can, "canonical"))

    rng = task_rng(cfg.seed, delta_index)
    remaining = cfg.samples_per_delta
    while remaining > 0:
        m = min(cfg.chunk_size, remaining)
        U = haar_unitaries(3, m, rng)
        for k, c in enumerate(couplings):
            values = _batch_knowledge_at(U, [delta], c)[0]
            i = int(np.argmax(values))
            if values[i] > best[k][1]:
                best[k] = (U[i], values[i], "random")
        remaining -= m

    out = []
    for (basis, value, source), c in zip(best, couplings):
        if cfg.refine:
            polished, pk = refine_basis(basis, delta, c, cfg.refine_iters)
            if pk > value:
                basis, source = polished, "refined"
        value = float(knowledge_curve(basis, [delta], c)[0])
        out.append((basis, value, source))
    return out


def optimize_basis_at(delta: float, c: DetectorCoupling, cfg: OptimizerConfig | None = None,
                      delta_index: int = 0):
    """Random-search the readout basis maximising knowledge at phase ``delta``.

    Candidates are the natural basis, the canonical basis and
    ``cfg.samples_per_delta`` Haar-random bases drawn from the stream for
    ``(cfg.seed, delta_index)``.

    Returns
    -------
    basis : (3, 3) complex array
    knowledge : float
    """
    cfg = cfg or OptimizerConfig()
    basis, value, _ = _optimize_delta(delta_index, float(delta), [c], cfg)[0]
    return basis, value


def ff_curves(visibilities, cfg: OptimizerConfig | None = None, n_jobs=None) -> list:
    """Feed-forward knowledge curves for several visibilities at once.

    Each phase's candidate bases are generated once and scored against every
    visibility. Phases are distributed over ``n_jobs`` workers.
    """
    cfg = cfg or OptimizerConfig()
    vs = [check_visibility(v) for v in visibilities]
    couplings = [DetectorCoupling.from_visibility(v) for v in vs]
    deltas = delta_grid(cfg.delta_points)
    results = Parallel(n_jobs=n_jobs)(
        delayed(_optimize_delta)(j, d, couplings, cfg) for j, d in enumerate(deltas)
    )
    curves = []
    for k, v in enumerate(vs):
        per_delta = [res[k] for res in results]
        curves.append(
            KnowledgeCurve(
                visibility=v,
                deltas=deltas,
                values=np.array([r[1] for r in per_delta]),
                protocol=Protocol.FEEDFORWARD,
                bases=np.stack([r[0] for r in per_delta]),
                sources=tuple(r[2] for r in per_delta),
            )
        )
    return curves


def ff_curve(V: float, cfg: OptimizerConfig | None = None, n_jobs=None) -> KnowledgeCurve:
    return ff_curves([V], cfg, n_jobs)[0]


def ff_average(curve: KnowledgeCurve) -> float:
    """Phase average of a sampled curve by the trapezoidal rule on its own grid.

    The error is set by the grid: for smooth curves the periodic trapezoid
    rule is spectrally accurate, but the kinks at the protocol switch points
    limit a 50-point grid to a few 1e-3.
    """
    d = curve.deltas
    if abs(d[0]) > 1e-12 or abs(d[-1] - TWO_PI) > 1e-12:
        raise ValueError("curve must cover the full period [0, 2pi]")
    return float(np.trapezoid(curve.values * pattern(d, curve.visibility), d))


def sweep_visibility(v_grid, cfg: OptimizerConfig | None = None, n_jobs=None) -> VisibilitySweep:
    """Phase-averaged knowledge and duality excess of all protocols over visibilities.

    ``argmax`` maps ``"simplified"`` and ``"ff"`` to ``(visibility, excess)``
    at the grid maximum, plus ``"simplified_polished"`` from a golden-section
    search on the closed form.
    """
    cfg = cfg or OptimizerConfig()
    vs = [check_visibility(v, allow_one=False) for v in v_grid]
    curves = ff_curves(vs, cfg, n_jobs)
    records = [
        SweepRecord(
            visibility=v,
            kbar_canonical=canonical_k_closed(v),
            kbar_simplified=simplified_avg_closed(v),
            kbar_ff=ff_average(curve),
        )
        for v, curve in zip(vs, curves)
    ]
    argmax = {}
    for name in ("simplified", "ff"):
        ex = [getattr(r, f"excess_{name}") for r in records]
        i = int(np.argmax(ex))
        argmax[name] = (records[i].visibility, ex[i])
    argmax["simplified_polished"] = max_simplified_excess()
    return VisibilitySweep(records, curves, argmax)
