"""scikit-learn style front end.

Phases are the samples: ``X`` is an array of phases in radians, either 1-d
or a single-column 2-d array. ``predict`` returns the phase-dependent
knowledge and ``score`` the phase-averaged knowledge (higher is better).
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_basis, check_phases, check_visibility
from .feedforward import (
    OptimizerConfig,
    Protocol,
    ff_average,
    ff_curve,
    protocol_curve,
    simplified_avg_closed,
    simplified_k_at,
)
from .knowledge import (
    _batch_knowledge_at,
    _check_not_dark,
    canonical_basis,
    knowledge_avg,
    knowledge_curve,
    natural_basis,
)
from .model import DetectorCoupling


class FixedBasisKnowledge(BaseEstimator):
    """Knowledge obtained when the same detector readout is used in every run.

    Parameters
    ----------
    visibility : float in [0, 1]
    basis : {"natural", "canonical"} or (3, 3) complex array
        Readout basis, columns are the basis vectors.
    """

    def __init__(self, visibility=0.5, basis="canonical"):
        self.visibility = visibility
        self.basis = basis

    def fit(self, X=None, y=None):
        V = check_visibility(self.visibility)
        self.coupling_ = DetectorCoupling.from_visibility(V)
        if isinstance(self.basis, str):
            if self.basis == "natural":
                self.basis_ = natural_basis()
            elif self.basis == "canonical":
                self.basis_ = canonical_basis(self.coupling_)
            else:
                raise ValueError(f"unknown basis {self.basis!r}")
        else:
            self.basis_ = check_basis(self.basis)
        self.knowledge_ = knowledge_avg(self.basis_, self.coupling_).knowledge
        return self

    def predict(self, X):
        check_is_fitted(self, "basis_")
        return knowledge_curve(self.basis_, check_phases(X), self.coupling_)

    def score(self, X=None, y=None):
        check_is_fitted(self, "knowledge_")
        return self.knowledge_


class FeedForwardKnowledge(BaseEstimator):
    """Phase feed-forward readout selection.

    ``fit`` builds the per-phase basis table on an equally spaced grid;
    ``predict`` evaluates the knowledge at arbitrary phases using the basis
    of the nearest grid phase, which is what the protocol does in a run.
    For ``protocol="simplified"`` the switch is exact and closed form.

    Parameters
    ----------
    visibility : float in [0, 1)
    protocol : {"feedforward", "simplified"}
    samples_per_delta, delta_points, seed, refine, refine_iters
        Random-search budget, see :class:`whichway.feedforward.OptimizerConfig`.
    n_jobs : int or None
        joblib workers over grid phases.
    """

    def __init__(
        self,
        visibility=0.5,
        protocol="feedforward",
        samples_per_delta=50_000,
        delta_points=50,
        seed=0,
        refine=False,
        refine_iters=400,
        n_jobs=None,
    ):
        self.visibility = visibility
        self.protocol = protocol
        self.samples_per_delta = samples_per_delta
        self.delta_points = delta_points
        self.seed = seed
        self.refine = refine
        self.refine_iters = refine_iters
        self.n_jobs = n_jobs

    def _config(self) -> OptimizerConfig:
        return OptimizerConfig(
            samples_per_delta=self.samples_per_delta,
            delta_points=self.delta_points,
            seed=self.seed,
            refine=self.refine,
            refine_iters=self.refine_iters,
        )

    def fit(self, X=None, y=None):
        V = check_visibility(self.visibility, allow_one=False)
        protocol = Protocol(self.protocol)
        self.coupling_ = DetectorCoupling.from_visibility(V)
        if protocol is Protocol.FEEDFORWARD:
            self.curve_ = ff_curve(V, self._config(), n_jobs=self.n_jobs)
        elif protocol is Protocol.SIMPLIFIED:
            self.curve_ = protocol_curve(V, protocol, delta_points=self.delta_points)
        else:
            raise ValueError("protocol must be 'feedforward' or 'simplified'")
        self.deltas_ = self.curve_.deltas
        self.bases_ = self.curve_.bases
        return self

    def select_bases(self, X) -> np.ndarray:
        """Readout basis used at each phase, shape ``(n, 3, 3)``."""
        check_is_fitted(self, "bases_")
        d = np.mod(check_phases(X), 2 * np.pi)
        idx = np.argmin(np.abs(d[:, None] - self.deltas_[None, :]), axis=1)
        return self.bases_[idx]

    def predict(self, X):
        check_is_fitted(self, "curve_")
        deltas = check_phases(X)
        if Protocol(self.protocol) is Protocol.SIMPLIFIED:
            return np.asarray(simplified_k_at(deltas, self.coupling_.visibility), dtype=float)
        _check_not_dark(deltas, self.coupling_.visibility)
        bases = self.select_bases(deltas)
        return np.array([
            _batch_knowledge_at(b, [d], self.coupling_)[0] for b, d in zip(bases, deltas)
        ])

    def score(self, X=None, y=None):
        """Phase-averaged knowledge; closed form for the simplified protocol."""
        check_is_fitted(self, "curve_")
        if Protocol(self.protocol) is Protocol.SIMPLIFIED:
            return simplified_avg_closed(self.coupling_.visibility)
        return ff_average(self.curve_)

    def excess(self) -> float:
        """Phase-averaged knowledge squared plus visibility squared."""
        return self.score() ** 2 + self.coupling_.visibility ** 2
