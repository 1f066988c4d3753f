"""Which-way knowledge in a two-path interferometer and its phase feed-forward."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConsistencyError,
    DarkFringeError,
    DomainError,
    NotHermitianError,
    ShotStarvationError,
    ShotStarvationWarning,
    WhichWayError,
    ZeroNormError,
)
from .estimators import FeedForwardKnowledge, FixedBasisKnowledge  # noqa: E402
from .feedforward import (  # noqa: E402
    KnowledgeCurve,
    OptimizerConfig,
    Protocol,
    SweepRecord,
    delta_star,
    ff_average,
    ff_curve,
    optimize_basis_at,
    simplified_avg_closed,
    simplified_k_at,
    sweep_visibility,
)
from .knowledge import (  # noqa: E402
    canonical_basis,
    canonical_k_closed,
    knowledge_at,
    knowledge_avg,
    natural_basis,
    natural_k_at_closed,
    natural_k_closed,
    phase_average,
)
from .model import DetectorCoupling, joint_state, make_coupling, pattern  # noqa: E402

__all__ = [
    "ConsistencyError",
    "DarkFringeError",
    "DetectorCoupling",
    "DomainError",
    "FeedForwardKnowledge",
    "FixedBasisKnowledge",
    "KnowledgeCurve",
    "NotHermitianError",
    "OptimizerConfig",
    "Protocol",
    "ShotStarvationError",
    "ShotStarvationWarning",
    "SweepRecord",
    "WhichWayError",
    "ZeroNormError",
    "canonical_basis",
    "canonical_k_closed",
    "delta_star",
    "ff_average",
    "ff_curve",
    "joint_state",
    "knowledge_at",
    "knowledge_avg",
    "make_coupling",
    "natural_basis",
    "natural_k_at_closed",
    "natural_k_closed",
    "optimize_basis_at",
    "pattern",
    "phase_average",
    "simplified_avg_closed",
    "simplified_k_at",
    "sweep_visibility",
]
