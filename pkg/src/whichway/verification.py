"""Invariant suite behind ``whichway verify``."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

import numpy as np

from .circuit import (
    joint_frequencies,
    prepare,
    run_phase_conditioned,
    to_model_amplitudes,
)
from .feedforward import simplified_avg_closed, delta_star, simplified_k_at
from .knowledge import (
    _batch_conditional_weights,
    _batch_knowledge_avg,
    _batch_overlaps,
    canonical_basis,
    knowledge_avg,
    knowledge_curve,
    natural_basis,
    phase_average,
)
from .linalg import haar_unitaries
from .model import DetectorCoupling, joint_state, port_probability
from .stats import two_sample_z, with_retry

V_GRID = tuple(np.round(np.arange(0.1, 1.0, 0.1), 10))


@dataclass
class CheckResult:
    name: str
    passed: bool
    error: float
    tolerance: float
    detail: str = ""
    seconds: float = 0.0


def _closed_forms(scale, rng, full):
    err = 0.0
    for V in V_GRID:
        c = DetectorCoupling.from_visibility(V)
        err = max(err, abs(knowledge_avg(natural_basis(), c).knowledge - (1 - V)))
        err = max(err, abs(knowledge_avg(canonical_basis(c), c).knowledge - np.sqrt(1 - V * V)))
    return err, 1e-10 * scale, ""


def _phase_closed_forms(scale, rng, full):
    deltas = np.linspace(0, 2 * np.pi, 1000 if full else 200)
    err = 0.0
    for V in V_GRID:
        c = DetectorCoupling.from_visibility(V)
        nat = knowledge_curve(natural_basis(), deltas, c)
        can = knowledge_curve(canonical_basis(c), deltas, c)
        err = max(err, np.max(np.abs(nat - (1 - V) / (1 + V * np.cos(deltas)))))
        err = max(err, np.max(np.abs(can - np.sqrt(1 - V * V))))
    return err, 1e-9 * scale, f"{deltas.size} phases x {len(V_GRID)} visibilities"


def _duality_bound(scale, rng, full):
    n = 10_000 if full else 1_000
    bases = haar_unitaries(3, n, rng)
    worst = -np.inf
    for V in V_GRID:
        k = _batch_knowledge_avg(bases, DetectorCoupling.from_visibility(V))
        worst = max(worst, float(np.max(k**2 + V**2 - 1.0)))
    # error reported as the largest violation above the bound
    return max(worst, 0.0), 1e-9 * scale, f"{n} Haar bases, max K^2+V^2-1 = {worst:.3e}"


def _phase_average_identity(scale, rng, full):
    n = 100 if full else 10
    err = 0.0
    for V in (0.1, 0.3, 0.5, 0.7, 0.9):
        c = DetectorCoupling.from_visibility(V)
        for b in haar_unitaries(3, n, rng):
            avg = phase_average(lambda d: knowledge_curve(b, d, c), V)
            err = max(err, abs(avg - knowledge_avg(b, c).knowledge))
    return err, 1e-7 * scale, f"{n} bases x 5 visibilities"


def _simplified_closed_form(scale, rng, full):
    err = 0.0
    for V in np.linspace(0.03, 0.97, 20):
        ds = delta_star(V)
        quad = phase_average(lambda d: simplified_k_at(d, V), V, breakpoints=(ds, 2 * np.pi - ds))
        err = max(err, abs(quad - simplified_avg_closed(V)))
    return err, 1e-8 * scale, "20 visibilities"


def _order_invariance_analytic(scale, rng, full):
    err = 0.0
    deltas = np.linspace(0, 2 * np.pi, 64)
    for V in V_GRID:
        c = DetectorCoupling.from_visibility(V)
        bases = haar_unitaries(3, 50, rng)
        w = _batch_conditional_weights(*_batch_overlaps(bases, c), deltas).sum(axis=-1)
        err = max(err, float(np.max(np.abs(w - port_probability(deltas, V)[:, None]))))
    return err, 1e-12 * scale, ""


def _order_invariance_mc(scale, rng, full):
    shots = 100_000 if full else 20_000
    V, delta = 0.5, 2.0
    c = DetectorCoupling.from_visibility(V)
    basis = haar_unitaries(3, 1, rng)[0]
    base_seed = int(rng.integers(2**32))

    def trial(k):
        r = np.random.default_rng([base_seed, k])
        t1 = run_phase_conditioned(c.theta, basis, delta, shots, r, order="qo_first")
        t2 = run_phase_conditioned(c.theta, basis, delta, shots, r, order="wwd_first")
        z = two_sample_z(joint_frequencies(t1), joint_frequencies(t2), shots, shots)
        return float(np.nanmax(np.abs(z)))

    passed, z, attempts = with_retry(trial)
    # tolerance is the 3 sigma soft bound, scaled like the others
    return z if passed else float("inf"), 3.0 * scale, f"{shots} shots per order, attempts={attempts}"


def _circuit_model(scale, rng, full):
    err = 0.0
    for theta in (0.0, np.pi / 6, np.pi / 4, np.pi / 3, np.pi / 2):
        amps = to_model_amplitudes(prepare(theta))[0]
        err = max(err, float(np.max(np.abs(amps - joint_state(DetectorCoupling.from_theta(theta))))))
    return err, 1e-12 * scale, ""


CHECKS = {
    "closed_forms": _closed_forms,
    "phase_closed_forms": _phase_closed_forms,
    "duality_bound": _duality_bound,
    "phase_average_identity": _phase_average_identity,
    "simplified_closed_form": _simplified_closed_form,
    "order_invariance_analytic": _order_invariance_analytic,
    "order_invariance_mc": _order_invariance_mc,
    "circuit_model_equivalence": _circuit_model,
}


def run_checks(seed: int = 0, full: bool = False, tolerance_scale: float = 1.0) -> list[CheckResult]:
    """Run every invariant check. ``tolerance_scale`` multiplies all tolerances."""
    results = []
    for i, (name, fn) in enumerate(CHECKS.items()):
        rng = np.random.default_rng([seed, i])
        t0 = time.perf_counter()
        err, tol, detail = fn(tolerance_scale, rng, full)
        err = float(err)
        results.append(CheckResult(name, bool(err <= tol), err, float(tol), detail,
                                   time.perf_counter() - t0))
    return results


def report(results, seed: int, full: bool) -> dict:
    """JSON-ready report. Timings are left out so reports are reproducible."""
    return {
        "mode": "full" if full else "quick",
        "seed": seed,
        "passed": all(r.passed for r in results),
        "checks": [{k: v for k, v in asdict(r).items() if k != "seconds"} for r in results],
    }
