import warnings

import numpy as np
import pytest

from whichway.circuit import (
    QO,
    WWD,
    CircuitState,
    ShotTally,
    apply_circuit,
    apply_gate,
    conditional_estimates,
    controlled_ry,
    embed_wwd_basis,
    feedforward_estimate,
    guessing_estimates,
    hadamard,
    joint_frequencies,
    measure,
    pauli_x,
    phase,
    prepare,
    run_feedforward_demo,
    run_guessing_game,
    run_phase_conditioned,
    screen_gates,
    theta_from_visibility,
    to_model_amplitudes,
)
from whichway.errors import ConsistencyError, DomainError, ShotStarvationWarning
from whichway.feedforward import OptimizerConfig, ff_average, ff_curve, protocol_curve
from whichway.knowledge import canonical_basis, natural_basis
from whichway.linalg import haar_unitaries
from whichway.model import DetectorCoupling, joint_state


def test_hadamard_on_zero():
    s = apply_gate(CircuitState.zeros(), hadamard(QO))
    expected = np.zeros(8)
    expected[[0, 4]] = 2**-0.5
    np.testing.assert_allclose(s.amplitudes[0], expected, atol=1e-15)


def test_x_then_controlled_rotation():
    s = apply_circuit(CircuitState.zeros(), [pauli_x(QO), controlled_ry(QO, 1, np.pi)])
    # R_y(pi)|0> = |1> on WWD_a: index 4 + 2 = 6
    np.testing.assert_allclose(np.abs(s.amplitudes[0]), np.eye(8)[6], atol=1e-15)
    # control off: nothing happens
    s = apply_gate(CircuitState.zeros(), controlled_ry(QO, 1, np.pi))
    np.testing.assert_allclose(s.amplitudes[0], np.eye(8)[0])


def test_phase_gate():
    s = apply_circuit(CircuitState.zeros(), [pauli_x(2), phase(2, 0.3)])
    assert s.amplitudes[0, 1] == pytest.approx(np.exp(0.3j))


def test_per_shot_angles():
    angles = np.array([0.0, np.pi])
    s = apply_circuit(CircuitState.zeros(2), [pauli_x(QO), controlled_ry(QO, 2, angles)])
    np.testing.assert_allclose(np.abs(s.amplitudes), [np.eye(8)[4], np.eye(8)[5]], atol=1e-15)
    with pytest.raises(ValueError):
        apply_gate(CircuitState.zeros(3), phase(0, angles))


@pytest.mark.parametrize("bad", [3, -1, 1.0])
def test_invalid_qubit(bad):
    with pytest.raises(ValueError):
        apply_gate(CircuitState.zeros(), hadamard(bad))


def test_gates_preserve_norm():
    rng = np.random.default_rng(0)
    s = CircuitState.zeros(50)
    for _ in range(30):
        q = int(rng.integers(0, 3))
        t = (q + 1) % 3
        g = [hadamard(q), pauli_x(q), phase(q, rng.uniform(0, 7)),
             controlled_ry(q, t, rng.uniform(0, 7))][rng.integers(0, 4)]
        s = apply_gate(s, g)
    np.testing.assert_allclose(s.norms(), 1.0, atol=1e-12)


def test_measure_collapses():
    rng = np.random.default_rng(1)
    s = apply_gate(CircuitState.zeros(2000), hadamard(QO))
    out, post = measure(s, np.eye(2), (QO,), rng, "qo")
    assert abs(out.mean() - 0.5) < 4 * 0.5 / np.sqrt(2000)
    np.testing.assert_allclose(np.abs(post.amplitudes[out == 1]), np.eye(8)[4][None].repeat(
        np.sum(out == 1), 0), atol=1e-15)
    assert post.classical_record[-1][0] == "qo"
    # remeasuring gives the same answer
    again, _ = measure(post, np.eye(2), (QO,), rng)
    np.testing.assert_array_equal(out, again)


def test_measure_rejects_bad_inputs():
    rng = np.random.default_rng(0)
    s = CircuitState.zeros()
    with pytest.raises(ValueError):
        measure(s, np.eye(3), (QO,), rng)
    s.amplitudes *= 2
    with pytest.raises(ConsistencyError):
        measure(s, np.eye(2), (QO,), rng)


def test_preparation_matches_model():
    for V in (0.0, 0.5, 0.9, 1.0):
        theta = theta_from_visibility(V)
        amps = to_model_amplitudes(prepare(theta))[0]
        np.testing.assert_allclose(amps, joint_state(DetectorCoupling.from_visibility(V)),
                                   atol=1e-12)


def test_embed_basis_is_unitary():
    W = haar_unitaries(3, 1, np.random.default_rng(0))[0]
    E = embed_wwd_basis(W)
    np.testing.assert_allclose(E.conj().T @ E, np.eye(4), atol=1e-12)
    assert E[3, 3] == 1


def test_tally():
    t = ShotTally.from_columns(("a", "b"), [0, 1, 1, 2], [1, 1, 1, 0])
    assert t.total == 4 and t.count(a=1) == 2 and t.count(b=1) == 3
    assert t.as_rows() == [[0, 1, 1], [1, 1, 2], [2, 0, 1]]
    assert t.merge(t).count(a=1, b=1) == 4
    with pytest.raises(ValueError):
        t.merge(ShotTally(("x",)))


# -- guessing game ---------------------------------------------------------------


def test_guessing_perfect_detector():
    t = run_guessing_game(np.pi / 2, natural_basis(), 20_000, np.random.default_rng(0))
    est = guessing_estimates(t)
    assert est["k"] == 1.0
    assert est["counts"][0] == 0


def test_guessing_without_detector_is_a_coin():
    t = run_guessing_game(0.0, natural_basis(), 40_000, np.random.default_rng(1))
    est = guessing_estimates(t)
    assert abs(est["k"]) < 4 * est["k_se"] + 1e-12
    assert est["counts"] == [40_000, 0, 0]


def test_guessing_is_independent_of_phase_before_readout():
    theta = theta_from_visibility(0.5)
    rng = np.random.default_rng(2)
    a = guessing_estimates(run_guessing_game(theta, natural_basis(), 100_000, rng))
    b = guessing_estimates(run_guessing_game(theta, natural_basis(), 100_000, rng, pre_phase=1.1))
    z = (a["k"] - b["k"]) / np.hypot(a["k_se"], b["k_se"])
    assert abs(z) < 4


def test_guessing_is_deterministic():
    theta = theta_from_visibility(0.6)
    a = run_guessing_game(theta, natural_basis(), 5000, np.random.default_rng(3))
    b = run_guessing_game(theta, natural_basis(), 5000, np.random.default_rng(3))
    assert a.counts == b.counts


def test_guessing_canonical_statistics():
    V = 0.5
    c = DetectorCoupling.from_visibility(V)
    t = run_guessing_game(c.theta, canonical_basis(c), 200_000, np.random.default_rng(4))
    est = guessing_estimates(t)
    assert abs(est["k"] - np.sqrt(0.75)) < 4 * est["k_se"]


# -- fixed-phase runs --------------------------------------------------------------


def test_port_probability_without_detector():
    t = run_phase_conditioned(0.0, natural_basis(), 0.0, 10_000, np.random.default_rng(5))
    assert t.count(port=0) == 10_000


def test_port_fraction_matches_pattern():
    V, d = 0.5, np.pi / 2
    t = run_phase_conditioned(theta_from_visibility(V), natural_basis(), d, 100_000,
                              np.random.default_rng(6))
    est = conditional_estimates(t)
    p = 0.5 * (1 + V * np.cos(d))
    assert abs(est["port_fraction"] - p) < 4 * np.sqrt(p * (1 - p) / 100_000)


def test_conditional_natural_at_bright_fringe():
    V = 0.5
    t = run_phase_conditioned(theta_from_visibility(V), natural_basis(), 0.0, 100_000,
                              np.random.default_rng(7))
    est = conditional_estimates(t)
    assert abs(est["p"][0] - 2 / 3) < 4 * est["p_se"][0]


def test_order_invariance_of_joint_frequencies():
    theta = theta_from_visibility(0.6)
    W = haar_unitaries(3, 1, np.random.default_rng(8))[0]
    n = 100_000
    a = joint_frequencies(run_phase_conditioned(theta, W, 1.0, n, np.random.default_rng(9)))
    b = joint_frequencies(run_phase_conditioned(theta, W, 1.0, n, np.random.default_rng(10),
                                                order="wwd_first"))
    pooled = 0.5 * (a + b)
    se = np.sqrt(pooled * (1 - pooled) * 2 / n)
    mask = pooled > 0
    assert np.all(np.abs(a - b)[mask] < 4 * se[mask])
    assert np.all(a[:, 3] == 0) and np.all(b[:, 3] == 0)


def test_dark_fringe_is_rejected():
    with pytest.raises(DomainError):
        run_phase_conditioned(0.0, natural_basis(), np.pi, 10, np.random.default_rng(0))


def test_starvation_warning():
    V = 0.999
    with pytest.warns(ShotStarvationWarning):
        run_phase_conditioned(theta_from_visibility(V), natural_basis(), np.pi - 0.01, 200,
                              np.random.default_rng(0))


def test_invalid_order():
    with pytest.raises(ValueError):
        run_phase_conditioned(0.3, natural_basis(), 0.0, 10, np.random.default_rng(0),
                              order="sideways")


def test_screen_projects_on_psi_delta():
    # amplitude of port 0 after the screen gates equals <psi_delta|path>
    d = 0.7
    s = apply_gate(CircuitState.zeros(), hadamard(QO))
    s = apply_circuit(s, screen_gates(d))
    assert abs(s.amplitudes[0, 0]) ** 2 == pytest.approx(0.5 * (1 + np.cos(d)), abs=1e-12)


# -- feed-forward demo --------------------------------------------------------------


def test_feedforward_demo_perfect_detector():
    curve = protocol_curve(0.0, "natural")
    t = run_feedforward_demo(np.pi / 2, curve, 2000, np.random.default_rng(0))
    k, se = feedforward_estimate(t, curve)
    assert k == 1.0 and se == 0.0


def test_feedforward_demo_deterministic():
    curve = protocol_curve(0.5, "simplified")
    th = theta_from_visibility(0.5)
    a = run_feedforward_demo(th, curve, 3000, np.random.default_rng(5))
    b = run_feedforward_demo(th, curve, 3000, np.random.default_rng(5))
    assert a.counts == b.counts


def test_feedforward_demo_rejects_mismatched_curve():
    with pytest.raises(ValueError):
        run_feedforward_demo(0.3, protocol_curve(0.5, "natural"), 10, np.random.default_rng(0))


def test_feedforward_demo_matches_phase_average():
    V = 0.5
    curve = ff_curve(V, OptimizerConfig(samples_per_delta=2000, seed=2))
    t = run_feedforward_demo(theta_from_visibility(V), curve, 200_000, np.random.default_rng(11))
    k, se = feedforward_estimate(t, curve)
    assert t.total == 200_000
    # grid snapping and the trapezoid rule differ by a few 1e-3 at 50 points
    assert abs(k - ff_average(curve)) < 3 * se + 5e-3
    assert k > np.sqrt(1 - V * V)


def test_no_warnings_on_healthy_runs():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        run_phase_conditioned(0.4, natural_basis(), 0.0, 1000, np.random.default_rng(0))
    assert WWD == (1, 2)


def test_z_scores_ignore_rounding_noise_in_stderr():
    from whichway.stats import z_scores

    assert z_scores(0.8660254037844387, 0.8660254037844386, 1e-17) == 0.0
    assert z_scores(0.9, 0.8, 1e-17) == np.inf
    assert z_scores(0.9, 0.8, 0.05) == pytest.approx(2.0)
