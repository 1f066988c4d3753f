import numpy as np
import pytest
from scipy import stats
from scipy.integrate import quad

from whichway.errors import DomainError
from whichway.linalg import haar_unitaries
from whichway.model import (
    DetectorCoupling,
    conditional_wwd_state,
    joint_state,
    make_coupling,
    pattern,
    rho_qo,
    rho_wwd,
    sample_delta,
)


def test_coupling_limits():
    c = make_coupling(1.0)
    assert c.alpha == 0 and c.visibility == 0
    c = make_coupling(0.0)
    assert c.alpha == 1 and c.visibility == 1
    assert make_coupling(np.sqrt(0.5)).visibility == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("beta", [-0.1, 1.1, np.nan])
def test_coupling_rejects_out_of_range(beta):
    with pytest.raises(DomainError):
        make_coupling(beta)


@pytest.mark.parametrize("beta", np.linspace(0, 1, 11))
def test_coupling_invariants(beta):
    c = make_coupling(beta)
    assert abs(c.alpha**2 + c.beta**2 - 1) <= 1e-14
    assert abs(c.visibility - (1 - c.beta**2)) <= 1e-14
    s = c.states
    assert abs(np.vdot(s.chi_a, s.chi_b) - c.visibility) <= 1e-14
    assert np.linalg.norm(s.chi_a) == pytest.approx(1, abs=1e-15)


def test_from_theta_matches_controlled_rotation():
    c = DetectorCoupling.from_theta(np.pi / 6)
    assert c.beta == pytest.approx(0.5)
    assert c.alpha == pytest.approx(np.cos(np.pi / 6))


def test_joint_state_limits():
    s = joint_state(make_coupling(1.0))
    np.testing.assert_allclose(s, np.array([[0, 1, 0], [0, 0, 1]]) / np.sqrt(2))
    s = joint_state(make_coupling(0.0))
    np.testing.assert_allclose(s, np.array([[1, 0, 0], [1, 0, 0]]) / np.sqrt(2))


def test_joint_state_half_visibility():
    s = joint_state(make_coupling(np.sqrt(0.5)))
    np.testing.assert_allclose(s, np.array([[0.5, 0.5, 0], [0.5, 0, 0.5]]), atol=1e-15)
    assert np.sum(np.abs(s) ** 2) == pytest.approx(1, abs=1e-14)
    assert np.vdot(s[0], s[1]) * 2 == pytest.approx(0.5, abs=1e-14)


def test_rho_wwd_examples():
    np.testing.assert_allclose(rho_wwd(joint_state(make_coupling(0.0))), np.diag([1, 0, 0]))
    np.testing.assert_allclose(rho_wwd(joint_state(make_coupling(1.0))), np.diag([0, 0.5, 0.5]))
    ab = np.sqrt(0.5) * np.sqrt(0.5) / 2
    expected = np.array([[0.5, ab, ab], [ab, 0.25, 0], [ab, 0, 0.25]])
    np.testing.assert_allclose(rho_wwd(joint_state(make_coupling(np.sqrt(0.5)))), expected,
                               atol=1e-15)


@pytest.mark.parametrize("beta", np.linspace(0, 1, 7))
def test_rho_wwd_is_a_state(beta):
    c = make_coupling(beta)
    rho = rho_wwd(joint_state(c))
    assert np.trace(rho).real == pytest.approx(1, abs=1e-12)
    np.testing.assert_allclose(rho, rho.conj().T, atol=1e-15)
    assert np.linalg.eigvalsh(rho).min() >= -1e-12
    s = c.states
    np.testing.assert_allclose(
        rho, 0.5 * (np.outer(s.chi_a, s.chi_a.conj()) + np.outer(s.chi_b, s.chi_b.conj())),
        atol=1e-15,
    )


def test_rho_qo_examples():
    np.testing.assert_allclose(rho_qo(joint_state(make_coupling(0.0))), 0.5 * np.ones((2, 2)))
    np.testing.assert_allclose(rho_qo(joint_state(make_coupling(1.0))), 0.5 * np.eye(2))
    r = rho_qo(joint_state(make_coupling(np.sqrt(0.5))))
    assert abs(r[0, 1]) == pytest.approx(0.25, abs=1e-15)
    assert np.trace(r).real == pytest.approx(1)


def test_pattern_values():
    assert pattern(0.0, 1.0) == pytest.approx(1 / np.pi)
    assert pattern(np.pi, 1.0) == pytest.approx(0.0, abs=1e-16)
    assert pattern(np.pi / 2, 0.5) == pytest.approx(1 / (2 * np.pi))


@pytest.mark.parametrize("V", np.round(np.linspace(0, 1, 11), 10))
def test_pattern_normalised(V):
    val, _ = quad(pattern, 0, 2 * np.pi, args=(V,), epsabs=1e-13)
    assert val == pytest.approx(1.0, abs=1e-10)


def test_conditional_wwd_state_norms():
    s0 = joint_state(make_coupling(0.0))
    assert np.sum(np.abs(conditional_wwd_state(0.0, s0)) ** 2) == pytest.approx(1.0)
    np.testing.assert_allclose(conditional_wwd_state(np.pi, s0), 0.0, atol=1e-16)
    s = joint_state(make_coupling(np.sqrt(0.5)))
    assert np.sum(np.abs(conditional_wwd_state(np.pi, s)) ** 2) == pytest.approx(0.25)


@pytest.mark.parametrize("V", [0.0, 0.3, 0.9, 1.0])
def test_measurement_order_invariance(V):
    # sum over any complete readout basis of |<psi_d, W_i|Psi>|^2 equals the click probability
    s = joint_state(DetectorCoupling.from_visibility(V))
    rng = np.random.default_rng(5)
    for W in haar_unitaries(3, 20, rng):
        for d in np.linspace(0, 2 * np.pi, 17):
            cond = conditional_wwd_state(d, s)
            total = np.sum(np.abs(W.conj().T @ cond) ** 2)
            assert abs(total - np.sum(np.abs(cond) ** 2)) <= 1e-12
            assert abs(total - 0.5 * (1 + V * np.cos(d))) <= 1e-12


def test_sample_delta_flat_pattern_is_uniform():
    d = sample_delta(0.0, np.random.default_rng(0), size=100_000)
    assert d.min() >= 0 and d.max() < 2 * np.pi
    assert stats.kstest(d, stats.uniform(0, 2 * np.pi).cdf).pvalue > 1e-3


def test_sample_delta_first_moment():
    # integral of cos(d) P(d) over one period is V/2
    d = sample_delta(0.5, np.random.default_rng(1), size=1_000_000)
    c = np.cos(d)
    assert abs(c.mean() - 0.25) < 3 * c.std(ddof=1) / np.sqrt(d.size)


def test_sample_delta_matches_cdf():
    V = 0.8
    d = sample_delta(V, np.random.default_rng(2), size=50_000)
    cdf = lambda x: (x + V * np.sin(x)) / (2 * np.pi)  # noqa: E731
    assert stats.kstest(d, cdf).pvalue > 1e-3


def test_sample_delta_is_deterministic():
    a = sample_delta(0.7, np.random.default_rng(9), size=100)
    b = sample_delta(0.7, np.random.default_rng(9), size=100)
    np.testing.assert_array_equal(a, b)
    assert isinstance(sample_delta(0.7, np.random.default_rng(9)), float)


def test_inverse_cdf_accuracy():
    from whichway.model import inverse_pattern_cdf, pattern_cdf

    u = np.linspace(0, 1, 1001)
    for V in (0.0, 0.5, 1.0):
        d = inverse_pattern_cdf(u, V)
        assert np.max(np.abs(pattern_cdf(d, V) - u)) <= 1e-12
