import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from belltime import observables as ob
from belltime.qcore import H, V, pauli, product_state, singlet

from oracles import singlet_correlation

angle = st.floats(-math.pi, math.pi, allow_nan=False)
kind = st.sampled_from(["photon", "electron"])


def test_setting_validation():
    with pytest.raises(ValueError):
        ob.AnalyzerSetting(0.0, "neutron")
    with pytest.raises(ValueError):
        ob.AnalyzerSetting(math.inf)
    with pytest.raises(ValueError):
        ob.menu([0, 1, 2])


def test_observable_values():
    a0 = ob.analyzer_observable(ob.AnalyzerSetting.degrees(0))
    a45 = ob.analyzer_observable(ob.AnalyzerSetting.degrees(45))
    e90 = ob.analyzer_observable(ob.AnalyzerSetting.degrees(90, "electron"))
    assert np.allclose(a0, pauli("z"))
    assert np.allclose(a45, pauli("x"))
    assert np.allclose(e90, pauli("x"))


@given(angle, angle, kind)
def test_commutator_closed_form(a, b, k):
    s1, s2 = ob.AnalyzerSetting(a, k), ob.AnalyzerSetting(b, k)
    diff = ob.commutator(ob.analyzer_observable(s1), ob.analyzer_observable(s2)) \
        - ob.commutator_closed_form(s1, s2)
    assert np.max(np.abs(diff)) < 1e-12


@given(angle, angle, angle, angle, kind, kind)
def test_bell_operator_identity_and_bound(a, a2, b, b2, ka, kb):
    ops = ob.bell_operator(ob.AnalyzerSetting(a, ka), ob.AnalyzerSetting(a2, ka),
                           ob.AnalyzerSetting(b, kb), ob.AnalyzerSetting(b2, kb))
    assert ob.bell_squared_residual(ops) < 1e-12
    assert ob.max_abs_eigenvalue(ops.S) <= ob.CIRELSON + 1e-12


def test_bell_operator_rejects_mixed_side():
    with pytest.raises(ValueError):
        ob.bell_operator(ob.AnalyzerSetting(0, "photon"), ob.AnalyzerSetting(0, "electron"),
                         ob.AnalyzerSetting(0), ob.AnalyzerSetting(0))


@given(angle, angle, kind)
def test_singlet_correlation_closed_form(a, b, k):
    E = ob.correlation(singlet(), ob.AnalyzerSetting(a, k), ob.AnalyzerSetting(b, k))
    assert E == pytest.approx(singlet_correlation(a, b, ob.ANGLE_MULTIPLIER[k]), abs=1e-12)


@pytest.mark.parametrize("k", ["photon", "electron"])
def test_optimal_menu_reaches_cirelson(k):
    ops = ob.bell_operator(*ob.optimal_menu(k))
    chsh = ob.chsh_expectation(singlet(), ops)
    assert chsh.chsh_lhs == pytest.approx(ob.CIRELSON, abs=1e-12)
    assert ob.s_squared_expectation(singlet(), ops) == pytest.approx(8.0, abs=1e-12)
    assert ob.s_squared_expectation(product_state(H, V), ops) == pytest.approx(4.0, abs=1e-12)


def test_positive_bob_angles_are_not_optimal():
    # with b, b' = +22.5, +67.5 the commutator signs cancel the singlet excess
    ops = ob.bell_operator(*ob.menu([0, 45, 22.5, 67.5]))
    assert ob.chsh_expectation(singlet(), ops).value == pytest.approx(0.0, abs=1e-12)
    assert ob.s_squared_expectation(singlet(), ops) == pytest.approx(0.0, abs=1e-12)


def test_chsh_value_is_bounded_by_s_squared():
    rng = np.random.default_rng(0)
    for _ in range(200):
        ops = ob.bell_operator(*(ob.random_setting(rng, "photon") for _ in range(4)))
        val = ob.chsh_expectation(singlet(), ops).value
        assert val ** 2 <= ob.s_squared_expectation(singlet(), ops) + 1e-12


def test_sample_s_squared_matches_analytic():
    ops = ob.bell_operator(*ob.optimal_menu())
    rng = np.random.default_rng(5)
    for state, exact in ((product_state(H, V), 4.0), (singlet(), 8.0)):
        mean, se = ob.sample_s_squared(state, ops, 20_000, rng)
        assert abs(mean - exact) <= max(3 * se, 1e-12)
    # a state without perfect sigma_y sigma_y correlation gives spread
    mean, se = ob.sample_s_squared(product_state(H, H), ops, 20_000, rng)
    assert se > 0 and abs(mean - 4.0) <= 3 * se


def test_sweeps_report_small_residuals():
    rng = np.random.default_rng(1)
    sweep = ob.s_squared_identity_sweep(300, rng)
    assert sweep["s_squared_identity_residual"] < 1e-12
    assert sweep["max_abs_eig_S"] <= ob.CIRELSON + 1e-12
    assert ob.commutator_sweep(300, rng, "electron") < 1e-12


def test_commutator_examples():
    z, x, y = pauli("z"), pauli("x"), pauli("y")
    assert np.allclose(ob.commutator(z, z), 0)
    assert np.allclose(ob.commutator(z, x), 2j * y)
    a0 = ob.analyzer_observable(ob.AnalyzerSetting(0.0))
    assert np.allclose(ob.commutator(a0, ob.analyzer_observable(ob.AnalyzerSetting.degrees(45))), 2j * y)
    e90 = ob.analyzer_observable(ob.AnalyzerSetting.degrees(90, "electron"))
    assert np.allclose(ob.commutator(pauli("z"), e90), 2j * y)
    with pytest.raises(ValueError, match="dimension"):
        ob.commutator(z, np.eye(4))


@given(angle, angle, angle, kind)
def test_equal_alice_settings_collapse_s_squared(a, b, b2, k):
    ops = ob.bell_operator(ob.AnalyzerSetting(a, k), ob.AnalyzerSetting(a, k),
                           ob.AnalyzerSetting(b, k), ob.AnalyzerSetting(b2, k))
    assert np.allclose(np.linalg.eigvalsh(ops.S @ ops.S), 4, atol=1e-12)
    assert ob.s_squared_expectation(singlet(), ops) == pytest.approx(4.0, abs=1e-12)


@given(angle, angle, angle, angle)
def test_s_squared_spectrum_and_consistency(a, a2, b, b2):
    from belltime.qcore import expectation
    ops = ob.bell_operator(*(ob.AnalyzerSetting(t) for t in (a, a2, b, b2)))
    eig = np.linalg.eigvalsh(ops.S @ ops.S)
    assert eig.min() >= -1e-12 and eig.max() <= 8 + 1e-12
    direct = ob.s_squared_expectation(singlet(), ops)
    via = 4 - expectation(singlet(), ops.commutator_product).real
    assert abs(direct - via) < 1e-12
    assert abs(ob.chsh_expectation(product_state(H, V), ops).value) <= 2 + 1e-12


def test_chsh_at_degenerate_menu():
    ops = ob.bell_operator(*ob.menu([0, 0, 0, 0]))
    chsh = ob.chsh_expectation(singlet(), ops)
    assert chsh.value == pytest.approx(-2.0, abs=1e-12)


def test_chsh_dimension_check():
    from belltime.qcore import QuantumState
    with pytest.raises(ValueError, match="dimension"):
        ob.chsh_expectation(QuantumState(np.array([1.0, 0.0])), ob.bell_operator(*ob.optimal_menu()))
