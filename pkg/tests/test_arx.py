import math

import numpy as np
import pytest

from ckks_ident.arx import (
    ARXModel,
    SignalHistory,
    characteristic_roots,
    check_excitation,
    companion_matrix,
    compute_G1,
    compute_G2,
    decay_constant,
    generate_signals,
    regressor,
    simulate,
    spectral_radius,
    validate_params,
)
from ckks_ident.config import REFERENCE_THETA0
from ckks_ident.errors import DomainError, ParameterError
from ckks_ident.sampling import make_rng

DELTA = 2.0 ** 40


def _random_stable_model(rng, p):
    """Real roots inside the unit disc, b drawn freely."""
    roots = rng.uniform(-0.95, 0.95, p)
    a = -np.poly(roots)[1:]
    return ARXModel(tuple(a), tuple(rng.uniform(-2, 2, 2)))


def _lemma_holds(model, k_max=200):
    A = companion_matrix(model)
    rho = spectral_radius(model)
    c = decay_constant(model)
    power = np.eye(model.p)
    for k in range(k_max + 1):
        if np.linalg.norm(power, 2) > c * ((rho + 1) / 2) ** k * (1 + 1e-9):
            return False
        power = power @ A
    return True


class TestModel:
    def test_orders(self, reference_model):
        assert (reference_model.p, reference_model.q, reference_model.dim) == (3, 6, 9)

    def test_order_mismatch(self):
        with pytest.raises(ParameterError):
            ARXModel.from_dict({'p': 2, 'a': [0.5], 'b': [1.0]})

    def test_needs_both_orders(self):
        with pytest.raises(ParameterError):
            ARXModel((), (1.0,))

    def test_dict_roundtrip(self, reference_model):
        assert ARXModel.from_dict(reference_model.to_dict()) == reference_model


class TestSignals:
    def test_simulate_by_hand(self):
        model = ARXModel((0.5,), (1.0, 2.0))
        y = simulate(model, [1.0, 0.0, 0.0], [0.0, 0.1, 0.0])
        # y1 = u0, y2 = 0.5 y1 + 2 u0 + w2, y3 = 0.5 y2 + 2 u1
        np.testing.assert_allclose(y, [1.0, 2.6, 1.3])

    def test_regressor_zero_prehistory(self):
        history = SignalHistory(np.array([0.0, 1.0, 2.0]), np.array([3.0, 4.0]), np.zeros(2), 2, 3)
        np.testing.assert_array_equal(regressor(history, 0), [0.0, 0.0, 3.0, 0.0, 0.0])
        np.testing.assert_array_equal(regressor(history, 1), [1.0, 0.0, 4.0, 3.0, 0.0])

    def test_generated_history_is_consistent(self, reference_model):
        history = generate_signals(reference_model, 50, make_rng(2024))
        assert history.steps == 50
        for k in range(50):
            expected = history.regressor(k) @ reference_model.theta + history.w[k]
            assert math.isclose(history.output(k), expected, abs_tol=1e-9)
        assert np.all((history.u >= 1) & (history.u <= 5))
        assert np.all(np.abs(history.w) <= 5)

    def test_shape_mismatch(self, reference_model):
        with pytest.raises(ParameterError):
            simulate(reference_model, [1.0, 2.0], [0.0])


class TestStability:
    def test_reference_model_radius(self, reference_model):
        # z^3 - 1.3 z^2 + 0.6 z - 0.1 = (z - 0.5)(z^2 - 0.8 z + 0.2)
        assert math.isclose(spectral_radius(reference_model), 0.5, rel_tol=1e-9)
        assert len(characteristic_roots(reference_model)) == 3

    def test_companion_matrix(self, reference_model):
        A = companion_matrix(reference_model)
        np.testing.assert_array_equal(A[0], [1.3, -0.6, 0.1])
        np.testing.assert_array_equal(A[1:], [[1, 0, 0], [0, 1, 0]])

    def test_zero_root_kept(self):
        model = ARXModel((0.5, 0.0), (1.0,))
        roots = characteristic_roots(model)
        assert len(roots) == 2
        assert math.isclose(spectral_radius(model), 0.5)

    def test_decay_lemma_reference_model(self, reference_model):
        assert decay_constant(reference_model) >= 1
        assert _lemma_holds(reference_model)

    def test_decay_lemma_random_models(self):
        rng = make_rng(99)
        for i in range(20):
            assert _lemma_holds(_random_stable_model(rng, 1 + i % 4))

    def test_unstable_rejected(self):
        with pytest.raises(DomainError):
            decay_constant(ARXModel((1.1,), (1.0,)))

    def test_G1_G2(self, reference_model):
        G1 = compute_G1(reference_model)
        assert math.isfinite(G1) and G1 > reference_model.L
        G2 = compute_G2(G1, 8192, 18491, DELTA, 7.0)
        assert G2 > G1 ** 2 * 8

    def test_G1_closed_form(self):
        # rho = 0, c = 1, gamma = 1/2: G1 = L/2 + 2 sqrt(2) L
        G1 = compute_G1(ARXModel((0.0,), (0.0,), 1.0))
        assert math.isclose(G1, 0.5 + 2 * math.sqrt(2), rel_tol=1e-12)

    def test_G1_scales_with_L(self, reference_model):
        doubled = ARXModel(reference_model.a, reference_model.b, 2 * reference_model.L)
        assert math.isclose(compute_G1(doubled), 2 * compute_G1(reference_model), rel_tol=1e-12)

    @pytest.mark.slow
    def test_signals_stay_below_G1(self, reference_model):
        G1 = compute_G1(reference_model)
        history = generate_signals(reference_model, 100_000, make_rng(2024))
        # |phi_k|_inf is the larger of the lagged |y| and |u|
        assert np.max(np.abs(history.y)) <= G1
        assert np.max(np.abs(history.u)) <= G1


class TestValidation:
    def _report(self, model, N=8192, **kw):
        from ckks_ident.ckks import resolve_modulus
        from ckks_ident.config import REFERENCE_MODULUS_FACTORS
        P, _ = resolve_modulus(REFERENCE_MODULUS_FACTORS)
        args = dict(sigma=3.2, gamma=18491, alpha=1e-10, theta_bar=7.0)
        args.update(kw)
        return validate_params(model, N, P, DELTA, theta0=REFERENCE_THETA0,
                               input_range=(1.0, 5.0), noise_range=(-5.0, 5.0), **args)

    def test_reference_configuration(self, reference_model):
        report = self._report(reference_model)
        assert report.verdict('assumption1_stability').passed
        assert report.verdict('ring_capacity').passed
        assert report.verdict('decryption_envelope').passed
        assert report.verdict('assumption2_feasible').passed
        assert report.verdict('assumption4_zero_mean').passed
        assert not report.verdict('truncation').passed
        assert 'truncation' in report.failures
        assert not report.all_passed

    def test_truncation_passes_with_large_gamma(self, reference_model):
        report = self._report(reference_model, gamma=40000)
        assert report.verdict('truncation').passed

    def test_capacity_failure(self, reference_model):
        assert not self._report(reference_model, N=16).verdict('ring_capacity').passed

    def test_unstable_reports_instead_of_raising(self):
        report = self._report(ARXModel((1.2,), (1.0,)), theta_bar=10.0)
        assert not report.verdict('assumption1_stability').passed
        assert not report.verdict('decryption_envelope').passed
        assert report.to_dict()['G1'] is None

    def test_step_size_bound(self, reference_model, caplog):
        with caplog.at_level('WARNING', logger='ckks_ident.arx'):
            report = self._report(reference_model, alpha=1.0)
        assert not report.verdict('assumption6_step_size').passed
        assert any('Step size' in r.getMessage() for r in caplog.records)

    def test_tiny_modulus_fails_envelope(self, reference_model):
        report = validate_params(reference_model, 8192, 3, DELTA, sigma=3.2, gamma=18491, alpha=1e-10,
                                 theta_bar=7.0)
        assert not report.verdict('decryption_envelope').passed
        assert 'decryption_envelope' in report.failures

    def test_report_serializes(self, reference_model):
        data = self._report(reference_model).to_dict()
        assert {v['status'] for v in data['verdicts']} == {'PASS', 'FAIL'}
        assert data['inputs']['N'] == 8192
        assert 'FAIL' in self._report(reference_model).to_text()


def test_excitation(reference_model):
    history = generate_signals(reference_model, 1000, make_rng(2024))
    result = check_excitation(history.regressors(), 200, 1e-3)
    assert result.passed
    assert result.windows == 801
    assert result.min_eigenvalue > 0


def test_excitation_detects_constant_input():
    phi = np.tile([1.0, 1.0], (50, 1))
    assert not check_excitation(phi, 10, 1e-6).passed
