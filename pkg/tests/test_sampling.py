import numpy as np
import pytest
from scipy.stats import chi2

from ckks_ident.errors import ParameterError
from ckks_ident.ring import RingParams
from ckks_ident.sampling import (
    NoiseParams,
    effective_bound,
    make_rng,
    sample_tdg,
    sample_tdg_array,
    sample_tdg_poly,
    sample_ternary_secret,
    sample_zo,
    tdg_pmf,
)


def test_same_seed_same_stream():
    a = sample_tdg_array(3.2, 100, 50, make_rng(5))
    b = sample_tdg_array(3.2, 100, 50, make_rng(5))
    np.testing.assert_array_equal(a, b)


def test_noise_params_validation():
    with pytest.raises(ParameterError):
        NoiseParams(0.0, 10, 4)
    with pytest.raises(ParameterError):
        NoiseParams(3.2, 0, 4)
    with pytest.raises(ParameterError):
        NoiseParams(3.2, 10, 0)


def test_effective_bound():
    assert effective_bound(3.2, 5) == 5
    assert effective_bound(3.2, 18491) == 128


def test_pmf_sums_to_one():
    support, pmf = tdg_pmf(3.2, 18491)
    assert abs(pmf.sum() - 1) < 1e-12
    assert support[0] == -support[-1]
    assert pmf[len(pmf) // 2] == pmf.max()


@pytest.mark.parametrize('method', ['table', 'rejection'])
def test_truncation_respected(method, rng):
    draws = sample_tdg_array(3.2, 2, 5000, rng, method=method)
    assert np.max(np.abs(draws)) <= 2
    assert set(np.unique(draws)) == {-2, -1, 0, 1, 2}


@pytest.mark.parametrize('method', ['table', 'rejection'])
def test_moments_match(method, rng):
    draws = sample_tdg_array(3.2, 18491, 40000, rng, method=method)
    assert abs(draws.mean()) < 0.1
    # Discrete Gaussian variance is within 1e-6 of sigma^2 at this width
    assert abs(draws.var() - 3.2 ** 2) < 0.4


def test_methods_agree_on_histogram(rng):
    support, pmf = tdg_pmf(3.2, 6)
    for method in ('table', 'rejection'):
        draws = sample_tdg_array(3.2, 6, 50000, rng, method=method)
        freq = np.array([(draws == s).mean() for s in support])
        assert np.max(np.abs(freq - pmf)) < 0.01


def _chi_square(draws, support, pmf):
    expected = pmf * len(draws)
    observed = np.array([(draws == s).sum() for s in support], dtype=float)
    keep = expected >= 5
    # Sparse tail cells pooled into one
    obs = np.append(observed[keep], observed[~keep].sum())
    exp = np.append(expected[keep], expected[~keep].sum())
    if exp[-1] == 0:
        obs, exp = obs[:-1], exp[:-1]
    stat = float(((obs - exp) ** 2 / exp).sum())
    return stat, len(exp) - 1


@pytest.mark.parametrize('method', ['table', 'rejection'])
@pytest.mark.parametrize('gamma', [3, 12])
def test_chi_square_band(method, gamma, rng):
    support, pmf = tdg_pmf(3.2, gamma)
    draws = sample_tdg_array(3.2, gamma, 50000, rng, method=method)
    stat, df = _chi_square(draws, support, pmf)
    assert stat < chi2.ppf(0.999, df)


def test_unknown_method(rng):
    with pytest.raises(ParameterError):
        sample_tdg_array(3.2, 10, 4, rng, method='ziggurat')


def test_sample_tdg_scalar(rng):
    x = sample_tdg(3.2, 10, rng)
    assert isinstance(x, int) and abs(x) <= 10


def test_tdg_poly(rng):
    params = RingParams(64, 1 << 40)
    e = sample_tdg_poly(params, NoiseParams(3.2, 8, 4), rng)
    assert e.inf_norm() <= 8


def test_zo_frequencies(rng):
    params = RingParams(4096, 1 << 20)
    coeffs = np.array(sample_zo(params, rng).coeffs)
    assert set(np.unique(coeffs)) <= {-1, 0, 1}
    assert abs((coeffs == 0).mean() - 0.5) < 0.04
    assert abs((coeffs == 1).mean() - 0.25) < 0.04
    assert abs((coeffs == -1).mean() - 0.25) < 0.04


@pytest.mark.parametrize('h', [1, 17, 64])
def test_ternary_secret_weight(h, rng):
    params = RingParams(64, 1 << 20)
    s = sample_ternary_secret(params, h, rng)
    assert sum(1 for c in s.coeffs if c) == h
    assert set(s.coeffs) <= {-1, 0, 1}


def test_ternary_secret_weight_range(rng):
    params = RingParams(16, 1 << 20)
    with pytest.raises(ParameterError):
        sample_ternary_secret(params, 17, rng)
    with pytest.raises(ParameterError):
        sample_ternary_secret(params, 0, rng)


def test_zo_chi_square(rng):
    params = RingParams(8192, 1 << 20)
    coeffs = np.array(sample_zo(params, rng).coeffs)
    stat, df = _chi_square(coeffs, np.array([-1, 0, 1]), np.array([0.25, 0.5, 0.25]))
    assert df == 2
    assert stat < chi2.ppf(0.999, df)
