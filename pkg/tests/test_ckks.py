import math

import numpy as np
import pytest
import sympy

from ckks_ident.ckks import (
    Ciphertext,
    CryptoParams,
    decrypt,
    encrypt,
    fresh_noise_bound,
    galois_element,
    hom_add,
    hom_dot,
    hom_mult,
    hom_neg,
    keygen,
    pt_mult,
    resolve_modulus,
    rotate,
    rotation_amounts,
    slot_error_bound,
    trivial_encrypt,
)
from ckks_ident.encoding import decode, encode, encode_real
from ckks_ident.errors import ParameterError, RotationKeyError, ScaleMismatchError, UnsupportedDepthError
from ckks_ident.sampling import make_rng


def _encrypt(z, delta, params, pk, rng):
    return encrypt(encode(z, delta, params.basis, params.ring, rng), pk, params.noise, rng)


def _decrypt(ct, sk, params):
    return decode(decrypt(ct, sk), params.basis)


def _slots(rng, n):
    return rng.uniform(-5, 5, n) + 1j * rng.uniform(-5, 5, n)


class TestParameters:
    def test_resolve_modulus_forms(self):
        assert resolve_modulus([(7, 2), {'prime': 3, 'power': 1}]) == (147, ((7, 2), (3, 1)))

    def test_prime_bits_is_largest_prime_below(self):
        P, ((p, k),) = resolve_modulus([{'prime_bits': 40, 'power': 3}])
        assert sympy.isprime(p) and p < 2 ** 40 and sympy.nextprime(p) > 2 ** 40
        assert P == p ** 3

    def test_reference_modulus_size(self, crypto64):
        assert 235 <= crypto64.ring.bits <= 240

    def test_empty_or_bad_factors(self):
        with pytest.raises(ParameterError):
            resolve_modulus([])
        with pytest.raises(ParameterError):
            resolve_modulus([{'power': 2}])

    def test_secret_weight_above_n_rejected(self):
        with pytest.raises(ParameterError):
            CryptoParams.build(16, [(97, 1)], h=64)
        assert CryptoParams.build(16, [(97, 1)], h=16).noise.h == 16

    def test_rotation_amounts(self):
        assert rotation_amounts(64) == [1, 2, 4, 8, 16]
        assert galois_element(1, 64) == 5
        assert galois_element(3, 64) == 125


class TestKeys:
    def test_secret_weight(self, crypto64, keys64):
        sk, _, _ = keys64
        assert sk.weight == crypto64.noise.h
        assert set(sk.s.coeffs) <= {-1, 0, 1}

    def test_public_key_relation(self, crypto64, keys64):
        sk, pk, _ = keys64
        e0 = pk.b + pk.a * sk.s
        assert e0.inf_norm() <= crypto64.noise.gamma

    def test_rotation_keys_present(self, crypto64, keys64):
        _, _, rot_keys = keys64
        assert rot_keys.amounts() == rotation_amounts(64)
        assert len(rot_keys.get(1).b) == crypto64.digit_count

    def test_keygen_deterministic(self, crypto16):
        a = keygen(crypto16, make_rng(3))
        b = keygen(crypto16, make_rng(3))
        assert a == b


class TestEncryption:
    def test_roundtrip_error_bound(self, crypto64, keys64, rng):
        sk, pk, _ = keys64
        z = _slots(rng, 32)
        err = np.max(np.abs(_decrypt(_encrypt(z, crypto64.delta, crypto64, pk, rng), sk, crypto64) - z))
        assert err <= slot_error_bound(64, crypto64.noise.gamma, crypto64.delta)

    def test_fresh_noise_within_bound(self, crypto64, keys64, rng):
        sk, pk, _ = keys64
        pt = encode(np.zeros(32), crypto64.delta, crypto64.basis, crypto64.ring, rng)
        noise = decrypt(encrypt(pt, pk, crypto64.noise, rng), sk).poly - pt.poly
        assert noise.inf_norm() <= fresh_noise_bound(64, crypto64.noise.gamma)

    def test_decryption_error_is_zero_mean(self, crypto64, keys64, rng):
        sk, pk, _ = keys64
        pt = encode(_slots(rng, 32), crypto64.delta, crypto64.basis, crypto64.ring, rng)
        clean = decode(pt, crypto64.basis)
        errors = np.array([
            decode(decrypt(encrypt(pt, pk, crypto64.noise, rng), sk), crypto64.basis) - clean
            for _ in range(1000)
        ])
        for part in (errors.real, errors.imag):
            stderr = part.std(axis=0, ddof=1) / np.sqrt(len(part))
            assert np.all(np.abs(part.mean(axis=0)) <= 4 * stderr)

    def test_trivial_encrypt(self, crypto64, keys64, rng):
        sk, _, _ = keys64
        pt = encode_real([1.0, 2.0], 'zero', crypto64.delta, crypto64.basis, crypto64.ring, rng)
        assert decrypt(trivial_encrypt(pt), sk) == pt

    def test_degree_three_rejected(self, keys64):
        sk, pk, _ = keys64
        with pytest.raises(UnsupportedDepthError):
            decrypt(Ciphertext((pk.a,) * 4, 1.0), sk)
        with pytest.raises(UnsupportedDepthError):
            Ciphertext((pk.a,), 1.0)


class TestHomomorphic:
    def test_add_and_neg(self, crypto64, keys64, rng):
        sk, pk, _ = keys64
        z1, z2 = _slots(rng, 32), _slots(rng, 32)
        c1 = _encrypt(z1, crypto64.delta, crypto64, pk, rng)
        c2 = _encrypt(z2, crypto64.delta, crypto64, pk, rng)
        np.testing.assert_allclose(_decrypt(hom_add(c1, c2), sk, crypto64), z1 + z2, atol=1e-6)
        np.testing.assert_allclose(_decrypt(hom_neg(c1), sk, crypto64), -z1, atol=1e-6)

    def test_double_negation_is_exact(self, crypto64, keys64, rng):
        _, pk, _ = keys64
        ct = _encrypt(_slots(rng, 32), crypto64.delta, crypto64, pk, rng)
        assert hom_neg(hom_neg(ct)) == ct

    def test_add_scale_mismatch(self, crypto64, keys64, rng):
        _, pk, _ = keys64
        c1 = _encrypt(np.ones(32), crypto64.delta, crypto64, pk, rng)
        c2 = _encrypt(np.ones(32), crypto64.delta ** 2, crypto64, pk, rng)
        with pytest.raises(ScaleMismatchError):
            hom_add(c1, c2)

    def test_mult_is_degree_two(self, crypto64, keys64, rng):
        sk, pk, _ = keys64
        z1, z2 = _slots(rng, 32), _slots(rng, 32)
        prod = hom_mult(_encrypt(z1, crypto64.delta, crypto64, pk, rng),
                        _encrypt(z2, crypto64.delta, crypto64, pk, rng))
        assert prod.degree == 2
        assert math.isclose(prod.scale, crypto64.delta ** 2)
        np.testing.assert_allclose(_decrypt(prod, sk, crypto64), z1 * z2, atol=1e-5)

    def test_add_pads_degree(self, crypto64, keys64, rng):
        sk, pk, _ = keys64
        z1, z2, z3 = _slots(rng, 32), _slots(rng, 32), _slots(rng, 32)
        d = crypto64.delta
        prod = hom_mult(_encrypt(z1, d, crypto64, pk, rng), _encrypt(z2, d, crypto64, pk, rng))
        total = hom_add(_encrypt(z3, d * d, crypto64, pk, rng), prod)
        np.testing.assert_allclose(_decrypt(total, sk, crypto64), z1 * z2 + z3, atol=1e-5)

    def test_no_second_multiplication(self, crypto64, keys64, rng):
        _, pk, _ = keys64
        c = _encrypt(np.ones(32), crypto64.delta, crypto64, pk, rng)
        with pytest.raises(UnsupportedDepthError):
            hom_mult(hom_mult(c, c), c)

    def test_pt_mult(self, crypto64, keys64, rng):
        sk, pk, _ = keys64
        z1, z2 = _slots(rng, 32), _slots(rng, 32)
        pt = encode(z1, crypto64.delta, crypto64.basis, crypto64.ring, rng)
        out = pt_mult(pt, _encrypt(z2, crypto64.delta, crypto64, pk, rng))
        np.testing.assert_allclose(_decrypt(out, sk, crypto64), z1 * z2, atol=1e-5)

    @pytest.mark.parametrize('r', [1, 2, 3, 5, 7, 8, 11])
    def test_rotate(self, r, crypto16, keys16, rng):
        sk, pk, rot_keys = keys16
        z = _slots(rng, 8)
        out = rotate(_encrypt(z, crypto16.delta, crypto16, pk, rng), r, rot_keys)
        np.testing.assert_allclose(_decrypt(out, sk, crypto16), np.roll(z, -r), atol=1e-2)

    @pytest.mark.parametrize('r', [1, 3, 6])
    def test_rotation_cycle(self, r, crypto16, keys16, rng):
        sk, pk, rot_keys = keys16
        z = _slots(rng, 8)
        ct = _encrypt(z, crypto16.delta, crypto16, pk, rng)
        back = rotate(rotate(ct, r, rot_keys), 8 - r, rot_keys)
        np.testing.assert_allclose(_decrypt(back, sk, crypto16), z, atol=1e-2)

    def test_rotate_missing_key(self, crypto16, rng):
        sk, pk, rot_keys = keygen(crypto16, make_rng(2), rotations=[1])
        ct = _encrypt(np.ones(8), crypto16.delta, crypto16, pk, rng)
        rotate(ct, 1, rot_keys)
        with pytest.raises(RotationKeyError):
            rotate(ct, 2, rot_keys)

    def test_hom_dot_replicates_inner_product(self, crypto64, keys64, rng):
        sk, pk, rot_keys = keys64
        theta = rng.uniform(-3, 3, 9)
        phi = rng.uniform(-5, 5, 9)
        d = crypto64.delta
        pt = encode_real(theta, 'zero', d, crypto64.basis, crypto64.ring, rng)
        ct = encrypt(encode_real(phi, 'zero', d, crypto64.basis, crypto64.ring, rng), pk, crypto64.noise, rng)
        slots = _decrypt(hom_dot(pt, ct, rot_keys), sk, crypto64)
        np.testing.assert_allclose(slots.real, np.full(32, theta @ phi), atol=1e-5)
        assert np.max(np.abs(slots.imag)) < 1e-5


@pytest.mark.slow
class TestDeskScale:
    """100 random cases per operation at N=2048."""

    CASES = 100
    TOLERANCE = 1e-3

    def test_add_mult_within_bounds(self, crypto2048, keys2048, rng):
        params, (sk, pk, _) = crypto2048, keys2048
        bound = slot_error_bound(params.N, params.noise.gamma, params.delta)
        for _ in range(self.CASES):
            z1, z2 = _slots(rng, 1024), _slots(rng, 1024)
            c1 = _encrypt(z1, params.delta, params, pk, rng)
            c2 = _encrypt(z2, params.delta, params, pk, rng)
            assert np.max(np.abs(_decrypt(hom_add(c1, c2), sk, params) - (z1 + z2))) <= 2 * bound
            assert np.max(np.abs(_decrypt(hom_mult(c1, c2), sk, params) - z1 * z2)) <= self.TOLERANCE

    def test_dot(self, crypto2048, keys2048, rng):
        params, (sk, pk, rot_keys) = crypto2048, keys2048
        for _ in range(self.CASES):
            theta, phi = rng.uniform(-7, 7, 9), rng.uniform(-5, 5, 9)
            pt = encode_real(theta, 'zero', params.delta, params.basis, params.ring, rng)
            ct = encrypt(encode_real(phi, 'zero', params.delta, params.basis, params.ring, rng),
                         pk, params.noise, rng)
            slots = _decrypt(hom_dot(pt, ct, rot_keys), sk, params)
            assert np.max(np.abs(slots - theta @ phi)) <= self.TOLERANCE
