"""Shared fixtures: small rings, key sets and the reference plant."""

import pytest

from ckks_ident.arx import ARXModel
from ckks_ident.ckks import CryptoParams, keygen
from ckks_ident.config import REFERENCE_MODEL, REFERENCE_MODULUS_FACTORS
from ckks_ident.ring import RingParams
from ckks_ident.sampling import make_rng

# Mersenne prime 2^61 - 1
SMALL_PRIME = (1 << 61) - 1


@pytest.fixture
def rng():
    return make_rng(1234)


@pytest.fixture(scope='session')
def ring16():
    return RingParams(16, SMALL_PRIME)


@pytest.fixture(scope='session')
def ring32():
    return RingParams(32, SMALL_PRIME)


@pytest.fixture(scope='session')
def crypto16():
    return CryptoParams.build(16, REFERENCE_MODULUS_FACTORS, h=8)


@pytest.fixture(scope='session')
def keys16(crypto16):
    return keygen(crypto16, make_rng(7))


@pytest.fixture(scope='session')
def crypto64():
    return CryptoParams.build(64, REFERENCE_MODULUS_FACTORS)


@pytest.fixture(scope='session')
def keys64(crypto64):
    return keygen(crypto64, make_rng(7))


@pytest.fixture(scope='session')
def reference_model():
    return ARXModel.from_dict(REFERENCE_MODEL)


@pytest.fixture(scope='session')
def crypto2048():
    return CryptoParams.build(2048, REFERENCE_MODULUS_FACTORS)


@pytest.fixture(scope='session')
def keys2048(crypto2048):
    return keygen(crypto2048, make_rng(11))
