import json

import numpy as np
import pytest

from ckks_ident.ckks import decrypt, encrypt
from ckks_ident.encoding import decode, encode_real
from ckks_ident.errors import ParameterMismatchError, SerializationError
from ckks_ident.serialization import (
    KEY_FILES,
    MAGIC,
    dump_ciphertext,
    dump_plaintext,
    dump_public_key,
    dump_rotation_keys,
    dump_secret_key,
    load_ciphertext,
    load_keys,
    load_plaintext,
    load_public_key,
    load_rotation_keys,
    load_secret_key,
    params_from_dict,
    params_to_dict,
    save_keys,
)


@pytest.fixture
def ciphertext(crypto16, keys16, rng):
    _, pk, _ = keys16
    pt = encode_real([1.0, -2.0, 3.5], 'zero', crypto16.delta, crypto16.basis, crypto16.ring, rng)
    return encrypt(pt, pk, crypto16.noise, rng)


def test_ciphertext_roundtrip(ciphertext):
    data = dump_ciphertext(ciphertext)
    assert data.startswith(MAGIC)
    assert load_ciphertext(data) == ciphertext


def test_key_roundtrip(crypto16, keys16):
    sk, pk, rot_keys = keys16
    assert load_secret_key(dump_secret_key(sk)) == sk
    assert load_public_key(dump_public_key(pk)) == pk
    assert load_rotation_keys(dump_rotation_keys(rot_keys, crypto16.ring)) == rot_keys


def test_plaintext_roundtrip(crypto16, rng):
    pt = encode_real([0.25], 'broadcast', crypto16.delta, crypto16.basis, crypto16.ring, rng)
    assert load_plaintext(dump_plaintext(pt)) == pt


def test_truncated(ciphertext):
    data = dump_ciphertext(ciphertext)
    with pytest.raises(SerializationError):
        load_ciphertext(data[:-3])


def test_trailing_bytes(ciphertext):
    with pytest.raises(SerializationError):
        load_ciphertext(dump_ciphertext(ciphertext) + b'\x00')


def test_bad_magic(ciphertext):
    data = dump_ciphertext(ciphertext)
    with pytest.raises(SerializationError):
        load_ciphertext(b'XXXX' + data[4:])


def test_wrong_kind(keys16):
    sk, _, _ = keys16
    with pytest.raises(SerializationError):
        load_public_key(dump_secret_key(sk))


def test_params_dict(crypto64):
    restored = params_from_dict(json.loads(json.dumps(params_to_dict(crypto64))))
    assert restored == crypto64
    assert restored.ring.factors == crypto64.ring.factors


def test_params_dict_missing_field(crypto64):
    data = params_to_dict(crypto64)
    del data['gamma']
    with pytest.raises(SerializationError):
        params_from_dict(data)


def test_key_directory(tmp_path, crypto16, keys16, ciphertext):
    paths = save_keys(tmp_path / 'keys', crypto16, *keys16)
    assert set(paths) == set(KEY_FILES)
    params, sk, pk, rot_keys = load_keys(tmp_path / 'keys')
    assert params == crypto16
    assert (sk, pk, rot_keys) == keys16
    slots = decode(decrypt(ciphertext, sk), params.basis)
    np.testing.assert_allclose(slots[:3].real, [1.0, -2.0, 3.5], atol=1e-6)


def test_key_directory_mismatch(tmp_path, crypto16, crypto64, keys16):
    save_keys(tmp_path, crypto16, *keys16)
    (tmp_path / KEY_FILES['params']).write_text(json.dumps(params_to_dict(crypto64)))
    with pytest.raises(ParameterMismatchError):
        load_keys(tmp_path)


def test_missing_directory(tmp_path):
    with pytest.raises(SerializationError):
        load_keys(tmp_path / 'absent')
