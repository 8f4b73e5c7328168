"""
Key and Ciphertext Files
========================

Versioned binary format, little-endian throughout:

  magic    4 bytes   b"CKID"
  version  u16
  kind     u8        see KIND_* below
  N        u32
  P        u16 byte length, then unsigned bytes
  body     kind specific

RingElement payload: u32 coefficient count, then per coefficient a u16 byte
length followed by two's-complement bytes. Full layout in docs/FILE_FORMATS.md.
"""

import io
import json
import logging
import struct
from pathlib import Path
from typing import Tuple, Union

from .ckks import (
    Ciphertext,
    CryptoParams,
    KeySwitchKey,
    PublicKey,
    RotationKeySet,
    SecretKey,
)
from .encoding import Plaintext
from .errors import ParameterMismatchError, SerializationError
from .ring import RingElement, RingParams
from .sampling import NoiseParams

logger = logging.getLogger(__name__)

MAGIC = b"CKID"
FORMAT_VERSION = 1

KIND_SECRET_KEY = 1
KIND_PUBLIC_KEY = 2
KIND_ROTATION_KEYS = 3
KIND_CIPHERTEXT = 4
KIND_PLAINTEXT = 5

KEY_FILES = {
    'secret': 'secret.key',
    'public': 'public.key',
    'rotation': 'rotation.keys',
    'params': 'params.json',
}


class _Writer:
    def __init__(self):
        self.buf = io.BytesIO()

    def pack(self, fmt: str, *values):
        self.buf.write(struct.pack('<' + fmt, *values))

    def bigint(self, value: int, signed: bool):
        length = (value.bit_length() + (8 if signed else 7)) // 8 or 1
        self.pack('H', length)
        self.buf.write(value.to_bytes(length, 'little', signed=signed))

    def element(self, e: RingElement):
        self.pack('I', len(e.coeffs))
        for c in e.coeffs:
            self.bigint(c, signed=True)

    def header(self, kind: int, params: RingParams):
        self.buf.write(MAGIC)
        self.pack('HBI', FORMAT_VERSION, kind, params.N)
        self.bigint(params.P, signed=False)


class _Reader:
    def __init__(self, data: bytes):
        self.view = memoryview(data)
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.view):
            raise SerializationError("Unexpected end of data")
        chunk = bytes(self.view[self.pos:self.pos + n])
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        fmt = '<' + fmt
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def bigint(self, signed: bool) -> int:
        (length,) = self.unpack('H')
        return int.from_bytes(self.take(length), 'little', signed=signed)

    def element(self, params: RingParams) -> RingElement:
        (count,) = self.unpack('I')
        if count != params.N:
            raise SerializationError(f"Element has {count} coefficients, ring has N={params.N}")
        coeffs = tuple(self.bigint(signed=True) for _ in range(count))
        for c in coeffs:
            if not -params.P <= 2 * c < params.P:
                raise SerializationError("Coefficient outside canonical range")
        return RingElement(coeffs, params)

    def header(self, expected_kind: int) -> RingParams:
        if self.take(4) != MAGIC:
            raise SerializationError("Bad magic bytes")
        version, kind, N = self.unpack('HBI')
        if version != FORMAT_VERSION:
            raise SerializationError(f"Unsupported format version {version}")
        if kind != expected_kind:
            raise SerializationError(f"Expected object kind {expected_kind}, found {kind}")
        P = self.bigint(signed=False)
        try:
            return RingParams(N, P)
        except ValueError as e:
            raise SerializationError(f"Invalid ring header: {e}") from e

    def done(self):
        if self.pos != len(self.view):
            raise SerializationError(f"{len(self.view) - self.pos} trailing bytes")


# =============================================================================
# Encoders
# =============================================================================

def dump_secret_key(sk: SecretKey) -> bytes:
    w = _Writer()
    w.header(KIND_SECRET_KEY, sk.s.params)
    w.element(sk.s)
    return w.buf.getvalue()


def dump_public_key(pk: PublicKey) -> bytes:
    w = _Writer()
    w.header(KIND_PUBLIC_KEY, pk.a.params)
    w.element(pk.b)
    w.element(pk.a)
    return w.buf.getvalue()


def dump_rotation_keys(keys: RotationKeySet, params: RingParams) -> bytes:
    w = _Writer()
    w.header(KIND_ROTATION_KEYS, params)
    w.pack('HH', keys.digit_bits, len(keys.keys))
    for r in keys.amounts():
        key = keys.keys[r]
        w.pack('IIH', r, key.galois, len(key.b))
        for e in key.b + key.a:
            w.element(e)
    return w.buf.getvalue()


def dump_ciphertext(ct: Ciphertext) -> bytes:
    w = _Writer()
    w.header(KIND_CIPHERTEXT, ct.params)
    w.pack('dB', ct.scale, len(ct.parts))
    for part in ct.parts:
        w.element(part)
    return w.buf.getvalue()


def dump_plaintext(pt: Plaintext) -> bytes:
    w = _Writer()
    w.header(KIND_PLAINTEXT, pt.poly.params)
    w.pack('d', pt.scale)
    w.element(pt.poly)
    return w.buf.getvalue()


# =============================================================================
# Decoders
# =============================================================================

def load_secret_key(data: bytes) -> SecretKey:
    r = _Reader(data)
    params = r.header(KIND_SECRET_KEY)
    sk = SecretKey(r.element(params))
    r.done()
    return sk


def load_public_key(data: bytes) -> PublicKey:
    r = _Reader(data)
    params = r.header(KIND_PUBLIC_KEY)
    b = r.element(params)
    a = r.element(params)
    r.done()
    return PublicKey(b, a)


def load_rotation_keys(data: bytes) -> RotationKeySet:
    r = _Reader(data)
    params = r.header(KIND_ROTATION_KEYS)
    digit_bits, count = r.unpack('HH')
    keys = {}
    for _ in range(count):
        amount, galois, digits = r.unpack('IIH')
        parts = [r.element(params) for _ in range(2 * digits)]
        keys[amount] = KeySwitchKey(galois, tuple(parts[:digits]), tuple(parts[digits:]))
    r.done()
    return RotationKeySet(digit_bits, keys)


def load_ciphertext(data: bytes) -> Ciphertext:
    r = _Reader(data)
    params = r.header(KIND_CIPHERTEXT)
    scale, nparts = r.unpack('dB')
    parts = tuple(r.element(params) for _ in range(nparts))
    r.done()
    return Ciphertext(parts, scale)


def load_plaintext(data: bytes) -> Plaintext:
    r = _Reader(data)
    params = r.header(KIND_PLAINTEXT)
    (scale,) = r.unpack('d')
    poly = r.element(params)
    r.done()
    return Plaintext(poly, scale)


# =============================================================================
# Key Directories
# =============================================================================

def params_to_dict(params: CryptoParams) -> dict:
    return {
        'N': params.N,
        'P': str(params.P),
        'P_factors': [{'prime': p, 'power': k} for p, k in params.ring.factors],
        'P_bits': params.ring.bits,
        'delta': params.delta,
        'sigma': params.noise.sigma,
        'gamma': params.noise.gamma,
        'h': params.noise.h,
        'digit_bits': params.digit_bits,
        'security_level': params.security_level,
    }


def params_from_dict(data: dict) -> CryptoParams:
    try:
        factors = tuple((int(f['prime']), int(f['power'])) for f in data.get('P_factors', []))
        ring = RingParams(int(data['N']), int(data['P']), factors)
        return CryptoParams(
            ring=ring,
            delta=float(data['delta']),
            noise=NoiseParams(float(data['sigma']), int(data['gamma']), int(data['h'])),
            digit_bits=int(data['digit_bits']),
            security_level=int(data['security_level']),
        )
    except (KeyError, TypeError) as e:
        raise SerializationError(f"Malformed parameter file: {e}") from e


def save_keys(out_dir: Union[str, Path], params: CryptoParams, sk: SecretKey,
              pk: PublicKey, rot_keys: RotationKeySet) -> dict:
    """Write the key set and parameters into out_dir. Returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {name: out / fname for name, fname in KEY_FILES.items()}
    paths['secret'].write_bytes(dump_secret_key(sk))
    paths['public'].write_bytes(dump_public_key(pk))
    paths['rotation'].write_bytes(dump_rotation_keys(rot_keys, params.ring))
    paths['params'].write_text(json.dumps(params_to_dict(params), indent=2))
    logger.info(f"Wrote key set to {out}")
    return {name: str(p) for name, p in paths.items()}


def load_keys(key_dir: Union[str, Path]) -> Tuple[CryptoParams, SecretKey, PublicKey, RotationKeySet]:
    src = Path(key_dir)
    try:
        params = params_from_dict(json.loads((src / KEY_FILES['params']).read_text()))
        sk = load_secret_key((src / KEY_FILES['secret']).read_bytes())
        pk = load_public_key((src / KEY_FILES['public']).read_bytes())
        rot_keys = load_rotation_keys((src / KEY_FILES['rotation']).read_bytes())
    except OSError as e:
        raise SerializationError(f"Cannot read key set from {src}: {e}") from e
    for name, element in (('secret', sk.s), ('public', pk.a)):
        if element.params != params.ring:
            raise ParameterMismatchError(f"{name} key does not match {KEY_FILES['params']}")
    return params, sk, pk, rot_keys
