"""
CKKS Cryptosystem
=================

Key generation, encryption, decryption and the homomorphic operations used
by the identification protocol.

Scheme summary (all arithmetic in R_P):
  sk = (1, s)            s ternary with Hamming weight h
  pk = (b, a)            b = -a*s + e0
  Enc(pt) = (v*b + pt + e1, v*a + e2)
  Dec(c0, c1)     = c0 + c1*s
  Dec(c0, c1, c2) = c0 + c1*s + c2*s^2

There is no relinearization and no rescaling: the single ciphertext product
of the protocol leaves a degree-2 ciphertext that the secret-key holder
decrypts directly, and scales multiply through every product.

Slot rotations use key switching with a base-2^w digit decomposition. Keys
exist for the power-of-two amounts 1, 2, 4, ..., N/4; other amounts are
composed from them.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import sympy

from .config import DEFAULT_DIGIT_BITS, DEFAULT_SECRET_WEIGHT, DEFAULT_SECURITY_LEVEL
from .encoding import EmbeddingBasis, Plaintext, get_basis
from .errors import (
    ParameterError,
    RotationKeyError,
    ScaleMismatchError,
    UnsupportedDepthError,
)
from .ring import (
    RingElement,
    RingParams,
    apply_galois,
    ring_mul,
    ring_mul_small,
    uniform_ring,
)
from .sampling import NoiseParams, sample_tdg_poly, sample_ternary_secret, sample_zo

logger = logging.getLogger(__name__)


# =============================================================================
# Parameters
# =============================================================================

def resolve_modulus(factors: Iterable) -> Tuple[int, Tuple[Tuple[int, int], ...]]:
    """Multiply out a factor list.

    Each factor is {'prime': p, 'power': k}, {'prime_bits': b, 'power': k}
    (largest prime no more than 2^b) or a (p, k) pair.
    """
    P = 1
    resolved = []
    for factor in factors:
        if isinstance(factor, dict):
            power = int(factor.get('power', 1))
            if 'prime' in factor:
                prime = int(factor['prime'])
            elif 'prime_bits' in factor:
                prime = int(sympy.prevprime(2 ** int(factor['prime_bits']) + 1))
            else:
                raise ParameterError(f"Modulus factor needs 'prime' or 'prime_bits': {factor}")
        else:
            prime, power = (int(x) for x in factor)
        if prime < 2 or power < 1:
            raise ParameterError(f"Invalid modulus factor {prime}^{power}")
        if not sympy.isprime(prime):
            logger.warning(f"Modulus factor {prime} is not prime")
        P *= prime ** power
        resolved.append((prime, power))
    if not resolved:
        raise ParameterError("Modulus factor list is empty")
    return P, tuple(resolved)


@dataclass(frozen=True)
class CryptoParams:
    """Everything needed to run the scheme: ring, scale, noise and key-switch width."""

    ring: RingParams
    delta: float
    noise: NoiseParams
    digit_bits: int = DEFAULT_DIGIT_BITS
    security_level: int = DEFAULT_SECURITY_LEVEL

    def __post_init__(self):
        if not self.delta > 0:
            raise ParameterError(f"Scale must be positive, got {self.delta}")
        if self.digit_bits < 1:
            raise ParameterError(f"Digit width must be >= 1, got {self.digit_bits}")
        if self.noise.h > self.ring.N:
            raise ParameterError(f"Secret weight {self.noise.h} exceeds N={self.ring.N}")

    @classmethod
    def build(cls, N: int, factors, delta_log2: float = 40, sigma: float = 3.2,
              gamma: int = 18491, h: int = DEFAULT_SECRET_WEIGHT,
              digit_bits: int = DEFAULT_DIGIT_BITS,
              security_level: int = DEFAULT_SECURITY_LEVEL) -> 'CryptoParams':
        P, resolved = resolve_modulus(factors)
        return cls(
            ring=RingParams(N, P, resolved),
            delta=float(2.0 ** delta_log2),
            noise=NoiseParams(sigma, int(gamma), int(h)),
            digit_bits=int(digit_bits),
            security_level=int(security_level),
        )

    @property
    def N(self) -> int:
        return self.ring.N

    @property
    def P(self) -> int:
        return self.ring.P

    @property
    def basis(self) -> EmbeddingBasis:
        return get_basis(self.ring.N)

    @property
    def digit_count(self) -> int:
        return -(-self.ring.bits // self.digit_bits)


# =============================================================================
# Keys and Ciphertexts
# =============================================================================

@dataclass(frozen=True)
class SecretKey:
    s: RingElement

    @property
    def weight(self) -> int:
        return sum(1 for c in self.s.coeffs if c)


@dataclass(frozen=True)
class PublicKey:
    b: RingElement
    a: RingElement


@dataclass(frozen=True)
class KeySwitchKey:
    """Switches from s(x^galois) back to s, one (b_i, a_i) pair per digit."""

    galois: int
    b: Tuple[RingElement, ...]
    a: Tuple[RingElement, ...]


@dataclass(frozen=True)
class RotationKeySet:
    digit_bits: int
    keys: Dict[int, KeySwitchKey] = field(default_factory=dict)

    def amounts(self) -> List[int]:
        return sorted(self.keys)

    def get(self, r: int) -> KeySwitchKey:
        try:
            return self.keys[r]
        except KeyError:
            raise RotationKeyError(f"No rotation key for shift {r}") from None


@dataclass(frozen=True)
class Ciphertext:
    """Degree-1 (c0, c1) or degree-2 (c0, c1, c2) ciphertext with tracked scale."""

    parts: Tuple[RingElement, ...]
    scale: float

    def __post_init__(self):
        if len(self.parts) < 2:
            raise UnsupportedDepthError(f"Ciphertext needs at least 2 parts, got {len(self.parts)}")

    @property
    def degree(self) -> int:
        return len(self.parts) - 1

    @property
    def params(self) -> RingParams:
        return self.parts[0].params


def rotation_amounts(N: int) -> List[int]:
    """1, 2, 4, ..., N/4."""
    out = []
    r = 1
    while r <= N // 4:
        out.append(r)
        r *= 2
    return out


def galois_element(r: int, N: int) -> int:
    """Automorphism exponent for a left slot shift by r."""
    return pow(5, r, 2 * N)


# =============================================================================
# Key Generation
# =============================================================================

def _keyswitch_key(s: RingElement, target: RingElement, galois: int, params: CryptoParams,
                   rng: np.random.Generator) -> KeySwitchKey:
    base = 1 << params.digit_bits
    bs, as_ = [], []
    for i in range(params.digit_count):
        a_i = uniform_ring(params.ring, rng)
        e_i = sample_tdg_poly(params.ring, params.noise, rng)
        bs.append(-(a_i * s) + e_i + target * pow(base, i, params.P))
        as_.append(a_i)
    return KeySwitchKey(galois, tuple(bs), tuple(as_))


def keygen_rotations(sk: SecretKey, params: CryptoParams, rng: np.random.Generator,
                     amounts: Optional[Sequence[int]] = None) -> RotationKeySet:
    amounts = rotation_amounts(params.N) if amounts is None else list(amounts)
    keys = {}
    for r in amounts:
        g = galois_element(r, params.N)
        keys[r] = _keyswitch_key(sk.s, apply_galois(sk.s, g), g, params, rng)
    return RotationKeySet(params.digit_bits, keys)


def keygen(params: CryptoParams, rng: np.random.Generator,
           rotations: Optional[Sequence[int]] = None) -> Tuple[SecretKey, PublicKey, RotationKeySet]:
    """Secret key, public key and rotation keys for every power of two up to N/4."""
    ring = params.ring
    s = sample_ternary_secret(ring, params.noise.h, rng)
    a = uniform_ring(ring, rng)
    e0 = sample_tdg_poly(ring, params.noise, rng)
    sk = SecretKey(s)
    pk = PublicKey(-(a * s) + e0, a)
    rot_keys = keygen_rotations(sk, params, rng, rotations)
    logger.debug(
        f"keygen: N={ring.N}, log2 P={ring.bits}, h={params.noise.h}, "
        f"{len(rot_keys.keys)} rotation keys x {params.digit_count} digits"
    )
    return sk, pk, rot_keys


# =============================================================================
# Encryption / Decryption
# =============================================================================

def encrypt(pt: Plaintext, pk: PublicKey, noise: NoiseParams, rng: np.random.Generator) -> Ciphertext:
    ring = pk.a.params
    v = sample_zo(ring, rng)
    e1 = sample_tdg_poly(ring, noise, rng)
    e2 = sample_tdg_poly(ring, noise, rng)
    return Ciphertext((v * pk.b + pt.poly + e1, v * pk.a + e2), pt.scale)


def trivial_encrypt(pt: Plaintext) -> Ciphertext:
    """Noiseless (pt, 0) ciphertext."""
    return Ciphertext((pt.poly, RingElement.zero(pt.poly.params)), pt.scale)


def decrypt(ct: Ciphertext, sk: SecretKey) -> Plaintext:
    """c0 + c1*s (+ c2*s^2) at the ciphertext's scale."""
    if ct.degree > 2:
        raise UnsupportedDepthError(f"Cannot decrypt degree {ct.degree} ciphertext")
    out = ct.parts[0] + ct.parts[1] * sk.s
    if ct.degree == 2:
        out = out + ct.parts[2] * (sk.s * sk.s)
    return Plaintext(out, ct.scale)


# =============================================================================
# Homomorphic Operations
# =============================================================================

def _check_scales(x: float, y: float):
    if not math.isclose(x, y, rel_tol=1e-12):
        raise ScaleMismatchError(f"Scale mismatch: {x:.6e} vs {y:.6e}")


def hom_add(ct1: Ciphertext, ct2: Ciphertext) -> Ciphertext:
    """Part-wise sum. A degree-1 operand is padded with a zero part."""
    _check_scales(ct1.scale, ct2.scale)
    zero = RingElement.zero(ct1.params)
    n = max(len(ct1.parts), len(ct2.parts))
    p1 = ct1.parts + (zero,) * (n - len(ct1.parts))
    p2 = ct2.parts + (zero,) * (n - len(ct2.parts))
    return Ciphertext(tuple(x + y for x, y in zip(p1, p2)), ct1.scale)


def hom_neg(ct: Ciphertext) -> Ciphertext:
    return Ciphertext(tuple(-x for x in ct.parts), ct.scale)


def hom_mult(ct1: Ciphertext, ct2: Ciphertext) -> Ciphertext:
    """Tensor product of two degree-1 ciphertexts; the scales multiply."""
    if ct1.degree != 1 or ct2.degree != 1:
        raise UnsupportedDepthError(
            f"Multiplication needs degree-1 operands, got {ct1.degree} and {ct2.degree}"
        )
    c0, c1 = ct1.parts
    d0, d1 = ct2.parts
    return Ciphertext(
        (ring_mul(c0, d0), ring_mul(c0, d1) + ring_mul(c1, d0), ring_mul(c1, d1)),
        ct1.scale * ct2.scale,
    )


def pt_mult(pt: Plaintext, ct: Ciphertext) -> Ciphertext:
    """Plaintext-ciphertext product."""
    if ct.degree != 1:
        raise UnsupportedDepthError(f"Plaintext product needs a degree-1 ciphertext, got {ct.degree}")
    return Ciphertext(tuple(ring_mul(pt.poly, x) for x in ct.parts), pt.scale * ct.scale)


def _digits(a: RingElement, digit_bits: int, count: int) -> List[List[int]]:
    mask = (1 << digit_bits) - 1
    values = a.unsigned()
    return [[(c >> (digit_bits * i)) & mask for c in values] for i in range(count)]


def key_switch(c0: RingElement, c1: RingElement, key: KeySwitchKey, digit_bits: int) -> Tuple[RingElement, RingElement]:
    """Re-key (c0, c1) decrypting under s' into a pair decrypting under s."""
    new0, new1 = c0, RingElement.zero(c0.params)
    for d, b_i, a_i in zip(_digits(c1, digit_bits, len(key.b)), key.b, key.a):
        if not any(d):
            continue
        new0 = new0 + ring_mul_small(d, b_i)
        new1 = new1 + ring_mul_small(d, a_i)
    return new0, new1


def _rotate_power(ct: Ciphertext, r: int, rot_keys: RotationKeySet) -> Ciphertext:
    key = rot_keys.get(r)
    c0 = apply_galois(ct.parts[0], key.galois)
    c1 = apply_galois(ct.parts[1], key.galois)
    return Ciphertext(key_switch(c0, c1, key, rot_keys.digit_bits), ct.scale)


def rotate(ct: Ciphertext, r: int, rot_keys: RotationKeySet) -> Ciphertext:
    """Cyclic left shift of the slots by r, composed from power-of-two keys."""
    if ct.degree != 1:
        raise UnsupportedDepthError(f"Rotation needs a degree-1 ciphertext, got {ct.degree}")
    slots = ct.params.N // 2
    r %= slots
    step = 1
    while r:
        if r & 1:
            ct = _rotate_power(ct, step, rot_keys)
        r >>= 1
        step <<= 1
    return ct


def hom_dot(pt: Plaintext, ct: Ciphertext, rot_keys: RotationKeySet) -> Ciphertext:
    """Inner product of the plaintext and ciphertext slots, replicated into every slot."""
    acc = pt_mult(pt, ct)
    for r in rotation_amounts(ct.params.N):
        acc = hom_add(acc, rotate(acc, r, rot_keys))
    return acc


# =============================================================================
# Noise Bounds
# =============================================================================

def fresh_noise_bound(N: int, gamma: int) -> int:
    """Worst-case infinity norm of v*e0 + e1 + e2*s for a fresh ciphertext."""
    return (2 * N + 1) * gamma


def slot_error_bound(N: int, gamma: int, delta: float) -> float:
    """Worst-case per-slot error of decode(decrypt(encrypt(encode(z))))."""
    return (1 + N * (2 * N + 1) * gamma) / delta


def quantization_error_bound(N: int, delta: float) -> float:
    """Worst-case per-slot error of decode(encode(z))."""
    return N / delta
