"""
Ring Arithmetic
===============

Arithmetic in R_P = Z_P[x] / (x^N + 1), the ring carrying keys, plaintexts
and ciphertext components.

Coefficients are Python integers kept in the canonical signed range
[-P/2, P/2). P is an opaque arbitrary-precision integer; its optional prime
factorization is carried for reporting only.

Multiplication:
  - `negacyclic_schoolbook` is the quadratic reference.
  - Above SCHOOLBOOK_MAX_N, `ring_mul` packs both operands into single big
    integers (Kronecker substitution), multiplies them with gmpy2 and folds
    the product back modulo x^N + 1. The result is bit-identical to the
    reference.
"""

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Tuple

import gmpy2
import numpy as np

from .config import SCHOOLBOOK_MAX_N
from .errors import ParameterError, ParameterMismatchError


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class RingParams:
    """Ring dimension N and modulus P."""

    N: int
    P: int
    factors: Tuple[Tuple[int, int], ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not _is_power_of_two(self.N) or self.N < 2:
            raise ParameterError(f"Ring dimension must be a power of two >= 2, got {self.N}")
        if self.P < 2:
            raise ParameterError(f"Modulus must be >= 2, got {self.P}")

    @property
    def half(self) -> int:
        """floor(P / 2)."""
        return self.P // 2

    @property
    def bits(self) -> int:
        return self.P.bit_length()

    def canonical(self, x: int) -> int:
        """Reduce an integer into [-P/2, P/2)."""
        r = x % self.P
        return r - self.P if 2 * r >= self.P else r


@dataclass(frozen=True)
class RingElement:
    """Polynomial of degree < N with canonical signed coefficients."""

    coeffs: Tuple[int, ...]
    params: RingParams

    def __post_init__(self):
        if len(self.coeffs) != self.params.N:
            raise ParameterError(
                f"Expected {self.params.N} coefficients, got {len(self.coeffs)}"
            )

    @classmethod
    def from_ints(cls, values: Iterable[int], params: RingParams) -> 'RingElement':
        """Build an element from arbitrary integers, reducing them mod P."""
        return cls(tuple(params.canonical(int(v)) for v in values), params)

    @classmethod
    def zero(cls, params: RingParams) -> 'RingElement':
        return cls((0,) * params.N, params)

    @classmethod
    def constant(cls, value: int, params: RingParams) -> 'RingElement':
        return cls.from_ints([value] + [0] * (params.N - 1), params)

    @classmethod
    def monomial(cls, degree: int, params: RingParams) -> 'RingElement':
        """x^degree, with x^N = -1 applied."""
        coeffs = [0] * params.N
        sign = -1 if (degree // params.N) % 2 else 1
        coeffs[degree % params.N] = sign
        return cls.from_ints(coeffs, params)

    def unsigned(self) -> list:
        """Coefficients as representatives in [0, P)."""
        P = self.params.P
        return [c % P for c in self.coeffs]

    def inf_norm(self) -> int:
        return max(abs(c) for c in self.coeffs)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __add__(self, other: 'RingElement') -> 'RingElement':
        return ring_add(self, other)

    def __sub__(self, other: 'RingElement') -> 'RingElement':
        return ring_add(self, ring_neg(other))

    def __neg__(self) -> 'RingElement':
        return ring_neg(self)

    def __mul__(self, other):
        if isinstance(other, RingElement):
            return ring_mul(self, other)
        return ring_scalar_mul(int(other), self)

    __rmul__ = __mul__


def _check_same_ring(a: RingElement, b: RingElement):
    if a.params is not b.params and a.params != b.params:
        raise ParameterMismatchError(
            f"Ring mismatch: (N={a.params.N}, P bits={a.params.bits}) vs "
            f"(N={b.params.N}, P bits={b.params.bits})"
        )


# =============================================================================
# Operations
# =============================================================================

def ring_add(a: RingElement, b: RingElement) -> RingElement:
    """Coefficient-wise sum mod P."""
    _check_same_ring(a, b)
    canon = a.params.canonical
    return RingElement(tuple(canon(x + y) for x, y in zip(a.coeffs, b.coeffs)), a.params)


def ring_neg(a: RingElement) -> RingElement:
    """-a mod P."""
    canon = a.params.canonical
    return RingElement(tuple(canon(-x) for x in a.coeffs), a.params)


def ring_scalar_mul(c: int, a: RingElement) -> RingElement:
    """c * a mod P."""
    canon = a.params.canonical
    return RingElement(tuple(canon(c * x) for x in a.coeffs), a.params)


def negacyclic_schoolbook(a: Sequence[int], b: Sequence[int]) -> list:
    """Unreduced negacyclic convolution of two length-N integer sequences.

    c_l = sum_{t<=l} a_t b_{l-t} - sum_{t>l} a_t b_{N+l-t}
    """
    n = len(a)
    out = [0] * n
    for i, ai in enumerate(a):
        if not ai:
            continue
        for j, bj in enumerate(b):
            k = i + j
            if k < n:
                out[k] += ai * bj
            else:
                out[k - n] -= ai * bj
    return out


def _negacyclic_kronecker(a: Sequence[int], b: Sequence[int], modulus: int) -> list:
    """Negacyclic product of nonnegative integer sequences, reduced mod modulus."""
    n = len(a)
    slot_bits = max(a).bit_length() + max(b).bit_length() + n.bit_length() + 1
    width = (slot_bits + 7) // 8

    packed_a = gmpy2.mpz(int.from_bytes(b''.join(x.to_bytes(width, 'little') for x in a), 'little'))
    packed_b = gmpy2.mpz(int.from_bytes(b''.join(x.to_bytes(width, 'little') for x in b), 'little'))
    buf = int(packed_a * packed_b).to_bytes(2 * n * width, 'little')

    low = [int.from_bytes(buf[i * width:(i + 1) * width], 'little') for i in range(n)]
    high = [int.from_bytes(buf[(i + n) * width:(i + n + 1) * width], 'little') for i in range(n)]
    return [(lo - hi) % modulus for lo, hi in zip(low, high)]


def ring_mul(a: RingElement, b: RingElement) -> RingElement:
    """Negacyclic product a * b mod (x^N + 1, P)."""
    _check_same_ring(a, b)
    params = a.params
    if params.N <= SCHOOLBOOK_MAX_N:
        return RingElement.from_ints(negacyclic_schoolbook(a.coeffs, b.coeffs), params)
    return RingElement.from_ints(_negacyclic_kronecker(a.unsigned(), b.unsigned(), params.P), params)


def ring_mul_small(small: Sequence[int], b: RingElement) -> RingElement:
    """Product of b with a polynomial given by nonnegative integer coefficients.

    Used by key switching, where one operand is a digit of a decomposition.
    """
    params = b.params
    if params.N <= SCHOOLBOOK_MAX_N:
        return RingElement.from_ints(negacyclic_schoolbook(list(small), b.coeffs), params)
    return RingElement.from_ints(_negacyclic_kronecker(list(small), b.unsigned(), params.P), params)


def apply_galois(a: RingElement, g: int) -> RingElement:
    """Automorphism x -> x^g for odd g."""
    n = a.params.N
    two_n = 2 * n
    if g % 2 == 0:
        raise ParameterError(f"Galois element must be odd, got {g}")
    out = [0] * n
    for i, c in enumerate(a.coeffs):
        k = (i * g) % two_n
        if k < n:
            out[k] = c
        else:
            out[k - n] = -c
    return RingElement.from_ints(out, a.params)


def uniform_ring(params: RingParams, rng: np.random.Generator) -> RingElement:
    """Element with every coefficient independently uniform over Z_P.

    Exact rejection sampling on bit strings of P's bit length.
    """
    P = params.P
    bits = (P - 1).bit_length() or 1
    nbytes = (bits + 7) // 8
    mask = (1 << bits) - 1

    buf = rng.bytes(nbytes * params.N)
    coeffs = []
    for i in range(params.N):
        x = int.from_bytes(buf[i * nbytes:(i + 1) * nbytes], 'little') & mask
        while x >= P:
            x = int.from_bytes(rng.bytes(nbytes), 'little') & mask
        coeffs.append(x)
    return RingElement.from_ints(coeffs, params)
