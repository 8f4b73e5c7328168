"""
Canonical Embedding Encoder
===========================

Moves messages between complex slot vectors z in C^{N/2} and plaintext ring
elements.

Slot layout:
  The embedding evaluates a polynomial at the odd powers zeta^e of
  zeta = exp(i*pi/N). Coordinate l < N/2 uses e = 5^l mod 2N and coordinate
  N-1-l uses the conjugate exponent 2N - 5^l. Coordinates l and N-1-l are
  therefore conjugate for every real polynomial (the subspace H), and the
  automorphism x -> x^(5^r) shifts the slots cyclically left by r.

Evaluation runs through the dense CRT matrix up to DIRECT_EMBEDDING_MAX_N
and through numpy's FFT above; both paths agree to float precision.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .config import DIRECT_EMBEDDING_MAX_N
from .errors import (
    CapacityError,
    DomainError,
    EncodingOverflowError,
    ParameterError,
    ParameterMismatchError,
    UsageError,
)
from .ring import RingElement, RingParams

logger = logging.getLogger(__name__)

# Complex vector of length N/2
SlotVector = np.ndarray

PAD_MODES = ('zero', 'broadcast')


class EmbeddingBasis:
    """Precomputed canonical embedding for ring dimension N."""

    def __init__(self, N: int):
        if N < 2 or N & (N - 1):
            raise ParameterError(f"Ring dimension must be a power of two >= 2, got {N}")
        self.N = N
        self.slots = N // 2
        self.zeta = np.exp(1j * np.pi / N)

        two_n = 2 * N
        half = [pow(5, l, two_n) for l in range(self.slots)]
        self.exponents = np.array(half + [two_n - e for e in reversed(half)], dtype=np.int64)
        # Position of each coordinate among the odd exponents 1, 3, ..., 2N-1
        self._order = (self.exponents - 1) // 2

        k = np.arange(N)
        self._twist = self.zeta ** k
        self._crt = None
        if N <= DIRECT_EMBEDDING_MAX_N:
            self._crt = np.exp(1j * np.pi * np.outer(self.exponents, k) / N)

    @property
    def crt(self) -> np.ndarray:
        """Dense CRT matrix, rows in coordinate order. Built lazily above the direct threshold."""
        if self._crt is None:
            k = np.arange(self.N)
            self._crt = np.exp(1j * np.pi * np.outer(self.exponents, k) / self.N)
        return self._crt

    def _use_direct(self, method: str) -> bool:
        if method == 'auto':
            return self.N <= DIRECT_EMBEDDING_MAX_N
        if method not in ('direct', 'fft'):
            raise UsageError(f"Unknown embedding method: {method}")
        return method == 'direct'

    def evaluate(self, coeffs, method: str = 'auto') -> np.ndarray:
        """All N evaluations of the polynomial, in coordinate order."""
        c = np.asarray(coeffs, dtype=np.complex128)
        if self._use_direct(method):
            return self.crt @ c
        odd = self.N * np.fft.ifft(c * self._twist)
        return odd[self._order]

    def interpolate(self, values, method: str = 'auto') -> np.ndarray:
        """Inverse of `evaluate`: complex coefficients from N evaluations."""
        v = np.asarray(values, dtype=np.complex128)
        if self._use_direct(method):
            return self.crt.conj().T @ v / self.N
        odd = np.empty(self.N, dtype=np.complex128)
        odd[self._order] = v
        return np.fft.fft(odd) / (self.N * self._twist)

    def expand(self, z) -> np.ndarray:
        """Conjugate-symmetric preimage in H of a slot vector."""
        z = np.asarray(z, dtype=np.complex128)
        return np.concatenate([z, np.conj(z[::-1])])


@lru_cache(maxsize=8)
def get_basis(N: int) -> EmbeddingBasis:
    """Shared basis per ring dimension."""
    return EmbeddingBasis(N)


@dataclass(frozen=True)
class Plaintext:
    """Encoded message and the scale it carries."""

    poly: RingElement
    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise ParameterError(f"Plaintext scale must be positive, got {self.scale}")


# =============================================================================
# Quantizer
# =============================================================================

def quantize(x: Sequence[float], rng: np.random.Generator) -> list:
    """Probabilistic rounding: floor(x) w.p. 1 + floor(x) - x, else floor(x) + 1.

    Returns Python integers, since scaled coefficients exceed int64.
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if not np.all(np.isfinite(x)):
        raise DomainError("Quantizer input must be finite")
    low = np.floor(x)
    up = rng.random(x.shape) < (x - low)
    return [int(f) + int(u) for f, u in zip(low.tolist(), up.tolist())]


# =============================================================================
# Encode / Decode
# =============================================================================

def encode_core(z, delta: float, basis: EmbeddingBasis) -> np.ndarray:
    """Delta * CRT^-1 * Upsilon^-1(z) before quantization (real vector)."""
    coeffs = basis.interpolate(basis.expand(z))
    scale = max(1.0, float(np.max(np.abs(coeffs))))
    residue = float(np.max(np.abs(coeffs.imag))) / scale
    if residue > 1e-9:
        logger.warning(f"Inverse embedding left imaginary residue {residue:.3e}")
    return delta * coeffs.real


def encode(z, delta: float, basis: EmbeddingBasis, params: RingParams,
           rng: np.random.Generator) -> Plaintext:
    """Encode N/2 complex slots at scale delta."""
    if basis.N != params.N:
        raise ParameterMismatchError(f"Basis for N={basis.N} used with ring N={params.N}")
    if not delta > 0:
        raise ParameterError(f"Scale must be positive, got {delta}")
    z = np.asarray(z, dtype=np.complex128).ravel()
    if z.shape[0] != basis.slots:
        raise CapacityError(f"Expected {basis.slots} slots, got {z.shape[0]}")

    coeffs = quantize(encode_core(z, delta, basis), rng)
    for c in coeffs:
        if 2 * abs(c) >= params.P:
            raise EncodingOverflowError(
                f"Quantized coefficient of {c.bit_length()} bits does not fit modulus of {params.bits} bits"
            )
    return Plaintext(RingElement.from_ints(coeffs, params), float(delta))


def decode(pt: Plaintext, basis: EmbeddingBasis) -> SlotVector:
    """Slot vector of a plaintext, divided by its tracked scale."""
    coeffs = np.array([float(c) for c in pt.poly.coeffs]) / pt.scale
    return basis.evaluate(coeffs)[:basis.slots]


def embed_real(v: Sequence[float], pad_mode: str, N: int) -> SlotVector:
    """Place real values into the N/2 slots.

    zero: values lead, zeros follow. broadcast: a single scalar fills every slot.
    """
    slots = N // 2
    v = np.asarray(v, dtype=np.float64).ravel()
    if pad_mode == 'zero':
        if v.shape[0] > slots:
            raise CapacityError(f"{v.shape[0]} values exceed {slots} slots")
        out = np.zeros(slots, dtype=np.complex128)
        out[:v.shape[0]] = v
        return out
    if pad_mode == 'broadcast':
        if v.shape[0] != 1:
            raise UsageError(f"Broadcast takes exactly one value, got {v.shape[0]}")
        return np.full(slots, v[0], dtype=np.complex128)
    raise UsageError(f"Unknown pad mode: {pad_mode} (expected one of {PAD_MODES})")


def encode_real(v: Sequence[float], pad_mode: str, delta: float, basis: EmbeddingBasis,
                params: RingParams, rng: np.random.Generator) -> Plaintext:
    """embed_real followed by encode."""
    return encode(embed_real(v, pad_mode, params.N), delta, basis, params, rng)
