"""
Samplers
========

Randomness sources of the cryptosystem:
  - truncated discrete Gaussian DG_Gamma(sigma^2) on the integers
  - ZO(1/2) ternary vectors with P(-1) = P(1) = 1/4, P(0) = 1/2
  - ternary secrets with a fixed Hamming weight h

All samplers draw from a numpy Generator over the counter-based Philox bit
generator (`make_rng`), so identical seeds replay identical streams.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple

import numpy as np

from .errors import ParameterError
from .ring import RingElement, RingParams

logger = logging.getLogger(__name__)

# Inverse-CDF tables are used while the effective support stays below this
TABLE_LIMIT = 1 << 16

# exp(-x^2 / 2) underflows double precision past this many sigmas
_TAIL_SIGMAS = 40


def make_rng(seed: int) -> np.random.Generator:
    """Seeded Philox generator."""
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True)
class NoiseParams:
    """Noise distribution parameters: sigma, truncation value Gamma, secret weight h."""

    sigma: float
    gamma: int
    h: int

    def __post_init__(self):
        if not self.sigma > 0:
            raise ParameterError(f"sigma must be positive, got {self.sigma}")
        if self.gamma < 1:
            raise ParameterError(f"Gamma must be >= 1, got {self.gamma}")
        if self.h < 1:
            raise ParameterError(f"Secret weight h must be >= 1, got {self.h}")


# =============================================================================
# Truncated Discrete Gaussian
# =============================================================================

def effective_bound(sigma: float, gamma: int) -> int:
    """Largest |m| with a representable weight under the truncation."""
    return int(min(gamma, math.ceil(_TAIL_SIGMAS * sigma)))


@lru_cache(maxsize=32)
def _tdg_table(sigma: float, gamma: int) -> Tuple[np.ndarray, np.ndarray]:
    """Support and cumulative distribution, accumulated in extended precision."""
    bound = effective_bound(sigma, gamma)
    support = np.arange(-bound, bound + 1, dtype=np.int64)
    weights = np.exp(-(support.astype(np.longdouble) ** 2) / (2 * np.longdouble(sigma) ** 2))
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    return support, cdf.astype(np.float64)


def tdg_pmf(sigma: float, gamma: int) -> Tuple[np.ndarray, np.ndarray]:
    """Exact normalized probability mass function on the effective support."""
    support, _ = _tdg_table(sigma, gamma)
    weights = np.exp(-(support.astype(np.longdouble) ** 2) / (2 * np.longdouble(sigma) ** 2))
    return support, (weights / weights.sum()).astype(np.float64)


def _sample_tdg_table(sigma: float, gamma: int, size: int, rng: np.random.Generator) -> np.ndarray:
    support, cdf = _tdg_table(sigma, gamma)
    idx = np.searchsorted(cdf, rng.random(size), side='right')
    return support[np.minimum(idx, len(support) - 1)]


def _sample_tdg_rejection(sigma: float, gamma: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Discrete Laplace proposal with scale t = floor(sigma) + 1, Gaussian acceptance."""
    t = math.floor(sigma) + 1
    p = 1.0 - math.exp(-1.0 / t)
    out = np.empty(0, dtype=np.int64)
    while out.size < size:
        batch = 2 * (size - out.size) + 16
        candidate = (rng.geometric(p, batch) - rng.geometric(p, batch)).astype(np.int64)
        bias = (np.abs(candidate) - sigma ** 2 / t) ** 2 / (2 * sigma ** 2)
        keep = (rng.random(batch) < np.exp(-bias)) & (np.abs(candidate) <= gamma)
        out = np.concatenate([out, candidate[keep]])
    return out[:size]


def sample_tdg_array(sigma: float, gamma: int, size: int, rng: np.random.Generator,
                     method: str = 'auto') -> np.ndarray:
    """`size` independent draws from DG_Gamma(sigma^2).

    method: 'table' (inverse CDF), 'rejection', or 'auto' (table while the
    effective support fits TABLE_LIMIT).
    """
    if method == 'auto':
        method = 'table' if 2 * effective_bound(sigma, gamma) + 1 <= TABLE_LIMIT else 'rejection'
    if method == 'table':
        return _sample_tdg_table(float(sigma), int(gamma), size, rng)
    if method == 'rejection':
        return _sample_tdg_rejection(float(sigma), int(gamma), size, rng)
    raise ParameterError(f"Unknown sampling method: {method}")


def sample_tdg(sigma: float, gamma: int, rng: np.random.Generator) -> int:
    """Single integer m with |m| <= Gamma, P(m) proportional to exp(-m^2 / 2 sigma^2)."""
    return int(sample_tdg_array(sigma, gamma, 1, rng)[0])


def sample_tdg_poly(params: RingParams, noise: NoiseParams, rng: np.random.Generator) -> RingElement:
    """N independent DG_Gamma(sigma^2) coefficients."""
    draws = sample_tdg_array(noise.sigma, noise.gamma, params.N, rng)
    return RingElement.from_ints(draws.tolist(), params)


# =============================================================================
# Ternary Distributions
# =============================================================================

def sample_zo(params: RingParams, rng: np.random.Generator) -> RingElement:
    """ZO(1/2): coefficients -1, 0, 1 with probabilities 1/4, 1/2, 1/4."""
    r = rng.integers(0, 4, params.N)
    coeffs = np.where(r == 0, -1, np.where(r == 1, 1, 0))
    return RingElement.from_ints(coeffs.tolist(), params)


def sample_ternary_secret(params: RingParams, h: int, rng: np.random.Generator) -> RingElement:
    """Exactly h coefficients equal to +-1 at uniformly chosen positions."""
    if not 1 <= h <= params.N:
        raise ParameterError(f"Secret weight must satisfy 1 <= h <= N={params.N}, got {h}")
    positions = rng.choice(params.N, size=h, replace=False)
    signs = rng.integers(0, 2, h) * 2 - 1
    coeffs = [0] * params.N
    for pos, sign in zip(positions.tolist(), signs.tolist()):
        coeffs[pos] = sign
    return RingElement.from_ints(coeffs, params)
