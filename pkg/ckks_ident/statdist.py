"""
Lattice Gaussian Distances
==========================

Numerical checks of the truncation lemma on small, exactly enumerable
lattices c*Z^n + v0 (n <= 3):

  - tail_ratio: mass a discrete Gaussian loses when truncated at Gamma
  - banaszczyk_bound: the closed-form tail bound 2 exp(-Gamma^2 / (2 n sigma^2))
  - check_truncation_condition: Gamma >= sigma (sqrt(2) N + 1)
  - convolved_distance: L1 distance between (truncated DG + N(0, tau^2)) and
    N(0, sigma^2 + tau^2), by adaptive Gauss-Legendre quadrature
  - smoothing_parameter: eta_eps of c*Z^n by bisection on enumerated sums

Gaussian sums are accumulated in the log domain (scipy logsumexp) so tail
ratios down to ~1e-300 keep full relative precision.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import bisect, brentq
from scipy.special import logsumexp
from scipy.stats import norm

from .errors import ParameterError, PrecisionError

logger = logging.getLogger(__name__)

MAX_DIM = 3

# Enumeration must cover all but this fraction of the Gaussian mass
MASS_TOLERANCE = 1e-15

# Lattice points farther than this many sigmas carry weight below exp(-800)
_SUPPORT_SIGMAS = 40


@dataclass(frozen=True)
class LatticeSpec:
    """Coset c*Z^n + v0 with an optional enumeration radius (per coordinate)."""

    dim: int = 1
    scale: float = 1.0
    shift: Tuple[float, ...] = ()
    radius: Optional[float] = None

    def __post_init__(self):
        if not 1 <= self.dim <= MAX_DIM:
            raise ParameterError(f"Lattice dimension must be in 1..{MAX_DIM}, got {self.dim}")
        if not self.scale > 0:
            raise ParameterError(f"Lattice scale must be positive, got {self.scale}")
        if self.shift and len(self.shift) != self.dim:
            raise ParameterError(f"Coset shift needs {self.dim} entries, got {len(self.shift)}")

    @property
    def offset(self) -> np.ndarray:
        return np.asarray(self.shift or (0.0,) * self.dim, dtype=np.float64)

    def auto_radius(self, sigma: float) -> float:
        k = 20 * self.dim * (1 + sigma / self.scale) / MASS_TOLERANCE
        return sigma * math.sqrt(2 * math.log(k)) + self.scale

    def axis(self, i: int, radius: float) -> np.ndarray:
        """Coordinates c*k + v0_i within [-radius, radius]."""
        v0 = self.offset[i]
        lo = math.ceil((-radius - v0) / self.scale)
        hi = math.floor((radius - v0) / self.scale)
        return self.scale * np.arange(lo, hi + 1) + v0


def _enumerate(sigma: float, lattice: LatticeSpec) -> Tuple[np.ndarray, np.ndarray, float]:
    """Squared norms, log weights, radius. Raises when the radius truncates real mass."""
    radius = lattice.radius if lattice.radius is not None else lattice.auto_radius(sigma)
    axes = [lattice.axis(i, radius) for i in range(lattice.dim)]
    if any(a.size == 0 for a in axes):
        raise PrecisionError(f"Enumeration radius {radius} contains no lattice points")
    grids = np.meshgrid(*axes, indexing='ij')
    sq = sum(g ** 2 for g in grids).ravel()
    logw = -sq / (2 * sigma ** 2)

    outer = np.zeros(sq.shape, dtype=bool)
    for g in grids:
        outer |= (np.abs(g) > radius - lattice.scale).ravel()
    if outer.any():
        share = math.exp(logsumexp(logw[outer]) - logsumexp(logw))
        if share > MASS_TOLERANCE:
            raise PrecisionError(
                f"Enumeration radius {radius:.3f} leaves {share:.2e} of the mass on its boundary"
            )
    return sq, logw, radius


# =============================================================================
# Tail Mass
# =============================================================================

def log_tail_ratio(sigma: float, gamma: float, lattice: Optional[LatticeSpec] = None) -> float:
    """log of the mass beyond Gamma relative to the full discrete Gaussian."""
    lattice = lattice or LatticeSpec()
    if not sigma > 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    sq, logw, _ = _enumerate(sigma, lattice)
    tail = sq > gamma ** 2
    if not tail.any():
        return -math.inf
    return float(logsumexp(logw[tail]) - logsumexp(logw))


def tail_ratio(sigma: float, gamma: float, lattice: Optional[LatticeSpec] = None) -> float:
    """sum_{|v| > Gamma} rho_sigma(v) / sum_v rho_sigma(v) over the lattice coset."""
    return math.exp(log_tail_ratio(sigma, gamma, lattice))


def banaszczyk_bound(sigma: float, gamma: float, n: int) -> float:
    """2 exp(-Gamma^2 / (2 n sigma^2))."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    return 2.0 * math.exp(-gamma ** 2 / (2 * n * sigma ** 2))


@dataclass(frozen=True)
class TruncationVerdict:
    passed: bool
    threshold: float
    sigma: float
    gamma: float
    N: int

    def __bool__(self):
        return self.passed


def truncation_threshold(sigma: float, N: int) -> float:
    return sigma * (math.sqrt(2) * N + 1)


def check_truncation_condition(sigma: float, gamma: float, N: int) -> TruncationVerdict:
    """Gamma >= sigma (sqrt(2) N + 1)."""
    threshold = truncation_threshold(sigma, N)
    return TruncationVerdict(gamma >= threshold, threshold, sigma, gamma, N)


# =============================================================================
# Convolution Distance
# =============================================================================

def _truncated_points(sigma: float, gamma: float, lattice: LatticeSpec) -> Tuple[np.ndarray, np.ndarray]:
    """1-D support points of the truncated coset Gaussian and their probabilities."""
    bound = min(gamma, _SUPPORT_SIGMAS * sigma)
    points = lattice.axis(0, bound)
    if points.size == 0:
        raise ParameterError(f"No lattice point within Gamma={gamma}")
    logw = -points ** 2 / (2 * sigma ** 2)
    return points, np.exp(logw - logsumexp(logw))


def _mixture_density(x: np.ndarray, points: np.ndarray, probs: np.ndarray, tau: float) -> np.ndarray:
    out = np.empty_like(x)
    chunk = max(1, (1 << 20) // len(points))
    for i in range(0, len(x), chunk):
        xs = x[i:i + chunk]
        out[i:i + chunk] = norm.pdf(xs[:, None], loc=points[None, :], scale=tau) @ probs
    return out


def _abs_integral(f, a: float, b: float, step: float, nodes: int) -> float:
    """integral of |f| over [a, b]; cells with a sign change are split at the root."""
    cells = max(1, math.ceil((b - a) / step))
    edges = np.linspace(a, b, cells + 1)
    values = f(edges)

    los, his = [], []
    for i in range(cells):
        lo, hi = edges[i], edges[i + 1]
        if values[i] * values[i + 1] < 0:
            root = brentq(lambda t: float(f(np.array([t]))[0]), lo, hi, xtol=1e-15)
            los += [lo, root]
            his += [root, hi]
        else:
            los.append(lo)
            his.append(hi)

    los, his = np.array(los), np.array(his)
    x, w = leggauss(nodes)
    half = (his - los) / 2
    mid = (his + los) / 2
    pts = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    vals = np.abs(f(pts)).reshape(len(los), nodes)
    return float(np.sum(half * (vals @ w)))


def convolved_distance(sigma: float, gamma: float, tau: float,
                       lattice: Optional[LatticeSpec] = None,
                       quadrature_step: Optional[float] = None,
                       tol: float = 1e-10, nodes: int = 12) -> float:
    """Statistical distance between DG_{Gamma, L+v0}(sigma^2) + N(0, tau^2) and N(0, sigma^2 + tau^2).

    Integrated at step h and h/2; a difference above tol raises PrecisionError.
    """
    lattice = lattice or LatticeSpec()
    if lattice.dim != 1:
        raise ParameterError("Convolution distance is defined for 1-D lattices only")
    if not tau > 0:
        raise ParameterError(f"tau must be positive, got {tau}")

    points, probs = _truncated_points(sigma, gamma, lattice)
    r = math.hypot(sigma, tau)
    limit = float(np.max(np.abs(points))) + 10 * r
    step = quadrature_step or tau / 4

    def diff(x):
        return _mixture_density(x, points, probs, tau) - norm.pdf(x, scale=r)

    coarse = _abs_integral(diff, -limit, limit, step, nodes)
    fine = _abs_integral(diff, -limit, limit, step / 2, nodes)
    if abs(coarse - fine) > tol:
        raise PrecisionError(
            f"Quadrature did not converge: step {step} gives {coarse:.3e}, "
            f"step {step / 2} gives {fine:.3e}"
        )
    logger.debug(f"convolved_distance(sigma={sigma}, Gamma={gamma}, tau={tau}) = {fine / 2:.6e}")
    return fine / 2


# =============================================================================
# Smoothing Parameter
# =============================================================================

def _log_dual_sum(sigma: float, lattice: LatticeSpec) -> float:
    """log sum_{u in L* minus 0} exp(-2 pi^2 sigma^2 |u|^2) for L* = (1/c) Z^n."""
    a = 2 * math.pi ** 2 * sigma ** 2 / lattice.scale ** 2
    kmax = max(1, math.ceil(math.sqrt(800 / a)))
    k = np.arange(-kmax, kmax + 1)
    log_theta = logsumexp(-a * k ** 2.0)
    total = math.expm1(lattice.dim * log_theta)
    return math.log(total) if total > 0 else -math.inf


def smoothing_parameter(lattice: Optional[LatticeSpec] = None, eps: float = math.exp(-1),
                        xtol: float = 1e-12) -> float:
    """Smallest sigma with sum_{u in L* minus 0} exp(-2 pi^2 sigma^2 |u|^2) <= eps."""
    lattice = lattice or LatticeSpec()
    if not eps > 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    target = math.log(eps)

    def excess(s):
        return _log_dual_sum(s, lattice) - target

    lo, hi = 1e-3 * lattice.scale, lattice.scale
    while excess(lo) <= 0:
        lo /= 2
    while excess(hi) > 0:
        hi *= 2
    return bisect(excess, lo, hi, xtol=xtol * lattice.scale)


def smoothing_condition_holds(sigma: float, tau: float, eta: float) -> bool:
    """sqrt(sigma^2 + tau^2) >= 2 pi sigma tau eta."""
    return math.hypot(sigma, tau) >= 2 * math.pi * sigma * tau * eta


def max_smoothing_tau(sigma: float, eta: float) -> float:
    """Largest tau satisfying the smoothing condition (inf when every tau does)."""
    k = 2 * math.pi * sigma * eta
    if k <= 1:
        return math.inf
    return sigma / math.sqrt(k * k - 1)
