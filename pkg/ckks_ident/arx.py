"""
ARX Plant
=========

The identified system

    y_{k+1} = a_1 y_k + ... + a_p y_{k-p+1} + b_1 u_k + ... + b_q u_{k-q+1} + w_{k+1}
            = phi_k^T theta + w_{k+1}

with zero prehistory (y_k = u_k = 0 for k < 0), plus the stability and
signal-bound analysis the identification guarantees depend on:

  - companion matrix A, spectral radius rho_A, decay constant c with
    ||A^k|| <= c ((rho_A + 1) / 2)^k
  - signal bound G1 and decrypted-message bound G2
  - `validate_params`: every checkable condition as a PASS/FAIL report
  - `check_excitation`: windowed persistent-excitation estimate
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, ParameterError, PrecisionError
from .models.report import ParamReport
from .statdist import check_truncation_condition

logger = logging.getLogger(__name__)

# Root residual |char poly(root)| above this is reported
ROOT_RESIDUAL_TOL = 1e-9

# Give up searching for the decay index after this many powers
MAX_DECAY_POWER = 1_000_000


@dataclass(frozen=True)
class ARXModel:
    """Orders p, q come from the coefficient lengths; L bounds |y_0|, |u_k|, |w_k|."""

    a: Tuple[float, ...]
    b: Tuple[float, ...]
    L: float = 5.0

    def __post_init__(self):
        object.__setattr__(self, 'a', tuple(float(x) for x in self.a))
        object.__setattr__(self, 'b', tuple(float(x) for x in self.b))
        if not self.a or not self.b:
            raise ParameterError(f"Orders must satisfy p >= 1 and q >= 1, got p={len(self.a)}, q={len(self.b)}")
        if not all(math.isfinite(x) for x in self.a + self.b):
            raise ParameterError("Model coefficients must be finite")
        if not self.L > 0:
            raise ParameterError(f"Signal bound L must be positive, got {self.L}")

    @property
    def p(self) -> int:
        return len(self.a)

    @property
    def q(self) -> int:
        return len(self.b)

    @property
    def dim(self) -> int:
        return self.p + self.q

    @property
    def theta(self) -> np.ndarray:
        return np.array(self.a + self.b)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ARXModel':
        a, b = data.get('a') or [], data.get('b') or []
        for order, coeffs in (('p', a), ('q', b)):
            if order in data and int(data[order]) != len(coeffs):
                raise ParameterError(f"{order}={data[order]} does not match {len(coeffs)} coefficients")
        return cls(tuple(a), tuple(b), float(data.get('L', 5.0)))

    def to_dict(self) -> Dict[str, Any]:
        return {'p': self.p, 'q': self.q, 'a': list(self.a), 'b': list(self.b), 'L': self.L}


# =============================================================================
# Signals
# =============================================================================

@dataclass
class SignalHistory:
    """y_0..y_{K+1}, u_0..u_K and w_1..w_{K+1} (w[k] holds w_{k+1})."""

    y: np.ndarray
    u: np.ndarray
    w: np.ndarray
    p: int
    q: int

    @property
    def steps(self) -> int:
        return len(self.u)

    def output(self, k: int) -> float:
        """y_{k+1}."""
        return float(self.y[k + 1])

    def regressor(self, k: int) -> np.ndarray:
        return regressor(self, k)

    def regressors(self) -> np.ndarray:
        """All phi_0..phi_{K} stacked as rows."""
        return np.array([regressor(self, k) for k in range(self.steps)])


def _lagged(series: np.ndarray, k: int, count: int) -> np.ndarray:
    """series[k], series[k-1], ..., series[k-count+1] with zeros for negative indices."""
    out = np.zeros(count)
    lo = max(0, k - count + 1)
    window = series[lo:k + 1][::-1]
    out[:len(window)] = window
    return out


def regressor(history: SignalHistory, k: int) -> np.ndarray:
    """phi_k = [y_k, ..., y_{k-p+1}, u_k, ..., u_{k-q+1}]."""
    return np.concatenate([_lagged(history.y, k, history.p), _lagged(history.u, k, history.q)])


def simulate(model: ARXModel, u: Sequence[float], w: Sequence[float], y0: float = 0.0) -> np.ndarray:
    """Outputs y_1..y_{K+1} for inputs u_0..u_K and noises w_1..w_{K+1}."""
    u = np.asarray(u, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if u.shape != w.shape:
        raise ParameterError(f"Need one noise per input, got {len(u)} inputs and {len(w)} noises")
    if u.size and max(np.max(np.abs(u)), np.max(np.abs(w))) > model.L:
        logger.warning(f"Inputs or noises exceed the signal bound L={model.L}")
    if abs(y0) > model.L:
        logger.warning(f"|y_0|={abs(y0)} exceeds the signal bound L={model.L}")

    history = SignalHistory(np.zeros(len(u) + 1), u, w, model.p, model.q)
    history.y[0] = y0
    theta = model.theta
    for k in range(len(u)):
        history.y[k + 1] = regressor(history, k) @ theta + w[k]
    return history.y[1:].copy()


def generate_signals(model: ARXModel, steps: int, rng: np.random.Generator,
                     input_range: Sequence[float] = (1.0, 5.0),
                     noise_range: Sequence[float] = (-5.0, 5.0), y0: float = 0.0) -> SignalHistory:
    """Uniform inputs and noises for `steps` regressors, with the resulting outputs."""
    u = rng.uniform(input_range[0], input_range[1], steps)
    w = rng.uniform(noise_range[0], noise_range[1], steps)
    y = np.concatenate([[y0], simulate(model, u, w, y0)])
    return SignalHistory(y, u, w, model.p, model.q)


# =============================================================================
# Stability
# =============================================================================

def companion_matrix(model: ARXModel) -> np.ndarray:
    """First row a, identity on the subdiagonal."""
    p = model.p
    A = np.zeros((p, p))
    A[0, :] = model.a
    A[1:, :-1] = np.eye(p - 1)
    return A


def characteristic_roots(model: ARXModel) -> np.ndarray:
    """Roots of z^p - a_1 z^{p-1} - ... - a_p."""
    coeffs = np.concatenate([[1.0], -np.asarray(model.a)])
    roots = np.roots(coeffs)
    if roots.size:
        residual = float(np.max(np.abs(np.polyval(coeffs, roots))))
        if residual > ROOT_RESIDUAL_TOL:
            logger.warning(f"Characteristic root residual {residual:.2e} exceeds {ROOT_RESIDUAL_TOL}")
    # np.roots drops trailing zero coefficients
    return np.concatenate([roots, np.zeros(model.p - roots.size)])


def spectral_radius(model: ARXModel) -> float:
    return float(np.max(np.abs(characteristic_roots(model))))


def decay_constant(model: ARXModel) -> float:
    """Smallest-index constant c >= 1 with ||A^k||_2 <= c ((rho_A + 1) / 2)^k for all k.

    With B = A / gamma, the first r >= 1 with ||B^r|| <= 1 gives
    c = max(1, ||B^1||, ..., ||B^{r-1}||) by submultiplicativity.
    """
    rho = spectral_radius(model)
    if rho >= 1:
        raise DomainError(f"Model is not stable: rho_A = {rho}")
    gamma = (rho + 1) / 2
    B = companion_matrix(model) / gamma
    power = np.eye(model.p)
    c = 1.0
    for _ in range(MAX_DECAY_POWER):
        power = power @ B
        norm = np.linalg.norm(power, 2)
        if norm <= 1:
            return c
        c = max(c, norm)
    raise PrecisionError(f"No decay index within {MAX_DECAY_POWER} powers (rho_A = {rho})")


def compute_G1(model: ARXModel) -> float:
    """c gamma L + 2 c sqrt((q + 1)(1 + sum b^2)) L / (1 - rho_A)."""
    rho = spectral_radius(model)
    c = decay_constant(model)
    gamma = (rho + 1) / 2
    b_sq = sum(x * x for x in model.b)
    return c * gamma * model.L + 2 * c * math.sqrt((model.q + 1) * (1 + b_sq)) * model.L / (1 - rho)


def compute_G2(G1: float, N: int, gamma: float, delta: float, theta_bar: float) -> float:
    """(G1 + (1 + N(2N+1) Gamma)/Delta)^2 (1 + theta_bar + 1/Delta) + (N + 1) Gamma / Delta."""
    noise = (1 + N * (2 * N + 1) * gamma) / delta
    return (G1 + noise) ** 2 * (1 + theta_bar + 1 / delta) + (N + 1) * gamma / delta


# =============================================================================
# Validation
# =============================================================================

@dataclass(frozen=True)
class ExcitationResult:
    passed: bool
    min_eigenvalue: float
    windows: int


def check_excitation(regressors: np.ndarray, K: int, delta: float) -> ExcitationResult:
    """Smallest eigenvalue of (1/K) sum phi phi^T over every length-K window."""
    phi = np.asarray(regressors, dtype=np.float64)
    n, d = phi.shape
    if not 1 <= K <= n:
        raise ParameterError(f"Window length must be in 1..{n}, got {K}")
    if K < d:
        logger.warning(f"Window length {K} below regressor dimension {d}")
    outer = np.einsum('ki,kj->kij', phi, phi)
    cums = np.concatenate([np.zeros((1, d, d)), np.cumsum(outer, axis=0)])
    windows = (cums[K:] - cums[:-K]) / K
    lam = float(np.min(np.linalg.eigvalsh(windows)[:, 0]))
    return ExcitationResult(lam >= delta and lam > 0, lam, len(windows))


def validate_params(model: ARXModel, N: int, P: int, delta: float, sigma: float, gamma: int,
                    alpha: float, theta_bar: float, theta0: Optional[Sequence[float]] = None,
                    input_range: Optional[Sequence[float]] = None,
                    noise_range: Optional[Sequence[float]] = None,
                    delta_hat: Optional[float] = None) -> ParamReport:
    """Evaluate every condition; failures are recorded, never raised."""
    report = ParamReport(inputs={
        'p': model.p, 'q': model.q, 'a': list(model.a), 'b': list(model.b), 'L': model.L,
        'N': N, 'P': str(P), 'P_bits': int(P).bit_length(), 'delta': delta, 'sigma': sigma,
        'gamma': gamma, 'alpha': alpha, 'theta_bar': theta_bar,
    })

    report.rho_A = spectral_radius(model)
    stable = report.rho_A < 1
    report.add('assumption1_stability', stable, f"rho_A = {report.rho_A:.6g} < 1")
    if stable:
        report.c = decay_constant(model)
        report.G1 = compute_G1(model)
        report.G2 = compute_G2(report.G1, N, gamma, delta, theta_bar)

    report.add('ring_power_of_two', N >= 2 and N & (N - 1) == 0, f"N = {N}")
    report.add('ring_capacity', N >= 2 * model.dim, f"N = {N} >= 2(p+q) = {2 * model.dim}")

    G2 = report.G2
    report.add('decryption_envelope', stable and 2 * G2 + 1 <= P, f"2 G2 + 1 = {2 * G2 + 1:.6g} <= P")
    scaled = 2 * G2 * delta ** 3 + 1 if stable else math.inf
    report.add('scaled_envelope', stable and scaled <= P,
               f"2 G2 Delta^3 + 1 = 2^{math.log2(scaled):.1f} <= P = 2^{math.log2(P):.1f}")

    alpha_max = 1 / (N * report.G1 ** 2) if stable else 0.0
    report.add('assumption6_step_size', stable and 0 < alpha <= alpha_max,
               f"alpha = {alpha:.3g} <= 1/(N G1^2) = {alpha_max:.3g}")
    if not report.verdict('assumption6_step_size').passed:
        logger.warning(f"Step size {alpha:.3g} above the admissible bound {alpha_max:.3g}")

    trunc = check_truncation_condition(sigma, gamma, N)
    report.add('truncation', trunc.passed, f"Gamma = {gamma} >= sigma(sqrt(2) N + 1) = {trunc.threshold:.1f}")
    if not trunc.passed:
        logger.warning(f"Truncation value {gamma} below threshold {trunc.threshold:.1f}")

    if theta0 is not None:
        n_theta = float(np.linalg.norm(model.theta))
        n_theta0 = float(np.linalg.norm(theta0))
        report.add('assumption2_feasible', max(n_theta, n_theta0) <= theta_bar,
                   f"|theta| = {n_theta:.4g}, |theta0| = {n_theta0:.4g} <= theta_bar = {theta_bar}")
    if input_range is not None and noise_range is not None:
        bound = max(abs(x) for x in list(input_range) + list(noise_range))
        report.add('assumption3_bounds', bound <= model.L, f"max |u|, |w| = {bound} <= L = {model.L}")
    if noise_range is not None:
        lo, hi = noise_range
        report.add('assumption4_zero_mean', math.isclose(lo, -hi), f"noise range [{lo}, {hi}] symmetric")
    if delta_hat is not None:
        report.delta_hat = delta_hat
        report.add('assumption5_excitation', delta_hat > 0, f"delta_hat = {delta_hat:.4g} > 0")

    logger.debug(f"validate_params: failures={report.failures}")
    return report
