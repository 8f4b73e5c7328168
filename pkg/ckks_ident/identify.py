"""
Encrypted Parameter Identification
==================================

Projected stochastic approximation

    theta_{k+1} = Proj_X(theta_k + alpha / (k+1) * phi_k (y_{k+1} - phi_k^T theta_k))

run as a two-role protocol. Per iteration:

  1. Sensor encrypts phi_k (scale Delta) and y_{k+1} (broadcast, scale
     Delta^2), encodes theta_k (plaintext, scale Delta) and sends all three.
  2. Cloud computes ct_k = Mult(phi, Add(y, -Dot(theta, phi))), scale Delta^3.
  3. Sensor decrypts and decodes ct_k into mt_k (first p+q real slots) and
     sends mt_k back.
  4. Cloud applies the projected update and returns theta_{k+1}.

The roles share nothing but the `Channel`. Per-mode drivers live in
`handlers/`.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .arx import ARXModel, SignalHistory, generate_signals
from .ckks import (
    Ciphertext,
    CryptoParams,
    PublicKey,
    RotationKeySet,
    SecretKey,
    decrypt,
    encrypt,
    hom_add,
    hom_dot,
    hom_mult,
    hom_neg,
    keygen,
)
from .config import IMAG_RESIDUE_WARN, WRAP_GUARD_DIVISOR
from .encoding import Plaintext, decode, encode_real
from .errors import ConfigError, CorrectnessViolation, ParameterError, UsageError
from .models.record import IterationRecord
from .sampling import make_rng

logger = logging.getLogger(__name__)

MODES = ('plaintext', 'encrypted', 'dual')


# =============================================================================
# Configuration
# =============================================================================

@dataclass(frozen=True)
class ProjectionSet:
    """Closed Euclidean ball of radius theta_bar around the origin."""

    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ParameterError(f"Projection radius must be positive, got {self.radius}")

    def contains(self, x, tol: float = 1e-12) -> bool:
        return float(np.linalg.norm(x)) <= self.radius + tol


def project(x, X: ProjectionSet) -> np.ndarray:
    """x if |x| <= theta_bar, else x theta_bar / |x|."""
    x = np.asarray(x, dtype=np.float64)
    norm = float(np.linalg.norm(x))
    if norm <= X.radius:
        return x.copy()
    return x * (X.radius / norm)


@dataclass(frozen=True)
class Seeds:
    plant: int = 2024
    crypto: int = 7
    quantizer: int = 11

    def to_dict(self) -> Dict[str, int]:
        return {'plant': self.plant, 'crypto': self.crypto, 'quantizer': self.quantizer}


@dataclass(frozen=True)
class IdentConfig:
    alpha: float
    theta0: Tuple[float, ...]
    theta_bar: float
    k_max: int
    mode: str = 'plaintext'
    seeds: Seeds = field(default_factory=Seeds)
    input_range: Tuple[float, float] = (1.0, 5.0)
    noise_range: Tuple[float, float] = (-5.0, 5.0)

    def __post_init__(self):
        object.__setattr__(self, 'theta0', tuple(float(x) for x in self.theta0))
        if self.mode not in MODES:
            raise ConfigError(f"Unknown mode '{self.mode}', expected one of {MODES}")
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha}")
        if self.k_max < 0:
            raise ConfigError(f"k_max must be >= 0, got {self.k_max}")
        if not self.projection.contains(self.theta0):
            raise ConfigError(f"theta0 lies outside the ball of radius {self.theta_bar}")

    @property
    def projection(self) -> ProjectionSet:
        return ProjectionSet(self.theta_bar)


# =============================================================================
# Channel
# =============================================================================

@dataclass(frozen=True)
class TranscriptEntry:
    step: int
    sender: str
    kind: str
    size: int


class Channel:
    """In-process FIFO between the two roles, recording every message."""

    def __init__(self):
        self._queue = deque()
        self.transcript: List[TranscriptEntry] = []

    def send(self, step: int, sender: str, kind: str, payload: Any):
        self._queue.append((kind, payload))
        self.transcript.append(TranscriptEntry(step, sender, kind, _payload_size(payload)))

    def receive(self, kind: str) -> Any:
        if not self._queue:
            raise UsageError(f"Channel empty while waiting for '{kind}'")
        got, payload = self._queue.popleft()
        if got != kind:
            raise UsageError(f"Expected '{kind}' message, got '{got}'")
        return payload

    def __len__(self):
        return len(self._queue)


def _payload_size(payload) -> int:
    """Ring elements for crypto payloads, floats otherwise."""
    if isinstance(payload, SensorMessage):
        return len(payload.phi.parts) + len(payload.y.parts) + 1
    if isinstance(payload, Ciphertext):
        return len(payload.parts)
    return int(np.size(payload))


# =============================================================================
# Protocol Steps
# =============================================================================

@dataclass(frozen=True)
class SensorMessage:
    phi: Ciphertext
    y: Ciphertext
    theta: Plaintext


def plaintext_mt(phi, y: float, theta_hat) -> np.ndarray:
    """phi (y - phi^T theta_hat)."""
    phi = np.asarray(phi, dtype=np.float64)
    return phi * (y - phi @ np.asarray(theta_hat, dtype=np.float64))


def sensor_step_encrypt(phi, y: float, theta_hat, params: CryptoParams, pk: PublicKey,
                        rng: np.random.Generator,
                        quant_rng: Optional[np.random.Generator] = None) -> SensorMessage:
    """Encrypt phi at Delta and y at Delta^2; encode theta_hat at Delta without encryption."""
    quant_rng = quant_rng or rng
    delta, basis, ring = params.delta, params.basis, params.ring
    phi_pt = encode_real(phi, 'zero', delta, basis, ring, quant_rng)
    y_pt = encode_real([y], 'broadcast', delta * delta, basis, ring, quant_rng)
    theta_pt = encode_real(theta_hat, 'zero', delta, basis, ring, quant_rng)
    return SensorMessage(
        phi=encrypt(phi_pt, pk, params.noise, rng),
        y=encrypt(y_pt, pk, params.noise, rng),
        theta=theta_pt,
    )


def cloud_step_eval(message: SensorMessage, rot_keys: RotationKeySet) -> Ciphertext:
    """Mult(phi, Add(y, -Dot(theta, phi)))."""
    residual = hom_add(message.y, hom_neg(hom_dot(message.theta, message.phi, rot_keys)))
    return hom_mult(message.phi, residual)


def decrypt_slots(ct: Ciphertext, sk: SecretKey, params: CryptoParams,
                  iteration: Optional[int] = None) -> np.ndarray:
    """Decrypted and decoded slots; raises when the plaintext wrapped around P."""
    pt = decrypt(ct, sk)
    guard = params.P // WRAP_GUARD_DIVISOR
    if pt.poly.inf_norm() > guard:
        raise CorrectnessViolation(
            "Decrypted coefficient beyond P/4: the message bound 2 G2 + 1 <= P does not hold",
            iteration,
        )
    return decode(pt, params.basis)


def _real_slots(slots: np.ndarray, iteration: Optional[int]) -> Tuple[np.ndarray, float]:
    residue = float(np.max(np.abs(slots.imag))) if slots.size else 0.0
    if residue > IMAG_RESIDUE_WARN:
        logger.warning(f"Imaginary residue {residue:.2e} in mt (iteration {iteration})")
    return slots.real.copy(), residue


def sensor_step_decrypt(ct: Ciphertext, sk: SecretKey, params: CryptoParams, dim: int,
                        iteration: Optional[int] = None) -> np.ndarray:
    """Real parts of the first p+q slots of Dcd(Dec(ct))."""
    mt, _ = _real_slots(decrypt_slots(ct, sk, params, iteration)[:dim], iteration)
    return mt


def cloud_step_update(theta_hat, mt, k: int, alpha: float, X: ProjectionSet) -> np.ndarray:
    """Proj_X(theta_hat + alpha / (k+1) * mt)."""
    return project(np.asarray(theta_hat, dtype=np.float64) + alpha / (k + 1) * np.asarray(mt), X)


# =============================================================================
# Roles
# =============================================================================

class Sensor:
    """Holds the signals and the secret key; sees theta only as the cloud returns it."""

    name = 'sensor'

    def __init__(self, history: SignalHistory, params: CryptoParams, sk: SecretKey, pk: PublicKey,
                 channel: Channel, rng: np.random.Generator, quant_rng: np.random.Generator,
                 theta0: Sequence[float]):
        self.history = history
        self.params = params
        self.sk = sk
        self.pk = pk
        self.channel = channel
        self.rng = rng
        self.quant_rng = quant_rng
        self.theta_hat = np.asarray(theta0, dtype=np.float64)
        self.dim = history.p + history.q
        self.last_mt: Optional[np.ndarray] = None
        self.last_residue = 0.0

    def send_data(self, k: int):
        phi = self.history.regressor(k)
        message = sensor_step_encrypt(phi, self.history.output(k), self.theta_hat,
                                      self.params, self.pk, self.rng, self.quant_rng)
        self.channel.send(k, self.name, 'data', message)

    def answer(self, k: int):
        ct = self.channel.receive('ct')
        slots = decrypt_slots(ct, self.sk, self.params, iteration=k)[:self.dim]
        self.last_mt, self.last_residue = _real_slots(slots, k)
        self.channel.send(k, self.name, 'mt', self.last_mt)

    def receive_estimate(self):
        self.theta_hat = np.asarray(self.channel.receive('estimate'), dtype=np.float64)


class Cloud:
    """Evaluates homomorphically and owns the estimate update."""

    name = 'cloud'

    def __init__(self, rot_keys: RotationKeySet, channel: Channel, alpha: float,
                 projection: ProjectionSet, theta0: Sequence[float]):
        self.rot_keys = rot_keys
        self.channel = channel
        self.alpha = alpha
        self.projection = projection
        self.theta_hat = np.asarray(theta0, dtype=np.float64)

    def evaluate(self, k: int):
        message = self.channel.receive('data')
        self.channel.send(k, self.name, 'ct', cloud_step_eval(message, self.rot_keys))

    def update(self, k: int):
        mt = self.channel.receive('mt')
        self.theta_hat = cloud_step_update(self.theta_hat, mt, k, self.alpha, self.projection)
        self.channel.send(k, self.name, 'estimate', self.theta_hat.copy())


# =============================================================================
# Driver
# =============================================================================

@dataclass
class IdentificationResult:
    records: List[IterationRecord]
    final_theta: np.ndarray
    final_err: Optional[float]
    mode: str
    seeds: Seeds
    shadow_theta: Optional[np.ndarray] = None
    transcript: List[TranscriptEntry] = field(default_factory=list)

    @property
    def max_noise_inf(self) -> Optional[float]:
        values = [r.noise_inf for r in self.records if r.noise_inf is not None]
        return max(values) if values else None

    def errors(self) -> np.ndarray:
        return np.array([r.err_norm for r in self.records] + [self.final_err], dtype=np.float64)

    def summary(self) -> Dict[str, Any]:
        return {
            'mode': self.mode,
            'iterations': len(self.records),
            'final_theta': self.final_theta.tolist(),
            'final_err': self.final_err,
            'shadow_theta': None if self.shadow_theta is None else self.shadow_theta.tolist(),
            'max_noise_inf': self.max_noise_inf,
            'messages': len(self.transcript),
            'seeds': self.seeds.to_dict(),
        }


def desk_step_size(regressors) -> float:
    """2 / lambda_min of the sample regressor covariance."""
    phi = np.asarray(regressors, dtype=np.float64)
    cov = phi.T @ phi / len(phi)
    lam = float(np.linalg.eigvalsh(cov)[0])
    if lam <= 0:
        raise ParameterError("Regressors are not persistently exciting")
    return 2.0 / lam


def _is_decade(k: int) -> bool:
    while k >= 10 and k % 10 == 0:
        k //= 10
    return k == 1


def run_identification(model: ARXModel, config: IdentConfig, crypto: Optional[CryptoParams] = None,
                       keys: Optional[Tuple[SecretKey, PublicKey, RotationKeySet]] = None,
                       history: Optional[SignalHistory] = None,
                       theta_true: Optional[Sequence[float]] = None) -> IdentificationResult:
    """Run k = 0..k_max-1 and return the trajectory plus the final estimate."""
    from .handlers import get_handler

    if len(config.theta0) != model.dim:
        raise ConfigError(f"theta0 has {len(config.theta0)} entries, model needs p+q = {model.dim}")
    if config.mode != 'plaintext' and crypto is None:
        raise UsageError(f"Mode '{config.mode}' needs crypto parameters")

    if history is None:
        history = generate_signals(model, config.k_max, make_rng(config.seeds.plant),
                                   config.input_range, config.noise_range)
    if history.steps < config.k_max:
        raise ParameterError(f"Signal history covers {history.steps} steps, need {config.k_max}")
    theta = np.asarray(model.theta if theta_true is None else theta_true, dtype=np.float64)

    crypto_rng = make_rng(config.seeds.crypto)
    if config.mode != 'plaintext' and keys is None:
        keys = keygen(crypto, crypto_rng)

    handler = get_handler(config.mode)(history, config, crypto=crypto, keys=keys,
                                       rng=crypto_rng, quant_rng=make_rng(config.seeds.quantizer))

    records = []
    theta_hat = np.asarray(config.theta0, dtype=np.float64)
    for k in range(config.k_max):
        shadow = handler.shadow_theta
        outcome = handler.step(k, theta_hat)
        records.append(IterationRecord(
            k=k,
            theta_hat=theta_hat.tolist(),
            mt=outcome.mt.tolist(),
            err_norm=float(np.linalg.norm(theta_hat - theta)),
            noise_inf=outcome.noise_inf,
            shadow_err=None if shadow is None else float(np.linalg.norm(shadow - theta)),
            imag_residue=outcome.imag_residue,
        ))
        theta_hat = outcome.theta_next
        if _is_decade(k + 1):
            logger.info(f"k={k + 1}: |theta_hat - theta| = {np.linalg.norm(theta_hat - theta):.6g}")

    final_err = float(np.linalg.norm(theta_hat - theta))
    logger.info(f"Finished {config.k_max} iterations ({config.mode}), final error {final_err:.6g}")
    return IdentificationResult(
        records=records,
        final_theta=theta_hat,
        final_err=final_err,
        mode=config.mode,
        seeds=config.seeds,
        shadow_theta=handler.shadow_theta,
        transcript=handler.transcript,
    )
