"""
Dual Handler
============

Encrypted protocol plus two plaintext references:
  - mt_k in the clear at the same theta_k, giving the per-step noise
  - an independent plaintext trajectory on the same signals (shadow)
"""

from typing import Dict, Optional

import numpy as np

from .base import StepOutcome
from .encrypted import EncryptedHandler
from ..identify import plaintext_mt


class DualHandler(EncryptedHandler):
    """Encrypted trajectory with plaintext diagnostics."""

    def __init__(self, history, config, **kwargs):
        super().__init__(history, config, **kwargs)
        self._shadow = np.asarray(config.theta0, dtype=np.float64)

    def get_capabilities(self) -> Dict[str, bool]:
        caps = super().get_capabilities()
        caps['noise_diagnostics'] = True
        caps['shadow_trajectory'] = True
        return caps

    @property
    def shadow_theta(self) -> Optional[np.ndarray]:
        return self._shadow.copy()

    def step(self, k: int, theta_hat: np.ndarray) -> StepOutcome:
        outcome = super().step(k, theta_hat)
        phi, y = self.history.regressor(k), self.history.output(k)

        reference = plaintext_mt(phi, y, theta_hat)
        outcome.noise_inf = float(np.max(np.abs(outcome.mt - reference)))

        self._shadow = self.update(self._shadow, plaintext_mt(phi, y, self._shadow), k)
        return outcome
