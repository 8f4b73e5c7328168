"""
Plaintext Handler
=================

mt_k = phi_k (y_{k+1} - phi_k^T theta_k) in the clear. Reference trajectory
for the encrypted modes.
"""

import numpy as np

from .base import BaseHandler, StepOutcome
from ..identify import plaintext_mt


class PlaintextHandler(BaseHandler):
    """No cryptography."""

    def step(self, k: int, theta_hat: np.ndarray) -> StepOutcome:
        mt = plaintext_mt(self.history.regressor(k), self.history.output(k), theta_hat)
        return StepOutcome(mt=mt, theta_next=self.update(theta_hat, mt, k))
