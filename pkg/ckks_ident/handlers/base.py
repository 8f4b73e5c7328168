"""
Base Handler
============

Abstract base class for identification-mode handlers.

A handler produces mt_k and theta_{k+1} for one iteration. Each handler
declares its capabilities via `get_capabilities()`; the command layer uses
them to choose output columns.

Capabilities:
  - encrypted          mt_k comes from the homomorphic pipeline
  - noise_diagnostics  records |mt(encrypted) - mt(plaintext)|_inf per step
  - shadow_trajectory  runs a plaintext trajectory alongside
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from ..arx import SignalHistory
from ..identify import IdentConfig, TranscriptEntry, cloud_step_update


@dataclass
class StepOutcome:
    """Result of one iteration."""

    mt: np.ndarray
    theta_next: np.ndarray
    noise_inf: Optional[float] = None
    imag_residue: Optional[float] = None


class BaseHandler(ABC):
    """Abstract base class for identification handlers."""

    def __init__(self, history: SignalHistory, config: IdentConfig, **kwargs):
        self.history = history
        self.config = config
        self.projection = config.projection

    # =========================================================================
    # Capabilities
    # =========================================================================

    def get_capabilities(self) -> Dict[str, bool]:
        return {
            'encrypted': False,
            'noise_diagnostics': False,
            'shadow_trajectory': False,
        }

    @property
    def transcript(self) -> List[TranscriptEntry]:
        """Messages exchanged so far (empty without a channel)."""
        return []

    @property
    def shadow_theta(self) -> Optional[np.ndarray]:
        return None

    # =========================================================================
    # Iteration
    # =========================================================================

    def update(self, theta_hat: np.ndarray, mt: np.ndarray, k: int) -> np.ndarray:
        return cloud_step_update(theta_hat, mt, k, self.config.alpha, self.projection)

    @abstractmethod
    def step(self, k: int, theta_hat: np.ndarray) -> StepOutcome:
        """Run iteration k from the estimate theta_hat."""
        pass
