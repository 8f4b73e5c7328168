"""
Encrypted Handler
=================

Full four-step protocol between a Sensor and a Cloud over an in-process
channel. The Cloud's estimate is authoritative; the Sensor receives it back
at the end of every iteration.
"""

import logging
from typing import Dict, List

import numpy as np

from .base import BaseHandler, StepOutcome
from ..arx import SignalHistory
from ..errors import UsageError
from ..identify import Channel, Cloud, IdentConfig, Sensor, TranscriptEntry

logger = logging.getLogger(__name__)


class EncryptedHandler(BaseHandler):
    """Sensor/Cloud protocol run."""

    def __init__(self, history: SignalHistory, config: IdentConfig, crypto=None, keys=None,
                 rng=None, quant_rng=None, **kwargs):
        super().__init__(history, config)
        if crypto is None or keys is None or rng is None:
            raise UsageError("Encrypted mode needs crypto parameters, keys and an rng")
        sk, pk, rot_keys = keys
        if crypto.N < 2 * history.p + 2 * history.q:
            raise UsageError(f"N={crypto.N} cannot hold p+q={history.p + history.q} slots")
        self.crypto = crypto
        self.channel = Channel()
        self.sensor = Sensor(history, crypto, sk, pk, self.channel, rng, quant_rng or rng, config.theta0)
        self.cloud = Cloud(rot_keys, self.channel, config.alpha, self.projection, config.theta0)

    def get_capabilities(self) -> Dict[str, bool]:
        caps = super().get_capabilities()
        caps['encrypted'] = True
        return caps

    @property
    def transcript(self) -> List[TranscriptEntry]:
        return self.channel.transcript

    def run_protocol(self, k: int) -> np.ndarray:
        """Steps 1-4 of iteration k. Returns mt_k as the sensor decoded it."""
        self.sensor.send_data(k)
        self.cloud.evaluate(k)
        self.sensor.answer(k)
        self.cloud.update(k)
        self.sensor.receive_estimate()
        return self.sensor.last_mt

    def step(self, k: int, theta_hat: np.ndarray) -> StepOutcome:
        mt = self.run_protocol(k)
        logger.debug(f"k={k}: mt = {np.array2string(mt, precision=4)}")
        return StepOutcome(mt=mt.copy(), theta_next=self.cloud.theta_hat.copy(),
                           imag_residue=self.sensor.last_residue)
