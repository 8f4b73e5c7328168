"""
Identification Handlers
=======================

One handler per run mode.
"""

from .base import BaseHandler, StepOutcome
from .plaintext import PlaintextHandler
from .encrypted import EncryptedHandler
from .dual import DualHandler
from ..errors import ConfigError

__all__ = ['BaseHandler', 'StepOutcome', 'PlaintextHandler', 'EncryptedHandler', 'DualHandler']

# Handler registry
HANDLERS = {
    'plaintext': PlaintextHandler,
    'encrypted': EncryptedHandler,
    'dual': DualHandler,
}


def get_handler(mode: str) -> type:
    """Get handler class by mode."""
    try:
        return HANDLERS[mode]
    except KeyError:
        raise ConfigError(f"Unknown mode '{mode}', expected one of {sorted(HANDLERS)}") from None
