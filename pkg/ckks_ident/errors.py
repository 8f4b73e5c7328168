"""
Exceptions
==========

Every error raised by the library derives from `CkksIdentError`, so callers
can catch the whole family at the command layer and map it to an exit code.
"""


class CkksIdentError(Exception):
    """Base class for all library errors."""


class ParameterError(CkksIdentError, ValueError):
    """Invalid ring, noise, model or protocol parameters."""


class ParameterMismatchError(ParameterError):
    """Operands belong to different rings."""


class ScaleMismatchError(CkksIdentError, ValueError):
    """Ciphertexts with different scales were combined additively."""


class UnsupportedDepthError(CkksIdentError, ValueError):
    """Ciphertext degree outside what the operation supports."""


class EncodingOverflowError(CkksIdentError, OverflowError):
    """A quantized coefficient does not fit in [-P/2, P/2)."""


class CapacityError(CkksIdentError, ValueError):
    """More values than available slots."""


class UsageError(CkksIdentError, ValueError):
    """An API was called with an invalid combination of arguments."""


class DomainError(CkksIdentError, ValueError):
    """Input outside the mathematical domain (non-finite, unstable model)."""


class RotationKeyError(CkksIdentError, KeyError):
    """No key-switching key for the requested rotation."""


class PrecisionError(CkksIdentError, ArithmeticError):
    """A numerical procedure cannot reach the requested accuracy."""


class SerializationError(CkksIdentError, ValueError):
    """Malformed key or ciphertext file."""


class ConfigError(CkksIdentError, ValueError):
    """Experiment configuration failed validation."""


class CorrectnessViolation(CkksIdentError, RuntimeError):
    """Decryption wrapped around the modulus (the decryption envelope failed)."""

    def __init__(self, message: str, iteration: int = None):
        self.iteration = iteration
        if iteration is not None:
            message = f"{message} (iteration {iteration})"
        super().__init__(message)
