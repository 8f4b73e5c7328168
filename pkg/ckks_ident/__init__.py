"""
ckks-ident
==========

Parameter identification of ARX systems over encrypted data.

A sensor encrypts its regressors and outputs under a CKKS-style scheme
with truncated discrete Gaussian noise; a cloud runs projected stochastic
approximation on ciphertexts and never sees a plaintext signal.

Includes:
- Ring, encoding and CKKS primitives (ring, encoding, ckks, sampling)
- Binary key and ciphertext files (serialization)
- Parameter validation and signal bounds (arx)
- Numerical truncation and smoothing checks (statdist)
- The two-role protocol in plaintext, encrypted and dual modes (identify, handlers)

Usage:
    python -m ckks_ident identify --preset tiny
"""

__version__ = '1.0.0'
