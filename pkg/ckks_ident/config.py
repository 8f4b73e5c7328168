"""
ckks-ident Configuration
"""

import os

# =============================================================================
# Runtime Configuration
# =============================================================================

# Where command outputs go when no --out is given
OUT_DIR = os.environ.get('CKKS_IDENT_OUT_DIR', os.path.join(os.getcwd(), 'results'))

LOG_LEVEL = os.environ.get('CKKS_IDENT_LOG_LEVEL', 'INFO').upper()
LOG_FORMAT = '[%(levelname)s] %(name)s: %(message)s'

# =============================================================================
# Scheme Defaults
# =============================================================================

SCHEMA_VERSION = 1

# Key switching digit width (bits) for rotation keys
DEFAULT_DIGIT_BITS = int(os.environ.get('CKKS_IDENT_DIGIT_BITS', 20))

DEFAULT_SECRET_WEIGHT = 64
DEFAULT_SECURITY_LEVEL = 128

# Schoolbook multiplication below this ring dimension
SCHOOLBOOK_MAX_N = 16

# Direct CRT-matrix evaluation up to this dimension, FFT above
DIRECT_EMBEDDING_MAX_N = 64

# Decrypted coefficients beyond P // WRAP_GUARD_DIVISOR are treated as wrapped
WRAP_GUARD_DIVISOR = 4

# Imaginary residue of mt_k above this is logged
IMAG_RESIDUE_WARN = 1e-6

# =============================================================================
# Experiment Presets
# =============================================================================

# Modulus of the numerical example: p1^3 * p2^2 with p1 the largest prime
# no more than 2^40 and p2 the largest prime no more than 2^60.
REFERENCE_MODULUS_FACTORS = [
    {'prime_bits': 40, 'power': 3},
    {'prime_bits': 60, 'power': 2},
]

REFERENCE_MODEL = {
    'p': 3,
    'q': 6,
    'a': [1.3, -0.6, 0.1],
    'b': [0.0, -1.0, -2.0, 0.5, 1.3, 2.2],
    'L': 5.0,
    'input_range': [1.0, 5.0],
    'noise_range': [-5.0, 5.0],
}

REFERENCE_THETA0 = [2.0, -1.0, -0.5, 1.3, -0.3, 0.6, 1.1, 2.2, -1.5]


def _preset(name: str, ring_dim: int, k_max: int, alpha: float, mode: str) -> dict:
    return {
        'schema_version': SCHEMA_VERSION,
        'name': name,
        'model': dict(REFERENCE_MODEL),
        'crypto': {
            'N': ring_dim,
            'P_factors': [dict(f) for f in REFERENCE_MODULUS_FACTORS],
            'delta_log2': 40,
            'sigma': 3.2,
            'gamma': 18491,
            'h': DEFAULT_SECRET_WEIGHT,
            'digit_bits': DEFAULT_DIGIT_BITS,
            'security_level': DEFAULT_SECURITY_LEVEL,
        },
        'ident': {
            'alpha': alpha,
            'theta0': list(REFERENCE_THETA0),
            'theta_bar': 7.0,
            'k_max': k_max,
            'mode': mode,
            'seeds': {'plant': 2024, 'crypto': 7, 'quantizer': 11},
        },
    }


EXPERIMENT_PRESETS = {
    # Full-size numerical example
    'reference': _preset('reference', 8192, 1000, 1e-10, 'encrypted'),
    # Same plant at a ring dimension that runs on a desk
    'desk': _preset('desk', 2048, 200, 1e-10, 'dual'),
    # Quick smoke runs
    'tiny': _preset('tiny', 64, 50, 1e-10, 'dual'),
}
