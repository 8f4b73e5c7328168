"""
Microbenchmarks
===============

Wall-clock timings of the core operations per ring dimension.
"""

import logging
import math
import time
from typing import Any, Callable, Dict, List, Sequence

from .arx import ARXModel, generate_signals
from .ckks import CryptoParams, encrypt, hom_dot, hom_mult, keygen
from .config import DEFAULT_SECRET_WEIGHT, REFERENCE_MODEL, REFERENCE_MODULUS_FACTORS, REFERENCE_THETA0
from .encoding import encode_real
from .identify import cloud_step_eval, sensor_step_decrypt, sensor_step_encrypt
from .ring import uniform_ring
from .sampling import make_rng

logger = logging.getLogger(__name__)

DEFAULT_DIMS = (1024, 2048, 4096, 8192)
OPERATIONS = ('ring_mul', 'encrypt', 'hom_mult', 'hom_dot', 'protocol_step')

# hom_dot growth between consecutive N beyond this multiple of N log N is flagged
TREND_FACTOR = 10.0


def _time(fn: Callable[[], Any], reps: int) -> float:
    """Best-of-reps seconds."""
    best = math.inf
    for _ in range(reps):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def run_bench(dims: Sequence[int] = DEFAULT_DIMS, reps: int = 3, seed: int = 1) -> List[Dict[str, Any]]:
    """One row {op, N, seconds, reps} per (operation, N)."""
    rows = []
    model = ARXModel.from_dict(REFERENCE_MODEL)
    history = generate_signals(model, 1, make_rng(seed))
    phi, y = history.regressor(0), history.output(0)

    for N in dims:
        params = CryptoParams.build(N, REFERENCE_MODULUS_FACTORS, h=min(DEFAULT_SECRET_WEIGHT, N))
        rng = make_rng(seed)
        logger.info(f"Benchmarking N={N}")
        sk, pk, rot_keys = keygen(params, rng)
        a, b = uniform_ring(params.ring, rng), uniform_ring(params.ring, rng)
        pt = encode_real(phi, 'zero', params.delta, params.basis, params.ring, rng)
        ct = encrypt(pt, pk, params.noise, rng)
        theta_pt = encode_real(REFERENCE_THETA0, 'zero', params.delta, params.basis, params.ring, rng)

        def protocol_step():
            message = sensor_step_encrypt(phi, y, REFERENCE_THETA0, params, pk, rng)
            sensor_step_decrypt(cloud_step_eval(message, rot_keys), sk, params, model.dim)

        ops = {
            'ring_mul': lambda: a * b,
            'encrypt': lambda: encrypt(pt, pk, params.noise, rng),
            'hom_mult': lambda: hom_mult(ct, ct),
            'hom_dot': lambda: hom_dot(theta_pt, ct, rot_keys),
            'protocol_step': protocol_step,
        }
        for op in OPERATIONS:
            rows.append({'op': op, 'N': N, 'seconds': _time(ops[op], reps), 'reps': reps})
    return rows


def check_trend(rows: List[Dict[str, Any]], op: str = 'hom_dot') -> List[str]:
    """Warnings where op time grows more than TREND_FACTOR times faster than N log N."""
    timings = sorted((r['N'], r['seconds']) for r in rows if r['op'] == op)
    warnings = []
    for (n0, t0), (n1, t1) in zip(timings, timings[1:]):
        expected = (n1 * math.log2(n1)) / (n0 * math.log2(n0))
        if t0 > 0 and t1 / t0 > TREND_FACTOR * expected:
            warnings.append(f"{op}: N={n0}->{n1} grew {t1 / t0:.1f}x (N log N predicts {expected:.1f}x)")
    return warnings


def format_table(rows: List[Dict[str, Any]]) -> str:
    lines = [f"{'op':<15}{'N':>8}{'seconds':>14}"]
    for r in rows:
        lines.append(f"{r['op']:<15}{r['N']:>8}{r['seconds']:>14.6f}")
    return "\n".join(lines)
