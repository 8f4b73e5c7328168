"""
Iteration Record Model
======================

One row of an identification trajectory.
"""

from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional


@dataclass
class IterationRecord:
    """State at iteration k: the estimate used and the message it produced."""

    k: int
    theta_hat: List[float]
    mt: Optional[List[float]] = None

    # Only when the true parameter is known
    err_norm: Optional[float] = None

    # Dual mode diagnostics
    noise_inf: Optional[float] = None  # |mt(encrypted) - mt(plaintext)|_inf
    shadow_err: Optional[float] = None  # plaintext trajectory run alongside

    imag_residue: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'IterationRecord':
        return cls(**data)

    def csv_row(self, dim: int, with_noise: bool) -> List[Any]:
        """k, theta_hat_1..d, err_norm, mt_1..d[, noise_inf]."""
        mt = self.mt if self.mt is not None else [''] * dim
        row = [self.k, *self.theta_hat, '' if self.err_norm is None else self.err_norm, *mt]
        if with_noise:
            row.append('' if self.noise_inf is None else self.noise_inf)
        return row


def csv_header(dim: int, with_noise: bool) -> List[str]:
    header = ['k'] + [f'theta_hat_{i}' for i in range(1, dim + 1)] + ['err_norm']
    header += [f'mt_{i}' for i in range(1, dim + 1)]
    if with_noise:
        header.append('noise_inf')
    return header
