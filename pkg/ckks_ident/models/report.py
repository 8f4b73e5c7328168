"""
Parameter Report Model
======================

Outcome of the parameter validator: derived constants, one verdict per
checked condition, and an echo of every input so each verdict can be
recomputed by hand.
"""

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional


def _finite_or_none(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


@dataclass(frozen=True)
class Verdict:
    """A single PASS/FAIL check."""

    name: str
    passed: bool
    detail: str = ""

    @property
    def label(self) -> str:
        return "PASS" if self.passed else "FAIL"


@dataclass
class ParamReport:
    """Derived constants and verdicts for one model/crypto configuration."""

    # Derived constants (inf when the model is unstable)
    rho_A: float = math.nan
    c: float = math.inf
    G1: float = math.inf
    G2: float = math.inf

    verdicts: List[Verdict] = field(default_factory=list)
    inputs: Dict[str, Any] = field(default_factory=dict)

    # Excitation level estimate, when regressors were simulated
    delta_hat: Optional[float] = None

    def add(self, name: str, passed: bool, detail: str = ""):
        self.verdicts.append(Verdict(name, bool(passed), detail))

    def verdict(self, name: str) -> Verdict:
        for v in self.verdicts:
            if v.name == name:
                return v
        raise KeyError(name)

    @property
    def all_passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    @property
    def failures(self) -> List[str]:
        return [v.name for v in self.verdicts if not v.passed]

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {
            'rho_A': _finite_or_none(self.rho_A),
            'c': _finite_or_none(self.c),
            'G1': _finite_or_none(self.G1),
            'G2': _finite_or_none(self.G2),
            'delta_hat': self.delta_hat,
            'all_passed': self.all_passed,
            'verdicts': [dict(asdict(v), status=v.label) for v in self.verdicts],
            'inputs': {k: _finite_or_none(v) for k, v in self.inputs.items()},
        }

    def to_text(self) -> str:
        """Aligned human-readable table."""
        lines = [
            f"  rho_A = {self.rho_A:.6g}",
            f"  c     = {self.c:.6g}",
            f"  G1    = {self.G1:.6g}",
            f"  G2    = {self.G2:.6g}",
        ]
        if self.delta_hat is not None:
            lines.append(f"  delta = {self.delta_hat:.6g}")
        lines.append("")
        width = max((len(v.name) for v in self.verdicts), default=0)
        for v in self.verdicts:
            lines.append(f"  [{v.label}] {v.name.ljust(width)}  {v.detail}")
        return "\n".join(lines)
