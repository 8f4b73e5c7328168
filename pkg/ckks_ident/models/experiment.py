"""
Experiment Configuration Model
==============================

Schema-checked JSON experiment description:

  {
    "schema_version": 1,
    "name": "...",
    "model":  {"p", "q", "a", "b", "L", "input_range", "noise_range"},
    "crypto": {"N", "P_factors", "delta_log2", "sigma", "gamma", "h",
               "digit_bits", "security_level"},
    "ident":  {"alpha", "theta0", "theta_bar", "k_max", "mode",
               "seeds": {"plant", "crypto", "quantizer"}},
    "output": {"dir", "plot"},
    "log_level": "INFO"
  }

Unknown keys anywhere are rejected.
"""

import copy
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional

from ..arx import ARXModel
from ..ckks import CryptoParams
from ..config import DEFAULT_DIGIT_BITS, DEFAULT_SECRET_WEIGHT, DEFAULT_SECURITY_LEVEL, EXPERIMENT_PRESETS, SCHEMA_VERSION
from ..errors import CkksIdentError, ConfigError
from ..identify import IdentConfig, Seeds

TOP_KEYS = {'schema_version', 'name', 'model', 'crypto', 'ident', 'output', 'log_level'}
REQUIRED_SECTIONS = ('model', 'crypto', 'ident')
MODEL_KEYS = {'p', 'q', 'a', 'b', 'L', 'input_range', 'noise_range'}
CRYPTO_KEYS = {'N', 'P_factors', 'delta_log2', 'sigma', 'gamma', 'h', 'digit_bits', 'security_level'}
CRYPTO_REQUIRED = {'N', 'P_factors', 'delta_log2', 'sigma', 'gamma'}
IDENT_KEYS = {'alpha', 'theta0', 'theta_bar', 'k_max', 'mode', 'seeds'}
IDENT_REQUIRED = {'alpha', 'theta0', 'theta_bar', 'k_max'}
SEED_KEYS = {'plant', 'crypto', 'quantizer'}
OUTPUT_KEYS = {'dir', 'plot'}


def _check_keys(section: str, data: Any, allowed: set, required: set = frozenset()):
    if not isinstance(data, dict):
        raise ConfigError(f"Section '{section}' must be an object")
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"Unknown keys in '{section}': {sorted(unknown)}")
    missing = set(required) - set(data)
    if missing:
        raise ConfigError(f"Missing keys in '{section}': {sorted(missing)}")


@dataclass
class ExperimentConfig:
    """Validated experiment: plant, crypto section, identification settings, outputs."""

    model: ARXModel
    ident: IdentConfig
    crypto: Dict[str, Any]
    name: str = "experiment"
    output: Dict[str, Any] = field(default_factory=dict)
    log_level: Optional[str] = None
    raw: Dict[str, Any] = field(default_factory=dict, repr=False)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ExperimentConfig':
        """Validate and build. Raises ConfigError on any schema violation."""
        if not data:
            raise ConfigError("Empty configuration")
        _check_keys('config', data, TOP_KEYS, set(REQUIRED_SECTIONS))
        version = data.get('schema_version', SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"Unsupported schema_version {version} (expected {SCHEMA_VERSION})")

        m = data['model']
        _check_keys('model', m, MODEL_KEYS, {'a', 'b'})
        c = data['crypto']
        _check_keys('crypto', c, CRYPTO_KEYS, CRYPTO_REQUIRED)
        i = data['ident']
        _check_keys('ident', i, IDENT_KEYS, IDENT_REQUIRED)
        seeds = i.get('seeds', {})
        _check_keys('ident.seeds', seeds, SEED_KEYS)
        output = data.get('output', {})
        _check_keys('output', output, OUTPUT_KEYS)

        try:
            model = ARXModel.from_dict(m)
            ident = IdentConfig(
                alpha=float(i['alpha']),
                theta0=tuple(i['theta0']),
                theta_bar=float(i['theta_bar']),
                k_max=int(i['k_max']),
                mode=i.get('mode', 'plaintext'),
                seeds=Seeds(**{k: int(v) for k, v in seeds.items()}),
                input_range=tuple(m.get('input_range', (1.0, 5.0))),
                noise_range=tuple(m.get('noise_range', (-5.0, 5.0))),
            )
        except ConfigError:
            raise
        except (CkksIdentError, TypeError, ValueError) as e:
            raise ConfigError(str(e)) from e
        if len(ident.theta0) != model.dim:
            raise ConfigError(f"theta0 has {len(ident.theta0)} entries, model needs p+q = {model.dim}")

        return cls(
            model=model,
            ident=ident,
            crypto=dict(c),
            name=str(data.get('name', 'experiment')),
            output=dict(output),
            log_level=data.get('log_level'),
            raw=copy.deepcopy(data),
        )

    @classmethod
    def from_file(cls, path) -> 'ExperimentConfig':
        try:
            data = json.loads(Path(path).read_text())
        except OSError as e:
            raise ConfigError(f"Cannot read config {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config {path} is not valid JSON: {e}") from e
        return cls.from_dict(data)

    @classmethod
    def from_preset(cls, name: str) -> 'ExperimentConfig':
        if name not in EXPERIMENT_PRESETS:
            raise ConfigError(f"Unknown preset '{name}', expected one of {sorted(EXPERIMENT_PRESETS)}")
        return cls.from_dict(copy.deepcopy(EXPERIMENT_PRESETS[name]))

    def with_overrides(self, mode: Optional[str] = None, plant: Optional[int] = None,
                       crypto: Optional[int] = None, quantizer: Optional[int] = None,
                       k_max: Optional[int] = None, alpha: Optional[float] = None) -> 'ExperimentConfig':
        """Copy with CLI overrides applied."""
        seeds = self.ident.seeds
        seeds = Seeds(
            plant=seeds.plant if plant is None else plant,
            crypto=seeds.crypto if crypto is None else crypto,
            quantizer=seeds.quantizer if quantizer is None else quantizer,
        )
        try:
            ident = replace(
                self.ident,
                seeds=seeds,
                mode=self.ident.mode if mode is None else mode,
                k_max=self.ident.k_max if k_max is None else k_max,
                alpha=self.ident.alpha if alpha is None else alpha,
            )
        except CkksIdentError as e:
            raise ConfigError(str(e)) from e
        return replace(self, ident=ident)

    def build_crypto(self) -> CryptoParams:
        """Resolve the modulus and construct the scheme parameters."""
        c = self.crypto
        try:
            return CryptoParams.build(
                N=int(c['N']),
                factors=c['P_factors'],
                delta_log2=float(c['delta_log2']),
                sigma=float(c['sigma']),
                gamma=int(c['gamma']),
                h=int(c.get('h', DEFAULT_SECRET_WEIGHT)),
                digit_bits=int(c.get('digit_bits', DEFAULT_DIGIT_BITS)),
                security_level=int(c.get('security_level', DEFAULT_SECURITY_LEVEL)),
            )
        except (TypeError, KeyError) as e:
            raise ConfigError(f"Invalid crypto section: {e}") from e
        except CkksIdentError as e:
            raise ConfigError(str(e)) from e

    def to_dict(self) -> Dict[str, Any]:
        """Effective configuration, overrides included."""
        return {
            'schema_version': SCHEMA_VERSION,
            'name': self.name,
            'model': dict(self.model.to_dict(),
                          input_range=list(self.ident.input_range),
                          noise_range=list(self.ident.noise_range)),
            'crypto': copy.deepcopy(self.crypto),
            'ident': {
                'alpha': self.ident.alpha,
                'theta0': list(self.ident.theta0),
                'theta_bar': self.ident.theta_bar,
                'k_max': self.ident.k_max,
                'mode': self.ident.mode,
                'seeds': self.ident.seeds.to_dict(),
            },
        }
