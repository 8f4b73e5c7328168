"""
ckks-ident - Command Line Application
=====================================

Encrypted ARX parameter identification over a CKKS-style scheme.

Run: python -m ckks_ident <command> [options]

Commands:
    keygen          Generate a key set
    validate        Check every parameter condition
    simulate        Write a plant trajectory
    identify        Run the identification loop
    verify-lemma1   Tail and distance checks on small lattices
    bench           Operation timings
"""

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from . import __version__
from .arx import check_excitation, generate_signals, validate_params
from .bench import DEFAULT_DIMS, check_trend, format_table, run_bench
from .ckks import keygen
from .config import LOG_FORMAT, LOG_LEVEL, OUT_DIR, SCHEMA_VERSION
from .errors import CkksIdentError, ConfigError, CorrectnessViolation, ParameterMismatchError
from .identify import IdentificationResult, desk_step_size, run_identification
from .models.experiment import ExperimentConfig
from .models.record import csv_header
from .plotting import render_error_plot
from .sampling import make_rng
from .serialization import load_keys, save_keys
from .statdist import (
    LatticeSpec,
    banaszczyk_bound,
    check_truncation_condition,
    convolved_distance,
    max_smoothing_tau,
    smoothing_condition_holds,
    smoothing_parameter,
    tail_ratio,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_CORRECTNESS = 3

# Window length of the excitation estimate in `validate`
EXCITATION_WINDOW = 200


# =============================================================================
# Helpers
# =============================================================================

def _banner(title: str):
    print("=" * 60)
    print(f"  ckks-ident {title}")
    print("=" * 60)
    print(f"  Version: {__version__}")


def _load_config(args) -> ExperimentConfig:
    if getattr(args, 'config', None):
        config = ExperimentConfig.from_file(args.config)
    elif getattr(args, 'preset', None):
        config = ExperimentConfig.from_preset(args.preset)
    else:
        raise ConfigError("Give --config FILE or --preset NAME")
    if config.log_level and not (getattr(args, 'verbose', False) or getattr(args, 'quiet', False)):
        logging.getLogger().setLevel(config.log_level.upper())
    return config.with_overrides(
        mode=getattr(args, 'mode', None),
        plant=getattr(args, 'seed_plant', None),
        crypto=getattr(args, 'seed_crypto', None),
        quantizer=getattr(args, 'seed_quantizer', None),
        k_max=getattr(args, 'k_max', None),
    )


def _out_path(path: Optional[str], default_name: str, out_dir: Optional[str] = None) -> Path:
    out = Path(path) if path else Path(out_dir or OUT_DIR) / default_name
    out.parent.mkdir(parents=True, exist_ok=True)
    return out


def _write_csv(path: Path, header: List[str], rows: List[List[Any]]):
    with open(path, 'w', newline='') as f:
        f.write(f"# schema_version={SCHEMA_VERSION}\n")
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)


def write_trajectory(result: IdentificationResult, dim: int, csv_path: Path,
                     with_noise: bool) -> Dict[str, str]:
    """CSV, JSON summary and gnuplot .dat next to each other."""
    _write_csv(csv_path, csv_header(dim, with_noise), [r.csv_row(dim, with_noise) for r in result.records])

    json_path = csv_path.with_suffix('.json')
    summary = dict(result.summary(), schema_version=SCHEMA_VERSION)
    json_path.write_text(json.dumps(summary, indent=2))

    dat_path = csv_path.with_suffix('.dat')
    with open(dat_path, 'w') as f:
        cols = ['k', 'err_norm'] + (['noise_inf', 'shadow_err'] if with_noise else [])
        f.write("# " + " ".join(cols) + "\n")
        for r in result.records:
            values = [r.k, r.err_norm]
            if with_noise:
                values += [r.noise_inf, r.shadow_err]
            f.write(" ".join("nan" if v is None else repr(v) for v in values) + "\n")
    return {'csv': str(csv_path), 'json': str(json_path), 'dat': str(dat_path)}


# =============================================================================
# Commands
# =============================================================================

def cmd_keygen(args) -> int:
    _banner("keygen")
    path = Path(args.params)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Cannot read parameters {path}: {e}") from e
    if 'crypto' not in data:
        data = {'model': {'a': [0.0], 'b': [0.0]}, 'crypto': data,
                'ident': {'alpha': 1.0, 'theta0': [0.0, 0.0], 'theta_bar': 1.0, 'k_max': 0}}
    params = ExperimentConfig.from_dict(data).build_crypto()

    print(f"  N = {params.N}, log2 P = {params.ring.bits}, seed = {args.seed}")
    sk, pk, rot_keys = keygen(params, make_rng(args.seed))
    paths = save_keys(Path(args.out) if args.out else Path(OUT_DIR) / "keys", params, sk, pk, rot_keys)
    for name, p in paths.items():
        print(f"  [OK] {name:<9} {p}")
    return EXIT_OK


def cmd_validate(args) -> int:
    _banner("validate")
    config = _load_config(args)
    crypto = config.build_crypto()
    delta_hat = None
    if args.excitation_steps:
        history = generate_signals(config.model, args.excitation_steps, make_rng(config.ident.seeds.plant),
                                   config.ident.input_range, config.ident.noise_range)
        window = min(EXCITATION_WINDOW, args.excitation_steps)
        delta_hat = check_excitation(history.regressors(), window, 0.0).min_eigenvalue

    report = validate_params(
        config.model, crypto.N, crypto.P, crypto.delta, crypto.noise.sigma, crypto.noise.gamma,
        config.ident.alpha, config.ident.theta_bar, theta0=config.ident.theta0,
        input_range=config.ident.input_range, noise_range=config.ident.noise_range,
        delta_hat=delta_hat,
    )
    print(report.to_text())
    out = _out_path(args.out, f"{config.name}_report.json", config.output.get('dir'))
    out.write_text(json.dumps(report.to_dict(), indent=2))
    print(f"  Report: {out}")
    return EXIT_OK if report.all_passed else EXIT_FAIL


def cmd_simulate(args) -> int:
    _banner("simulate")
    config = _load_config(args)
    steps = args.steps if args.steps is not None else config.ident.k_max
    history = generate_signals(config.model, steps, make_rng(config.ident.seeds.plant),
                               config.ident.input_range, config.ident.noise_range)
    rows = [[k, history.u[k], history.w[k], history.output(k)] for k in range(steps)]
    out = _out_path(args.out, f"{config.name}_plant.csv", config.output.get('dir'))
    _write_csv(out, ['k', 'u_k', 'w_k1', 'y_k1'], rows)
    print(f"  [OK] {steps} steps -> {out}")
    return EXIT_OK


def cmd_identify(args) -> int:
    _banner("identify")
    config = _load_config(args)
    mode = config.ident.mode

    history = generate_signals(config.model, config.ident.k_max, make_rng(config.ident.seeds.plant),
                               config.ident.input_range, config.ident.noise_range)
    if args.desk_alpha:
        alpha = desk_step_size(history.regressors())
        config = config.with_overrides(alpha=alpha)
        print(f"  alpha = 2 / lambda_min = {alpha:.6g}")

    crypto = keys = None
    if mode != 'plaintext':
        crypto = config.build_crypto()
        if args.keys:
            loaded, sk, pk, rot_keys = load_keys(args.keys)
            if loaded.ring != crypto.ring:
                raise ParameterMismatchError(f"Key set in {args.keys} does not match the configured ring")
            keys = (sk, pk, rot_keys)
        print(f"  N = {crypto.N}, log2 P = {crypto.ring.bits}, Delta = 2^{math.log2(crypto.delta):g}")

    print(f"  Mode: {mode}, iterations: {config.ident.k_max}, alpha: {config.ident.alpha:.6g}")
    print("=" * 60)
    result = run_identification(config.model, config.ident, crypto, keys=keys, history=history)

    out_dir = config.output.get('dir')
    paths = write_trajectory(result, config.model.dim, _out_path(args.out, f"{config.name}_{mode}.csv", out_dir),
                             result.max_noise_inf is not None)
    plot = args.plot
    if plot is None and config.output.get('plot'):
        plot = str(_out_path(None, config.output['plot'], out_dir))
    if plot:
        series = {mode: result.errors()}
        if result.shadow_theta is not None:
            series['plaintext shadow'] = [r.shadow_err for r in result.records] + [
                float(np.linalg.norm(result.shadow_theta - config.model.theta))]
        plotted = render_error_plot(series, plot)
        if not plotted['success']:
            logger.warning(f"Plot skipped: {plotted['error']}")
        else:
            paths['png'] = plotted['path']

    print(f"  [OK] final |theta_hat - theta| = {result.final_err:.6g}")
    if result.max_noise_inf is not None:
        print(f"  max |mt_enc - mt_plain|_inf = {result.max_noise_inf:.3e}")
    for kind, p in paths.items():
        print(f"  {kind:<5} {p}")
    return EXIT_OK


def lemma1_rows(sigma: float, gammas: List[float], dim: int, tau: Optional[float]) -> List[Dict[str, Any]]:
    """One row per (check, Gamma): bound, measured value and verdict."""
    lattice = LatticeSpec(dim=dim)
    rows = []

    def add(check, gamma, bound, measured, applicable=True):
        verdict = ('PASS' if measured <= bound else 'FAIL') if applicable else 'N/A'
        rows.append({'check': check, 'sigma': sigma, 'gamma': gamma, 'dim': dim, 'tau': tau,
                     'bound': bound, 'measured': measured, 'verdict': verdict})

    eta = smoothing_parameter(lattice, math.exp(-dim))
    if dim == 1 and tau is None:
        # Just inside the admissible range
        tau = min(0.999 * max_smoothing_tau(sigma, eta), sigma)
    for gamma in gammas:
        ratio = tail_ratio(sigma, gamma, lattice)
        add('tail_vs_banaszczyk', gamma, banaszczyk_bound(sigma, gamma, dim), ratio)
        truncation = check_truncation_condition(sigma, gamma, dim)
        add('tail_vs_exp_minus_n', gamma, math.exp(-dim), ratio, truncation.passed)
        if dim == 1:
            holds = truncation.passed and smoothing_condition_holds(sigma, tau, eta)
            distance = convolved_distance(sigma, gamma, tau, lattice)
            add('convolved_distance', gamma, 3 * math.exp(-dim), distance, holds)
            add('distance_vs_tail', gamma, ratio + 2 * math.exp(-dim), distance,
                smoothing_condition_holds(sigma, tau, eta))
    return rows


def cmd_verify_lemma1(args) -> int:
    _banner("verify-lemma1")
    rows = lemma1_rows(args.sigma, args.gamma, args.dim, args.tau)
    header = ['check', 'sigma', 'gamma', 'dim', 'tau', 'bound', 'measured', 'verdict']
    out = _out_path(args.out, f"lemma1_dim{args.dim}.csv")
    _write_csv(out, header, [[r[h] for h in header] for r in rows])
    for r in rows:
        print(f"  [{r['verdict']}] {r['check']:<20} Gamma={r['gamma']:<10g} "
              f"measured={r['measured']:.3e} bound={r['bound']:.3e}")
    print(f"  Table: {out}")
    return EXIT_FAIL if any(r['verdict'] == 'FAIL' for r in rows) else EXIT_OK


def cmd_bench(args) -> int:
    _banner("bench")
    rows = run_bench(args.dims, reps=args.reps)
    print(format_table(rows))
    for warning in check_trend(rows):
        logger.warning(warning)
    if args.out:
        out = _out_path(args.out, 'bench.csv')
        _write_csv(out, ['op', 'N', 'seconds', 'reps'], [[r['op'], r['N'], r['seconds'], r['reps']] for r in rows])
    return EXIT_OK


# =============================================================================
# Main
# =============================================================================

def _add_config_args(p: argparse.ArgumentParser):
    src = p.add_mutually_exclusive_group()
    src.add_argument('--config', help='Experiment JSON file')
    src.add_argument('--preset', help='Built-in experiment (reference, desk, tiny)')
    p.add_argument('--seed-plant', type=int)
    p.add_argument('--seed-crypto', type=int)
    p.add_argument('--seed-quantizer', type=int)
    p.add_argument('--out', help='Output file')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='ckks-ident', description=__doc__.split('\n')[4])
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true')
    verbosity.add_argument('-q', '--quiet', action='store_true')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('keygen', help='Generate a key set')
    p.add_argument('--params', required=True, help='Experiment config or crypto section JSON')
    p.add_argument('--seed', type=int, required=True)
    p.add_argument('--out', help='Output directory')
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser('validate', help='Check parameter conditions')
    _add_config_args(p)
    p.add_argument('--excitation-steps', type=int, default=0,
                   help='Simulate this many steps to estimate the excitation level')
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser('simulate', help='Write a plant trajectory')
    _add_config_args(p)
    p.add_argument('--steps', type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser('identify', help='Run the identification loop')
    _add_config_args(p)
    p.add_argument('--mode', choices=['plaintext', 'encrypted', 'dual'])
    p.add_argument('--k-max', type=int)
    p.add_argument('--keys', help='Key directory written by keygen')
    p.add_argument('--desk-alpha', action='store_true', help='Use alpha = 2 / lambda_min of the regressors')
    p.add_argument('--plot', help='PNG path for the error plot')
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser('verify-lemma1', help='Tail and distance checks on small lattices')
    p.add_argument('--sigma', type=float, required=True)
    p.add_argument('--gamma', type=float, nargs='+', required=True)
    p.add_argument('--dim', type=int, choices=[1, 2, 3], default=1)
    p.add_argument('--tau', type=float)
    p.add_argument('--out')
    p.set_defaults(func=cmd_verify_lemma1)

    p = sub.add_parser('bench', help='Operation timings')
    p.add_argument('--dims', type=int, nargs='+', default=list(DEFAULT_DIMS))
    p.add_argument('--reps', type=int, default=3)
    p.add_argument('--out')
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, configure logging, dispatch. Returns the exit code."""
    args = build_parser().parse_args(argv)
    level = 'DEBUG' if args.verbose else 'WARNING' if args.quiet else LOG_LEVEL
    logging.basicConfig(level=level, format=LOG_FORMAT)

    try:
        return args.func(args)
    except CorrectnessViolation as e:
        print(f"  [FAIL] {e}")
        logger.error(f"Correctness violation at iteration {e.iteration}")
        return EXIT_CORRECTNESS
    except CkksIdentError as e:
        print(f"  [FAIL] {e}")
        return EXIT_CONFIG


if __name__ == '__main__':
    sys.exit(main())
