#!/usr/bin/env python3
"""
Estimation Error Plot for a Preset
==================================

Runs the identification loop for one preset in plaintext and encrypted
(dual) mode and draws both error trajectories into a single PNG.

Usage:
    python scripts/reproduce_error_plot.py
    python scripts/reproduce_error_plot.py --preset reference --k-max 1000
    python scripts/reproduce_error_plot.py --desk-alpha --out results/desk_compare.png

Requirements:
    pip install -e .
"""

import argparse
import os
import sys

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from ckks_ident.arx import generate_signals
from ckks_ident.identify import desk_step_size, run_identification
from ckks_ident.models.experiment import ExperimentConfig
from ckks_ident.plotting import render_error_plot
from ckks_ident.sampling import make_rng


def main():
    parser = argparse.ArgumentParser(description=__doc__.strip().splitlines()[0])
    parser.add_argument('--preset', default='desk')
    parser.add_argument('--k-max', type=int)
    parser.add_argument('--desk-alpha', action='store_true')
    parser.add_argument('--out', default='error_comparison.png')
    args = parser.parse_args()

    print("=" * 60)
    print(f"  Error trajectories: preset '{args.preset}'")
    print("=" * 60)

    config = ExperimentConfig.from_preset(args.preset)
    if args.k_max is not None:
        config = config.with_overrides(k_max=args.k_max)
    ident = config.ident
    history = generate_signals(config.model, ident.k_max, make_rng(ident.seeds.plant),
                               ident.input_range, ident.noise_range)
    if args.desk_alpha:
        config = config.with_overrides(alpha=desk_step_size(history.regressors()))
        print(f"  alpha = {config.ident.alpha:.6g}")

    series = {}
    plain = run_identification(config.model, config.with_overrides(mode='plaintext').ident, history=history)
    series['plaintext'] = plain.errors()
    print(f"  [OK] plaintext final error {plain.final_err:.6g}")

    dual = run_identification(config.model, config.with_overrides(mode='dual').ident, config.build_crypto(),
                              history=history)
    series['encrypted'] = dual.errors()
    print(f"  [OK] encrypted final error {dual.final_err:.6g}, max noise {dual.max_noise_inf:.3e}")

    result = render_error_plot(series, args.out, title=f"Estimation error ({args.preset})")
    if result.get('success'):
        print(f"\n[OK] Plot written to {result['path']}")
        return 0
    print(f"\n[ERROR] Plot failed: {result.get('error')}")
    return 1


if __name__ == "__main__":
    sys.exit(main())
