#!/usr/bin/env python
"""
ckks-ident - Standalone Entry Point

Run directly:
    python main.py identify --preset tiny

Or with environment variables:
    CKKS_IDENT_OUT_DIR=/tmp/runs python main.py validate --preset reference
"""

import os
import sys

# Ensure package is importable when running directly
if __name__ == '__main__':
    parent_dir = os.path.dirname(os.path.abspath(__file__))
    if parent_dir not in sys.path:
        sys.path.insert(0, parent_dir)

from ckks_ident.app import main

if __name__ == '__main__':
    sys.exit(main())
