"""
ckks-ident - Entry Point
========================

Run: python -m ckks_ident <command>
"""

import sys

from .app import main

if __name__ == '__main__':
    sys.exit(main())
