#!/usr/bin/env python3
"""
k-uniform equilibrium experiments.
Run `python kgrid.py --help` for the list of commands.
"""

import sys

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
