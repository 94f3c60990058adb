#!/usr/bin/env python3
"""
Concealed adversarial attacks on time-series classifiers - main entry point
Run `python main.py --help` for the subcommands.
"""

import os
import sys

# Add current directory to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from app.cli import main

if __name__ == "__main__":
    sys.exit(main())
