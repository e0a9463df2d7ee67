#!/usr/bin/env python3
"""
FIQ Simulation Toolkit - Entry Point

Runs the fiqsim command line interface from a source checkout.
"""

import sys
from pathlib import Path

current_dir = Path(__file__).parent
sys.path.insert(0, str(current_dir))

from fiqsim.main import cli  # noqa: E402

if __name__ == "__main__":
    cli()
