"""Cooling rate and final occupation against the carrier strength.

Usage: python3 scripts/omega_sweep.py [--out DIR] [--workers N] [other sscool flags]
"""
import sys

from sscool.cli.main import main

if __name__ == "__main__":
    sys.exit(main(["reproduce", "fig3a", *sys.argv[1:]]))
