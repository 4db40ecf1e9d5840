"""Cooling rate against the Lamb-Dicke parameter.

Usage: python3 scripts/eta_sweep.py [--out DIR] [--workers N] [other sscool flags]
"""
import sys

from sscool.cli.main import main

if __name__ == "__main__":
    sys.exit(main(["reproduce", "fig4a", *sys.argv[1:]]))
