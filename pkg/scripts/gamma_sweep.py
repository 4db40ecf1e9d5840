"""Cooling rate against the linewidth.

Usage: python3 scripts/gamma_sweep.py [--out DIR] [--workers N] [other sscool flags]
"""
import sys

from sscool.cli.main import main

if __name__ == "__main__":
    sys.exit(main(["reproduce", "fig4b", *sys.argv[1:]]))
