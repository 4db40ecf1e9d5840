"""Exact cooling curves for several carrier strengths.

Usage: python3 scripts/fig2_trajectories.py [--out DIR] [--workers N] [other sscool flags]
"""
import sys

from sscool.cli.main import main

if __name__ == "__main__":
    sys.exit(main(["reproduce", "fig2", *sys.argv[1:]]))
