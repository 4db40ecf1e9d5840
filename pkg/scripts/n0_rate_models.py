"""Rate-model cooling curves for several initial occupations.

Usage: python3 scripts/n0_rate_models.py [--out DIR] [--workers N] [other sscool flags]
"""
import sys

from sscool.cli.main import main

if __name__ == "__main__":
    sys.exit(main(["reproduce", "fig3b", *sys.argv[1:]]))
