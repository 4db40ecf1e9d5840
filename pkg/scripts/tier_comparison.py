"""Compare the EXACT and LAMB_DICKE tiers on one parameter point.

Usage: python3 scripts/tier_comparison.py [--omega W] [--eta E] [--t-final T] [--out DIR]
"""
import argparse
from pathlib import Path

import numpy as np

from sscool.cli.output import write_csv
from sscool.model import Tier
from sscool.cli.runners import simulate_point
from sscool.params import IonParams


def run(omega=0.1, eta=0.05, gamma=0.1, n0=10.0, cutoff=70, t_final=2000.0, samples=201, rel_tol=1e-7,
        out="runs/tier_comparison"):
    p = IonParams(gamma=gamma, omega=omega, eta=eta, n0=n0).with_ssc_detuning()
    curves = {tier: simulate_point(p, cutoff, tier, t_final, samples, rel_tol) for tier in (Tier.EXACT, Tier.LAMB_DICKE)}
    exact, ld = curves[Tier.EXACT], curves[Tier.LAMB_DICKE]
    table = np.column_stack([exact.times, exact.nbar, ld.nbar])
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    write_csv(path / "tiers.csv", "time,nbar_exact,nbar_lamb_dicke", table, {**p.as_dict(), "cutoff": cutoff, "rel_tol": rel_tol})
    gap = float(np.abs(exact.nbar - ld.nbar).max())
    print(f"max |nbar_exact - nbar_ld| = {gap:.3e} (n0 = {n0})")
    return gap


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--omega", type=float, default=0.1)
    ap.add_argument("--eta", type=float, default=0.05)
    ap.add_argument("--t-final", type=float, default=2000.0)
    ap.add_argument("--out", default="runs/tier_comparison")
    a = ap.parse_args()
    run(omega=a.omega, eta=a.eta, t_final=a.t_final, out=a.out)
