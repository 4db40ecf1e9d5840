"""Command-line entry point: ``simulate``, ``sweep``, ``analytics``, ``reproduce``."""
from __future__ import annotations

import argparse
import json
import sys

from ..numkit import IntegrationError
from . import runners
from .config import ConfigError, build_config, ensure_output_dir, read_config_file

EXIT_OK, EXIT_CONFIG, EXIT_INTEGRATION, EXIT_QUORUM = 0, 2, 3, 4

FLAG_TYPES = {"nu": float, "gamma": float, "omega": float, "delta": float, "eta": float,
              "n0": float, "cutoff": int, "tier": str, "t_final": float, "samples": int,
              "rel_tol": float, "axis": str, "grid": str, "out": str, "workers": int,
              "seed": int, "emission": str}


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="plain-text 'key = value' file; flags override it")
    for key, kind in FLAG_TYPES.items():
        # values stay strings here so the file and flags share one validator
        common.add_argument("--" + key.replace("_", "-"), dest=key, default=None,
                            metavar=kind.__name__.upper())
    parser = argparse.ArgumentParser(prog="sscool", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)
    sub.add_parser("simulate", parents=[common], help="evolve one parameter point")
    sub.add_parser("sweep", parents=[common], help="fit cooling rates along one axis")
    sub.add_parser("analytics", parents=[common], help="closed-form predictions")
    rep = sub.add_parser("reproduce", parents=[common], help="regenerate a figure bundle")
    rep.add_argument("figure", choices=runners.FIGURES)
    return parser


def _settings(ns) -> dict:
    settings = read_config_file(ns.config) if ns.config else {}
    for key in FLAG_TYPES:
        value = getattr(ns, key)
        if value is not None:
            settings[key] = value
    return settings


def main(argv=None) -> int:
    ns = _parser().parse_args(argv)
    try:
        settings = _settings(ns)
        if ns.verb == "analytics":
            cfg = build_config(settings, need_resonance=False)
            p = cfg.params
            if not cfg.delta_given and 0 <= p.omega < p.nu:
                p = p.with_ssc_detuning()
            report = runners.analytics_report(p)
            print(runners.format_report(report))
            print(json.dumps(report, ensure_ascii=False))
            if settings.get("out"):
                out = ensure_output_dir(cfg.output_dir)
                (out / "analytics.json").write_text(json.dumps(report, indent=2, ensure_ascii=False) + "\n")
            return EXIT_OK
        cfg = build_config(settings)
        if ns.verb == "simulate":
            traj = runners.run_simulate(cfg)
            print(f"wrote {cfg.output_dir / 'nbar_t.csv'}: {traj.times.size} samples, "
                  f"nbar {traj.nbar[0]:.6g} -> {traj.nbar[-1]:.6g}")
            return EXIT_OK
        if ns.verb == "sweep":
            if cfg.sweep is None:
                raise ConfigError("sweep needs --axis")
            records = runners.run_sweep(cfg)
            for r in records:
                print(f"{cfg.sweep.name}={r.axis_value:.6g} w_fit={r.w_fit:.6e} "
                      f"nbar_st_fit={r.nbar_st_fit:.6e}" + (f" FAILED {r.error}" if r.failed else ""))
            frac = runners.failure_fraction(records)
            if frac >= runners.FAILURE_QUORUM:
                print(f"error: {frac:.0%} of sweep points failed", file=sys.stderr)
                return EXIT_QUORUM
            return EXIT_OK
        lines = runners.run_reproduce(ns.figure, cfg)
        print("\n".join(lines))
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IntegrationError as exc:
        print(f"integration failed at t={exc.time:.6g}: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION


if __name__ == "__main__":
    sys.exit(main())
