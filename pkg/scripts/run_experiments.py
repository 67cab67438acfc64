#!/usr/bin/env python3
"""Run every section of an experiment INI file and summarise each table.

For G tables the fitted log-log slope of |G - 1| is printed next to the
expected -(K + 1); other kinds print their last row.

    python scripts/run_experiments.py scripts/experiments.ini --only psi_G_K2
"""

from __future__ import annotations

import argparse
import configparser
import logging
import os
import time
from dataclasses import replace
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
os.environ.setdefault("LARGEGENUS_CACHE", str(ROOT / ".cache"))

from largegenus.harness import DegenerateFit, fit_rate, load_config, run_experiment  # noqa: E402

log = logging.getLogger("experiments")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config", type=Path)
    ap.add_argument("--only", action="append", default=[], help="section name (repeatable)")
    ap.add_argument("--outdir", type=Path, default=ROOT, help="base for relative 'out' paths")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    parser = configparser.ConfigParser()
    parser.optionxform = str
    parser.read(args.config)
    names = [s for s in parser.sections() if s != "defaults"]
    specs = load_config(args.config)
    status = 0
    for name, spec in zip(names, specs):
        if args.only and name not in args.only:
            continue
        if spec.out:
            spec = replace(spec, out=str(args.outdir / spec.out))
        t = time.perf_counter()
        table = run_experiment(spec)
        secs = time.perf_counter() - t
        if spec.kind == "G":
            try:
                slope = fit_rate(table, 1.0)
                log.info("%-20s slope %.4f (expect %d)  %.1f s", name, slope, -(spec.K + 1), secs)
            except DegenerateFit as exc:
                log.info("%-20s fit failed: %s", name, exc)
                status = 1
        else:
            log.info("%-20s last row %s  %.1f s", name, ",".join(table.rows[-1]), secs)
    return status


if __name__ == "__main__":
    raise SystemExit(main())
