"""Hierarchical runs against the flat layer-0 reach solve on the bundled
scenarios; writes one tab-separated table."""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass
from pathlib import Path
from types import SimpleNamespace

from hrgsyn.cli import bench_rows
from hrgsyn.gridworld import compile_building, load_scenario_file

ROOT = Path(__file__).resolve().parent.parent


@dataclass
class BenchConfig:
    scenarios: tuple = (("two_floor.yaml", "static"), ("corridor.yaml", "door-event"))
    horizon: int = 500
    seed: int = 0


def main(cfg: BenchConfig, out=sys.stdout):
    w = None
    for name, profile in cfg.scenarios:
        cb = compile_building(load_scenario_file(ROOT / "data" / name))
        args = SimpleNamespace(profile=profile, seed=cfg.seed, horizon=cfg.horizon, mode=cb.scenario.mode, goal=None)
        for row in bench_rows(cb, args):
            row = {"scenario": cb.scenario.name, "profile": profile, **row}
            if w is None:
                w = csv.DictWriter(out, fieldnames=list(row), delimiter="\t", lineterminator="\n")
                w.writeheader()
            w.writerow(row)


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--horizon", type=int, default=BenchConfig.horizon)
    p.add_argument("--seed", type=int, default=BenchConfig.seed)
    a = p.parse_args()
    main(BenchConfig(horizon=a.horizon, seed=a.seed))
