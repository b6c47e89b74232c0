"""Controller runs over seeded random buildings: outcome and verdict counts
per profile and solve mode, plus the termination checks of the acceptance
suite.  Buildings whose tasks conflict with their entry cells are reported
separately."""
from __future__ import annotations

import argparse
import time
from collections import Counter
from dataclasses import dataclass

from hrgsyn.controller import run
from hrgsyn.gridworld import compile_building, make_env
from hrgsyn.gridworld.generate import random_scenario
from hrgsyn.hrg_spec import check_winning, validate_hrg
from hrgsyn.solver import SolveMode


@dataclass
class CorpusConfig:
    seeds: int = 200
    first_seed: int = 0
    horizon: int = 100
    profiles: tuple = ("adversarial", "scripted", "fair")


def main(cfg: CorpusConfig):
    t0 = time.perf_counter()
    counts = Counter()
    problems = []
    for seed in range(cfg.first_seed, cfg.first_seed + cfg.seeds):
        cb = compile_building(random_scenario(seed))
        valid = validate_hrg(cb.hrg).ok
        for profile in cfg.profiles:
            for mode in SolveMode:
                out = run(cb.hrg, make_env(cb, profile, seed), cfg.horizon, mode)
                verdict = check_winning(out.trace, cb.hrg).label
                counts[(valid, profile, mode.value, out.kind.value, verdict)] += 1
                if not valid:
                    continue
                for rec in out.log:
                    layers = rec["layers"]
                    unreal = any(L["unreal"] for L in layers)
                    if layers[0]["stuck"] != unreal:
                        problems.append((seed, profile, mode.value, rec["k"], "stuck/unreal mismatch"))
                if verdict == "Violated":
                    problems.append((seed, profile, mode.value, str(out), "violated"))
    print("valid\tprofile\tmode\toutcome\tverdict\truns")
    for key, n in sorted(counts.items(), key=str):
        print("\t".join(map(str, key)) + f"\t{n}")
    print(f"problems on valid buildings: {len(problems)}")
    for p in problems[:20]:
        print("  ", p)
    print(f"{time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seeds", type=int, default=CorpusConfig.seeds)
    p.add_argument("--first-seed", type=int, default=CorpusConfig.first_seed)
    p.add_argument("--horizon", type=int, default=CorpusConfig.horizon)
    a = p.parse_args()
    main(CorpusConfig(seeds=a.seeds, first_seed=a.first_seed, horizon=a.horizon))
