"""Command-line interface: run, check, validate, build-agg, render, bench."""
from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
import time

from . import solver
from .automata import reach
from .controller import run as run_controller
from .game import dump_graph
from .gridworld import compile_building, load_scenario_file, make_env
from .gridworld.compile import DEFAULT_CAP
from .gridworld.render import render_trace
from .hiergraphs import FlatLocalGame, is_local_play
from .hrg_spec import check_winning
from .layering import ProjectionBundle, _fmt
from .solver import SolveMode

EXIT_ERROR = 4


def _mode(name: str) -> SolveMode:
    return SolveMode(name)


def _compile(args):
    return compile_building(load_scenario_file(args.scenario), cap=args.cap)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def encode_pair(cb, pair):
    x, y = pair
    return [sorted(x), y]


def decode_pair(rec):
    x, y = rec
    return (frozenset(x), y)


def trace_lines(cb, args, outcome) -> list:
    lines = [_dump({"type": "header", "scenario": cb.scenario.name, "profile": args.profile, "seed": args.seed,
                    "mode": args.mode, "horizon": args.horizon})]
    for rec in outcome.log:
        lines.append(_dump({"type": "step", **rec}))
    lines.append(_dump({
        "type": "outcome", "outcome": outcome.kind.value, "k": outcome.k, "layer": outcome.layer,
        "solves": outcome.solves, "trace": [encode_pair(cb, p) for p in outcome.trace],
    }))
    return lines


def read_trace(path) -> list:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            if rec.get("type") == "outcome":
                return [decode_pair(p) for p in rec["trace"]]
    raise ValueError(f"{path}: no outcome record")


def cmd_run(args) -> int:
    cb = _compile(args)
    env = make_env(cb, args.profile, args.seed)
    outcome = run_controller(cb.hrg, env, args.horizon, _mode(args.mode))
    lines = trace_lines(cb, args, outcome)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    print(f"outcome: {outcome}  steps: {len(outcome.trace) - 1}  solves per layer: {outcome.solves}")
    return 0


def cmd_check(args) -> int:
    cb = _compile(args)
    trace = read_trace(args.trace)
    v = check_winning(trace, cb.hrg)
    print(_dump(v.to_record()) if args.verbose else v.label)
    return int(v.kind)


def sample_projection_violations(cb, n_plays: int, length: int, seed: int) -> list:
    """Random plays whose projections or local segments leave the built graphs."""
    from .game import is_play

    rng = random.Random(seed)
    g0, lay, hrg = cb
    fam = hrg.family
    bad = []
    for i in range(n_plays):
        x, y = hrg.init
        play = [(x, y)]
        for _ in range(length):
            x = rng.choice(sorted(g0.env_succ(x, y), key=g0.env_index.__getitem__))
            y = rng.choice(sorted(g0.sys_succ(x, y), key=g0.sys_index.__getitem__))
            play.append((x, y))
        b = ProjectionBundle(lay, play)
        for l in range(1, lay.L + 1):
            if not is_play(fam.graph(l), b.projected(l)):
                bad.append(("projection", i, l))
        for l in range(lay.L):
            up = b.projected(l + 1)
            for m, seg in enumerate(b.segments(l)):
                lgg = fam.lgg(l, up[m][1])
                if not is_local_play(lgg, seg):
                    bad.append(("segment", i, l, m))
    return bad


def cmd_validate(args) -> int:
    from .hrg_spec import validate_hrg

    cb = _compile(args)
    rep = validate_hrg(cb.hrg)
    ok = rep.ok
    print(f"seriality: {len(rep.nonserial[0])} empty pairs")
    for l, viol in rep.locality.items():
        print(f"locality layer {l}: {len(viol)} violations")
        for v in viol[:20]:
            print("  context=%s x=%s y=%s y'=%s" % tuple(_fmt(e) for e in v))
    for l, nu, y in rep.entry_conflicts:
        print(f"entry conflict: layer {l} context {_fmt(nu)} rejects entry state {_fmt(y)}")
    for l in range(1, cb.lay.L + 1):
        g = cb.hrg.family.graph(l)
        if g.nonserial:
            print(f"abstract layer {l}: {len(g.nonserial)} pairs without successors (unreachable combinations)")
    bad = sample_projection_violations(cb, args.samples, args.length, args.seed)
    print(f"sampled plays: {args.samples}, projection/segment violations: {len(bad)}")
    for v in bad[:20]:
        print("  ", v)
        ok = False
    print("valid" if ok else "INVALID")
    return 0 if ok else 1


def cmd_build_agg(args) -> int:
    cb = _compile(args)
    layers = [args.layer] if args.layer is not None else list(range(1, cb.lay.L + 1))
    docs = []
    for l in layers:
        g = cb.hrg.family.graph(l)
        d = dump_graph(g, provenance=getattr(g, "provenance", "computed"))
        d["layer"] = l
        d["repaired"] = [repr(p) for p in getattr(g, "repaired", [])]
        d["nonserial"] = [repr(p) for p in getattr(g, "nonserial", [])]
        docs.append(d)
    text = json.dumps(docs, indent=1, sort_keys=True)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_render(args) -> int:
    cb = _compile(args)
    trace = read_trace(args.trace) if args.trace else [cb.hrg.init]
    layers = [args.layer] if args.layer is not None else list(range(cb.lay.L + 1))
    for l in layers:
        svg = render_trace(cb, trace, l)
        path = args.out.replace("{layer}", str(l)) if args.out else f"trace_layer{l}.svg"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(svg)
        print(path)
    return 0


def flat_goal(cb, goal=None):
    if goal is not None:
        return [cb.label(goal)] if not isinstance(goal, str) else [goal]
    body = cb.scenario.specs.get(0) or cb.scenario.specs.get("0") or {}
    for tpl in body.values():
        if isinstance(tpl, dict) and "reach" in tpl:
            return [cb.label(c) for c in tpl["reach"]]
    raise ValueError("no layer-0 reach goal in the scenario; pass --goal")


def bench_rows(cb, args) -> list:
    rows = []
    solver.reset_stats()
    t0 = time.perf_counter()
    env = make_env(cb, args.profile, args.seed)
    out = run_controller(cb.hrg, env, args.horizon, _mode(args.mode))
    t1 = time.perf_counter()
    rows.append({"approach": "hierarchical", "outcome": out.kind.value, "steps": len(out.trace) - 1,
                 "solver_calls": solver.STATS["calls"], "states_explored": solver.STATS["positions"],
                 "seconds": round(t1 - t0, 4)})
    solver.reset_stats()
    t0 = time.perf_counter()
    flat = FlatLocalGame(cb.g0)
    goal = flat_goal(cb, args.goal)
    s = solver.sol(flat, [cb.hrg.init], reach(goal, name="goal"), sys_order=cb.g0.sys_index,
                   env_order=cb.g0.env_index)
    t1 = time.perf_counter()
    rows.append({"approach": "flat", "outcome": "realizable" if s.realizable else "unrealizable", "steps": "",
                 "solver_calls": solver.STATS["calls"], "states_explored": solver.STATS["positions"],
                 "seconds": round(t1 - t0, 4)})
    return rows


def cmd_bench(args) -> int:
    cb = _compile(args)
    rows = bench_rows(cb, args)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), delimiter="\t", lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    text = buf.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hrgsyn", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--scenario", required=True, help="scenario YAML document")
        sp.add_argument("--cap", type=int, default=DEFAULT_CAP, help="env state enumeration cap")

    def runlike(sp):
        sp.add_argument("--profile", default="static")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--horizon", type=int, default=500)
        sp.add_argument("--mode", default="worst-case", choices=[m.value for m in SolveMode])

    sp = sub.add_parser("run", help="run the hierarchical controller and write an NDJSON trace")
    common(sp)
    runlike(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("check", help="verdict of a trace (exit 0/1/2)")
    common(sp)
    sp.add_argument("--trace", required=True)
    sp.add_argument("--verbose", action="store_true")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("validate", help="seriality, locality and projection sampling")
    common(sp)
    sp.add_argument("--samples", type=int, default=50)
    sp.add_argument("--length", type=int, default=60)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("build-agg", help="dump computed abstract game graphs")
    common(sp)
    sp.add_argument("--layer", type=int)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_build_agg)

    sp = sub.add_parser("render", help="SVG drawing per layer")
    common(sp)
    sp.add_argument("--trace")
    sp.add_argument("--layer", type=int)
    sp.add_argument("--out", help="output path; '{layer}' is replaced by the layer index")
    sp.set_defaults(func=cmd_render)

    sp = sub.add_parser("bench", help="hierarchical run versus flat layer-0 reach solve")
    common(sp)
    runlike(sp)
    sp.add_argument("--goal", help="goal cell label for the flat solve")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, RuntimeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
