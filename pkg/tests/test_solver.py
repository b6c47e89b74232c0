import random
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from generators import buchi_oracle, play_out, random_explicit_arena, reach_oracle
from hrgsyn.automata import always_inner, avoid_until_exit, gf, reach, universal
from hrgsyn.gridworld import compile_building, load_scenario, load_scenario_file
from hrgsyn.hrg_spec import concat_spec, reach_spec
from hrgsyn.solver import (
    ArenaTooLarge, SolveMode, Unrealizable, UnsupportedObjective, attractor, buchi, reach_or_cobuchi, reset_stats,
    safety, sol, STATS,
)

DATA = Path(__file__).resolve().parent.parent / "data"
arenas = st.builds(lambda seed, n: random_explicit_arena(random.Random(seed), n),
                   st.integers(0, 10**6), st.integers(1, 12))


@pytest.fixture(scope="module")
def corridor():
    return compile_building(load_scenario_file(DATA / "corridor.yaml"))


@settings(max_examples=300, deadline=None)
@given(arenas, st.data())
def test_attractor_matches_backward_induction(a, data):
    target = data.draw(st.sets(st.integers(0, len(a) - 1)))
    for player in ("system", "environment"):
        res = attractor(a, target, player)
        assert res.region == reach_oracle(a, target, player)


@settings(max_examples=200, deadline=None)
@given(arenas, st.data())
def test_attractor_moves_reach_target_within_rank(a, data):
    target = data.draw(st.sets(st.integers(0, len(a) - 1)))
    res = attractor(a, target)
    rng = random.Random(len(a))
    for start in res.region:
        path = play_out(a, start, res.move, lambda i, out: rng.choice(out), res.rank[start], target)
        assert any(p in target for p in path)


@settings(max_examples=300, deadline=None)
@given(arenas, st.data())
def test_buchi_matches_nested_fixpoint(a, data):
    acc = data.draw(st.sets(st.integers(0, len(a) - 1)))
    for player in ("system", "environment"):
        z, _ = buchi(a, acc, player)
        assert z == buchi_oracle(a, acc, player)


@settings(max_examples=200, deadline=None)
@given(arenas, st.data())
def test_safety_is_complement_of_opponent_reach(a, data):
    safe = data.draw(st.sets(st.integers(0, len(a) - 1)))
    w, move = safety(a, safe)
    unsafe = set(range(len(a))) - safe
    assert w == set(range(len(a))) - reach_oracle(a, unsafe, "environment")
    for i, j in move.items():
        assert j is None or j in w


@settings(max_examples=200, deadline=None)
@given(arenas, st.data())
def test_reach_or_cobuchi_contains_reach_region(a, data):
    target = data.draw(st.sets(st.integers(0, len(a) - 1)))
    bad = data.draw(st.sets(st.integers(0, len(a) - 1)))
    won, _ = reach_or_cobuchi(a, target, bad)
    assert reach_oracle(a, target) <= won
    # with every position bad, only reaching the target wins
    assert reach_or_cobuchi(a, target, set(range(len(a))))[0] == reach_oracle(a, target)


def _room_a(cb):
    lgg = cb.hrg.family.lgg(0, "A")
    hist = [cb.lay.lift(0, *cb.hrg.init)]
    return lgg, hist


def test_assumption_mode_recovers_door_route(corridor):
    lgg, hist = _room_a(corridor)
    obj = concat_spec(universal(), reach_spec(lgg, "B"))
    zeta = corridor.hrg.zeta_for(0, "A")
    x = hist[-1][0]
    worst = sol(lgg, hist, obj, zeta, SolveMode.WORST_CASE)
    assert not worst.realizable and worst.decide(hist, x) is None
    assumed = sol(lgg, hist, obj, zeta, SolveMode.ASSUMPTION)
    assert assumed.realizable and assumed.warning is None
    # frozen: the first move towards the door goes down the first column
    assert assumed.decide(hist, x) == "q1_12"


def test_detour_is_realizable_worst_case(corridor):
    lgg, hist = _room_a(corridor)
    s = sol(lgg, hist, concat_spec(universal(), reach_spec(lgg, "D")))
    y, play = None, list(hist)
    for _ in range(10):
        y = s.decide(play, frozenset())
        if y is None:
            break
        play.append((frozenset(), y))
    assert play[-1][1] == "q1_14"


def test_stay_objective_and_safety(corridor):
    lgg, hist = _room_a(corridor)
    stay = sol(lgg, hist, always_inner(lgg.inner))
    assert stay.realizable
    avoid = sol(lgg, hist, avoid_until_exit(["q1_11"]))
    assert not avoid.realizable


def test_errors_and_stats(corridor):
    lgg, hist = _room_a(corridor)
    with pytest.raises(ValueError):
        sol(lgg, [], reach(["q1_33"]))
    with pytest.raises(Unrealizable):
        sol(lgg, hist, reach(["q5_99"]), strict=True)
    with pytest.raises(UnsupportedObjective):
        sol(lgg, hist, reach(["q1_33"]), reach(["q1_33"]), SolveMode.ASSUMPTION)
    with pytest.raises(ArenaTooLarge):
        sol(lgg, hist, reach(["q1_33"]), max_positions=3)
    reset_stats()
    sol(lgg, hist, reach(["q1_33"]))
    assert STATS["calls"] == 1 and STATS["positions"] > 0


def test_buchi_under_buchi_assumption_warns(corridor):
    lgg, hist = _room_a(corridor)
    s = sol(lgg, hist, gf([lambda a: a[1] == "q1_33"]), corridor.hrg.zeta_for(0, "A"), SolveMode.ASSUMPTION)
    assert s.warning and "worst-case" in s.warning


def test_stateful_interface(corridor):
    lgg, hist = _room_a(corridor)
    s = sol(lgg, hist, reach(["q1_33"]))
    s.reset(hist)
    ys = [s.next_move(frozenset()) for _ in range(5)]
    assert ys[3] == "q1_33" and ys[4] is None


@pytest.fixture(scope="module")
def two_floor():
    return compile_building(load_scenario_file(DATA / "two_floor.yaml"))


def _room(cb, nu, y):
    x = cb.lay.restrict(0, nu, cb.hrg.init[0])
    return cb.hrg.family.lgg(0, nu), [(x, y)], x


def test_fixture_room_first_move(two_floor):
    lgg, hist, x = _room(two_floor, "r5_11", "q5_22")
    s = sol(lgg, hist, concat_spec(universal(), reach_spec(lgg, "r5_21")))
    assert s.realizable and s.decide(hist, x) == "q5_23"


def test_blocked_exit_is_unrealizable():
    text = (DATA / "two_floor.yaml").read_text().replace(
        "  - {cell: [f5, 6, 3], fixed: true}", "  - {cell: [f5, 6, 3], fixed: true}\n  - {cell: [f5, 4, 3], fixed: true}"
    ).replace("obstacles: [[f5, 6, 3]]", "obstacles: [[f5, 6, 3], [f5, 4, 3]]")
    cb = compile_building(load_scenario(text))
    lgg, hist, _ = _room(cb, "r5_11", "q5_22")
    assert not sol(lgg, hist, concat_spec(universal(), reach_spec(lgg, "r5_21"))).realizable


def test_objective_met_at_root_leaves_nothing_to_do(corridor):
    lgg, hist = _room_a(corridor)
    s = sol(lgg, hist, universal())
    assert s.realizable and s.decide(hist, hist[-1][0]) is None


def test_empty_fairness_assumption_prunes_nothing(corridor):
    lgg, hist = _room_a(corridor)
    obj = concat_spec(universal(), reach_spec(lgg, "B"))
    s = sol(lgg, hist, obj, gf([]), SolveMode.ASSUMPTION)
    worst = sol(lgg, hist, obj)
    assert s.warning is None and len(s.allowed) == len(s.arena)
    assert s.win == worst.win


def test_unsatisfiable_assumption_warns_and_falls_back(corridor):
    lgg, hist = _room_a(corridor)
    obj = concat_spec(universal(), reach_spec(lgg, "D"))
    s = sol(lgg, hist, obj, gf([lambda a: False]), SolveMode.ASSUMPTION)
    assert s.warning and "unpruned" in s.warning
    assert s.realizable == sol(lgg, hist, obj).realizable


def test_buchi_trap_pruned_in_assumption_mode():
    # env decides forever between a sys win and a loop it may stay in;
    # the assumption says it leaves the loop infinitely often
    from hrgsyn.game import GameGraph
    from hrgsyn.hiergraphs import FlatLocalGame

    g = GameGraph(["loop", "free"], ["s", "t"],
                  lambda x, y: ["loop", "free"] if y == "s" else ["free"],
                  lambda x, y: ["s"] if x == "loop" else ["s", "t"])
    flat = FlatLocalGame(g)
    hist = [("loop", "s")]
    worst = sol(flat, hist, reach(["t"]))
    fair = sol(flat, hist, reach(["t"]), gf([lambda a: a[0] == "free"]), SolveMode.ASSUMPTION)
    assert not worst.realizable and fair.realizable
    assert fair.decide(hist, "free") == "t"
