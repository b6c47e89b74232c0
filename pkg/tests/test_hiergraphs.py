from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from generators import random_layered_game
from hrgsyn.game import validate_serial
from hrgsyn.gridworld import compile_building, load_scenario, load_scenario_file
from hrgsyn.hiergraphs import (
    EmptyContext, FlatLocalGame, GraphFamily, NonSerialResult, build_agg, build_lgg, check_locality,
    declared_agg, is_local_play, post,
)
from hrgsyn.layering import Layering

DATA = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="module")
def cb():
    return compile_building(load_scenario_file(DATA / "two_floor.yaml"))


def test_room_graph_of_fixture(cb):
    agg = cb.hrg.family.graph(1)
    open_, closed = frozenset(), frozenset({"d"})
    assert agg.sys_succ(closed, "r5_11") == {"r5_21"}
    assert agg.sys_succ(open_, "r5_11") == {"r5_21", "r5_12"}
    assert "s56" in agg.sys_succ(closed, "r5_32")
    assert post(agg, "r5_11") == {"r5_21", "r5_12"}
    assert agg.provenance == "computed"
    floors = cb.hrg.family.graph(2)
    assert floors.sys_succ(frozenset(), "f5") == {"f6"}


def test_local_game_of_room(cb):
    lgg = cb.hrg.family.lgg(0, "r5_11")
    assert set(lgg.inner) == {f"q5_{c}{r}" for c in (1, 2, 3) for r in (1, 2, 3, 4)}
    assert set(lgg.outer) == {"q5_43", "q5_25"}
    assert lgg.exits_into("r5_21") == ("q5_43",)
    assert lgg.exit_context["q5_25"] == "r5_12"
    # env states are restricted to the door cells touching the room
    assert set(lgg.env_states) == {frozenset(), frozenset({"q5_24", "q5_25"})}
    assert lgg.is_inner("q5_22") and not lgg.is_inner("q5_43")


def test_fixture_is_truly_local(cb):
    for l in range(cb.lay.L):
        assert check_locality(cb.hrg.family.graph(l), cb.lay, l) == []
    assert check_locality(cb.g0, cb.lay, 2) == []


def test_coupling_breaks_locality():
    text = (DATA / "two_floor.yaml").read_text()
    text += "couplings:\n  - {from: [f5, 3, 3], to: [f5, 4, 3], blocked_by: [f5, 6, 3]}\n"
    bad = compile_building(load_scenario(text))
    viol = check_locality(bad.g0, bad.lay, 0)
    assert viol and all(v[0] == "r5_11" and v[2] == "q5_33" and v[3] == "q5_43" for v in viol)


def test_empty_context_and_layer_zero():
    lay = Layering([["a"], ["A", "B"]], [[0], [0]], [None, {"a": "A"}], [None, lambda x, y: 0])
    with pytest.raises(ValueError):
        build_agg(None, lay, 0)
    agg = declared_agg(lay, 1, {(0, "A"): [0], (0, "B"): [0]}, {(0, "A"): ["A"], (0, "B"): ["B"]})
    with pytest.raises(EmptyContext):
        build_lgg(None, agg, lay, 0, "B")


def test_strict_build_reports_nonserial():
    from hrgsyn.game import GameGraph

    # b is a dead end for the system, so class B can neither stay nor leave
    g0 = GameGraph([0], ["a", "b"], {(0, "a"): [0], (0, "b"): [0]}, {(0, "a"): ["a", "b"]})
    lay = Layering([["a", "b"], ["A", "B"]], [[0], [0]], [None, {"a": "A", "b": "B"}], [None, lambda x, y: 0])
    agg = build_agg(g0, lay, 1)
    assert ("sys", 0, "B") in agg.nonserial
    assert (0, "A") not in agg.repaired and agg.sys_succ(0, "A") == {"B"}
    with pytest.raises(NonSerialResult):
        build_agg(g0, lay, 1, strict=True)


def test_flat_local_game(cb):
    flat = FlatLocalGame(cb.g0)
    assert flat.inner == cb.g0.sys_states and flat.outer == ()
    assert flat.sys_succ(cb.hrg.init[0], "q5_22") == cb.g0.sys_succ(cb.hrg.init[0], "q5_22")


def test_is_local_play_rejects_illegal_step(cb):
    lgg = cb.hrg.family.lgg(0, "r5_11")
    x = frozenset({"q5_24", "q5_25"})
    assert is_local_play(lgg, [(x, "q5_22"), (x, "q5_23")])
    assert not is_local_play(lgg, [(x, "q5_22"), (x, "q5_33")])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 5000), st.booleans())
def test_abstract_graphs_of_serial_games_keep_env_serial(seed, ydep):
    inst = random_layered_game(seed, y_dependent_rx=ydep)
    assert validate_serial(inst.g0).ok
    fam = GraphFamily(inst.g0, inst.lay)
    for l in (1, 2):
        g = fam.graph(l)
        assert not [p for p in g.nonserial if p[0] == "env" and _reachable(inst, l, p[1:])]


def _reachable(inst, l, letter):
    from generators import agg_oracle

    env_t, _, _ = agg_oracle(inst.g0, inst.lay, l)
    return letter in env_t


def test_floor_post_and_room_contexts(cb):
    assert post(cb.hrg.family.graph(2), "f5") == {"f6"}
    assert cb.hrg.family.lgg(1, "f5").outer == ("s56",)


def test_oracle_on_two_room_toy():
    from generators import agg_oracle

    mini = compile_building(load_scenario(MINI_TOY))
    agg = mini.hrg.family.graph(1)
    assert agg.sys_succ(frozenset(), "L") == {"R"}
    # with the door closed the room can only be stayed in
    assert agg.sys_succ(frozenset({"d"}), "L") == {"L"}
    env_t, sys_t, stays = agg_oracle(mini.g0, mini.lay, 1)
    for ax in agg.env_states:
        for ay in agg.sys_states:
            exp = sys_t.get((ax, ay)) or ({ay} if (ax, ay) in stays else set())
            assert set(agg.sys_succ(ax, ay)) == exp


MINI_TOY = """
floors:
  - id: f0
    rooms:
      - {id: L, cols: [1, 2], rows: [1, 1]}
      - {id: R, cols: [3, 4], rows: [1, 1]}
doors:
  - {id: d, floor: f0, cells: [[2, 1], [3, 1]], rooms: [L, R]}
initial:
  robot: [f0, 1, 1]
"""


def test_env_changes_during_a_stay_are_all_collected():
    from hrgsyn.game import GameGraph

    g0 = GameGraph([0, 1, 2], ["a", "b"], lambda x, y: [(x + 1) % 3],
                   lambda x, y: ["a", "b"] if y == "a" else ["b"])
    lay = Layering([["a", "b"], ["A", "B"]], [[0, 1, 2], [0, 1, 2]], [None, {"a": "A", "b": "B"}],
                   [None, lambda x, y: x])
    agg = build_agg(g0, lay, 1)
    assert agg.env_succ(0, "A") == {0, 1, 2}


def test_identity_abstraction_without_self_loops_gives_input_graph():
    import random

    from hrgsyn.game import GameGraph

    rng = random.Random(3)
    for _ in range(30):
        ys = [f"y{i}" for i in range(rng.randint(2, 6))]
        xs = [0, 1]
        sys_t = {(x, y): rng.sample([z for z in ys if z != y], rng.randint(1, len(ys) - 1)) for x in xs for y in ys}
        g0 = GameGraph(xs, ys, {(x, y): xs for x in xs for y in ys}, sys_t)
        lay = Layering([ys, ys], [xs, xs], [None, {y: y for y in ys}], [None, lambda x, y: x])
        agg = build_agg(g0, lay, 1)
        assert agg.tables() == g0.tables()


def test_whole_graph_context_has_no_exits():
    corridor = compile_building(load_scenario_file(DATA / "corridor.yaml"))
    lgg = corridor.hrg.family.lgg(1, "f1")
    agg = corridor.hrg.family.graph(1)
    assert lgg.outer == ()
    for x in lgg.env_states:
        for y in lgg.inner:
            assert lgg.sys_succ(x, y) == agg.sys_succ(x, y)
