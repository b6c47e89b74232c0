import pytest
from hypothesis import given, settings, strategies as st

from hrgsyn.automata import (
    Alphabet, AutomatonRun, LetterOutOfAlphabet, Mode, ModeMismatch, accepts_finite, advance, always_inner,
    avoid_until_exit, empty_language, gf, in_closure, live_states, reach, universal, visit_all,
)

YS = ["a", "b", "c", "d"]
words = st.lists(st.tuples(st.integers(0, 1), st.sampled_from(YS)), min_size=1, max_size=12)
LETTERS = [(x, y) for x in (0, 1) for y in YS]


def test_reach_template():
    a = reach(["c"])
    assert a.mode is Mode.FINITE
    assert accepts_finite(a, [(0, "a"), (0, "c")])
    assert not accepts_finite(a, [(0, "c"), (0, "a")])
    inside = reach(["c"], inner=["a", "c"])
    assert not accepts_finite(inside, [(0, "b"), (0, "c")])


def test_avoid_and_visit_all():
    s = avoid_until_exit(["b"])
    assert s.mode is Mode.SAFETY
    assert accepts_finite(s, [(0, "a"), (0, "c")])
    assert not accepts_finite(s, [(0, "a"), (0, "b"), (0, "c")])
    v = visit_all(["a", "c"])
    assert accepts_finite(v, [(0, "c"), (0, "b"), (0, "a")])
    assert not accepts_finite(v, [(0, "c"), (0, "b")])


def test_universal_and_empty():
    assert accepts_finite(universal(), [(0, "z")])
    assert not accepts_finite(universal(inner=["a"]), [(0, "a"), (0, "b")])
    assert not accepts_finite(empty_language(), [(0, "a")])


def test_buchi_has_no_finite_acceptance():
    with pytest.raises(ModeMismatch):
        accepts_finite(always_inner(["a"]), [(0, "a")])


def test_gf_round_robin():
    a = gf([lambda l: l[0] == 0, lambda l: l[0] == 1])
    q = a.final_state([(0, "a")])
    assert not a.is_accepting(q)
    q = a.final_state([(0, "a"), (1, "a")])
    assert a.is_accepting(q)
    # both predicates met by one letter complete a round at once
    b = gf([lambda l: True, lambda l: True])
    assert b.is_accepting(b.final_state([(0, "a")]))
    assert gf([]).is_accepting(gf([]).initial)


def test_alphabet_membership():
    a = reach(["a"], alphabet=Alphabet(frozenset({0}), frozenset(YS)))
    with pytest.raises(LetterOutOfAlphabet):
        a.step(a.initial, (1, "a"))
    assert sorted(Alphabet(frozenset({0}), frozenset("ab")).letters()) == [(0, "a"), (0, "b")]
    with pytest.raises(ValueError):
        list(Alphabet().letters())


def test_run_and_advance():
    a = reach(["b"])
    r = AutomatonRun.start(a)
    r = advance(a, r, (0, "b"))
    assert r.state == "at" and r.trace == ("init", "at")
    assert a.run([(0, "a"), (0, "b")]) == ["init", "away", "at"]


def test_live_states_and_closure():
    a = reach(["b"], inner=["a", "b"])
    assert "dead" not in live_states(a, LETTERS)
    assert in_closure(a, [(0, "a")], LETTERS)
    assert not in_closure(a, [(0, "c")], LETTERS)
    stay = always_inner(["a"])
    assert in_closure(stay, [(0, "a")], LETTERS)


@settings(max_examples=200, deadline=None)
@given(words, st.sets(st.sampled_from(YS), min_size=1))
def test_reach_accepts_iff_last_in_targets(w, targets):
    assert accepts_finite(reach(targets), w) == (w[-1][1] in targets)


@settings(max_examples=200, deadline=None)
@given(words, st.sets(st.sampled_from(YS), min_size=1, max_size=3))
def test_visit_all_and_avoid_match_set_semantics(w, targets):
    seen = {y for _, y in w}
    assert accepts_finite(visit_all(targets), w) == (targets <= seen)
    assert accepts_finite(avoid_until_exit(targets), w) == (not (targets & seen))


@settings(max_examples=200, deadline=None)
@given(words, st.sets(st.sampled_from(YS), min_size=1))
def test_reach_closure_is_prefix_closure(w, targets):
    # every word over an unrestricted alphabet extends to one ending in a target
    assert in_closure(reach(targets), w, LETTERS)
    a = reach(targets, inner=targets | {"a"})
    expected = all(y in targets | {"a"} for _, y in w)
    assert in_closure(a, w, LETTERS) == expected


def test_trivial_languages():
    assert not accepts_finite(reach([]), [(0, "a")])
    safe_all = avoid_until_exit([])
    assert accepts_finite(safe_all, [(0, "a"), (1, "d")])


def _table_automaton(rng, n, letters, p_acc):
    table = {(q, a): rng.randrange(n) for q in range(n) for a in letters}
    acc = {q for q in range(n) if rng.random() < p_acc}
    from hrgsyn.automata import SpecAutomaton

    return SpecAutomaton(0, lambda q, a: table[(q, a)], acc, Mode.FINITE), table, acc


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_live_states_match_path_search(seed):
    import random

    rng = random.Random(seed)
    letters = [(0, "a"), (0, "b"), (1, "a")]
    a, table, acc = _table_automaton(rng, 20, letters, 0.1)
    succ = {q: {table[(q, l)] for l in letters} for q in range(20)}
    reach_set, todo = {0}, [0]
    while todo:
        q = todo.pop()
        for s in succ[q] - reach_set:
            reach_set.add(s)
            todo.append(s)

    def can_accept(q):
        seen, todo = {q}, [q]
        while todo:
            p = todo.pop()
            if p in acc:
                return True
            for s in succ[p] - seen:
                seen.add(s)
                todo.append(s)
        return False

    assert live_states(a, letters) == {q for q in reach_set if can_accept(q)}
