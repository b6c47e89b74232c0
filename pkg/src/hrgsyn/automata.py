"""Deterministic task automata over (env, sys) letters.

Three acceptance modes are supported:

* ``FINITE``  - finite words whose run ends in an accepting state;
* ``SAFETY``  - words (finite or infinite) whose run never leaves the safe set;
* ``BUCHI``   - infinite words visiting accepting states infinitely often.

Transitions are given by a callable ``delta(q, letter)`` so that templates can
inspect structured letters without materialising a table over a large
alphabet.  Results are memoised per automaton.
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Sequence

Letter = tuple  # (env_state, sys_state)


class Mode(enum.Enum):
    FINITE = "FiniteReach"
    SAFETY = "Safety"
    BUCHI = "Buchi"


class LetterOutOfAlphabet(ValueError):
    pass


class ModeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Alphabet:
    """Cartesian alphabet; ``None`` on a side means "any value"."""

    env: frozenset | None = None
    sys: frozenset | None = None

    def __contains__(self, letter) -> bool:
        x, y = letter
        return (self.env is None or x in self.env) and (self.sys is None or y in self.sys)

    def letters(self):
        if self.env is None or self.sys is None:
            raise ValueError("alphabet is not enumerable")
        for x in self.env:
            for y in self.sys:
                yield (x, y)

    def same_as(self, other: "Alphabet") -> bool:
        return self.env == other.env and self.sys == other.sys


class SpecAutomaton:
    def __init__(
        self,
        initial: Hashable,
        delta: Callable[[Hashable, Letter], Hashable],
        accepting: Callable[[Hashable], bool] | Iterable,
        mode: Mode,
        alphabet: Alphabet = Alphabet(),
        name: str = "",
    ):
        self.initial = initial
        self._delta = delta
        if callable(accepting):
            self._acc = accepting
        else:
            acc = frozenset(accepting)
            self._acc = acc.__contains__
        self.mode = mode
        self.alphabet = alphabet
        self.name = name
        self._cache: dict = {}
        self._live: frozenset | None = None
        self._symbolic_letters: list | None = None

    def step(self, q, letter):
        key = (q, letter)
        try:
            return self._cache[key]
        except KeyError:
            if letter not in self.alphabet:
                raise LetterOutOfAlphabet(letter) from None
            r = self._cache[key] = self._delta(q, letter)
            return r

    def is_accepting(self, q) -> bool:
        """Accepting (FINITE/BUCHI) or safe (SAFETY)."""
        return self._acc(q)

    def run(self, word: Iterable[Letter], start=None) -> list:
        q = self.initial if start is None else start
        trace = [q]
        for a in word:
            q = self.step(q, a)
            trace.append(q)
        return trace

    def final_state(self, word: Iterable[Letter], start=None):
        q = self.initial if start is None else start
        for a in word:
            q = self.step(q, a)
        return q

    # graph over the (enumerable) alphabet, used by liveness
    def reachable_graph(self, letters: Iterable[Letter] | None = None) -> dict:
        letters = list(self.alphabet.letters() if letters is None else letters)
        succ: dict = {}
        todo = deque([self.initial])
        while todo:
            q = todo.popleft()
            if q in succ:
                continue
            out = {self.step(q, a) for a in letters}
            succ[q] = out
            todo.extend(s for s in out if s not in succ)
        return succ

    def __repr__(self):
        return f"SpecAutomaton({self.name!r}, {self.mode.value})"


@dataclass(frozen=True)
class AutomatonRun:
    state: Hashable
    trace: tuple

    @classmethod
    def start(cls, a: SpecAutomaton) -> "AutomatonRun":
        return cls(a.initial, (a.initial,))


def advance(a: SpecAutomaton, run: AutomatonRun, letter: Letter) -> AutomatonRun:
    q = a.step(run.state, letter)
    return AutomatonRun(q, run.trace + (q,))


def accepts_finite(a: SpecAutomaton, w: Sequence[Letter]) -> bool:
    if a.mode is Mode.BUCHI:
        raise ModeMismatch("Buchi automata accept no finite words")
    trace = a.run(w)
    if a.mode is Mode.FINITE:
        return a.is_accepting(trace[-1])
    return all(a.is_accepting(q) for q in trace)


def live_states(a: SpecAutomaton, letters: Iterable[Letter] | None = None) -> frozenset:
    """States from which acceptance remains possible (over reachable states)."""
    if letters is None and a._live is not None:
        return a._live
    succ = a.reachable_graph(letters)
    if a.mode is Mode.SAFETY:
        live = frozenset(q for q in succ if a.is_accepting(q))
    elif a.mode is Mode.FINITE:
        live = _backward_closure(succ, {q for q in succ if a.is_accepting(q)})
    else:
        # accepting states that lie on a cycle, then everything reaching them
        cyc = {q for q in succ if a.is_accepting(q) and q in _reach_from(succ, succ[q])}
        live = _backward_closure(succ, cyc)
    if letters is None:
        a._live = live
    return live


def in_closure(a: SpecAutomaton, w: Sequence[Letter], letters: Iterable[Letter] | None = None) -> bool:
    live = live_states(a, letters)
    return all(q in live for q in a.run(w))


def _reach_from(succ: dict, sources) -> set:
    seen = set()
    todo = list(sources)
    while todo:
        q = todo.pop()
        if q in seen:
            continue
        seen.add(q)
        todo.extend(succ.get(q, ()))
    return seen


def _backward_closure(succ: dict, targets) -> frozenset:
    pred: dict = {q: set() for q in succ}
    for q, out in succ.items():
        for s in out:
            pred.setdefault(s, set()).add(q)
    seen = set(targets)
    todo = list(targets)
    while todo:
        q = todo.pop()
        for p in pred.get(q, ()):
            if p not in seen:
                seen.add(p)
                todo.append(p)
    return frozenset(seen)


# --------------------------------------------------------------------------
# templates

DEAD = "dead"


def universal(alphabet: Alphabet = Alphabet(), inner=None, name="true") -> SpecAutomaton:
    """All finite words (over ``inner`` sys states, when given)."""
    inner = None if inner is None else frozenset(inner)

    def delta(q, a):
        return DEAD if q == DEAD or (inner is not None and a[1] not in inner) else "ok"

    return SpecAutomaton("ok", delta, {"ok"}, Mode.FINITE, alphabet, name)


def empty_language(alphabet: Alphabet = Alphabet(), name="false") -> SpecAutomaton:
    return SpecAutomaton(DEAD, lambda q, a: DEAD, (), Mode.FINITE, alphabet, name)


def reach(targets, alphabet: Alphabet = Alphabet(), inner=None, name="") -> SpecAutomaton:
    """Words whose last sys state is in ``targets`` (and never leave ``inner``)."""
    targets = frozenset(targets)
    inner = None if inner is None else frozenset(inner)

    def delta(q, a):
        y = a[1]
        if q == DEAD or (inner is not None and y not in inner):
            return DEAD
        return "at" if y in targets else "away"

    return SpecAutomaton("init", delta, {"at"}, Mode.FINITE, alphabet, name or f"reach{sorted(map(str, targets))}")


def avoid_until_exit(avoid, alphabet: Alphabet = Alphabet(), inner=None, name="") -> SpecAutomaton:
    """Safety: never visit ``avoid`` while inside the context."""
    avoid = frozenset(avoid)
    inner = None if inner is None else frozenset(inner)

    def delta(q, a):
        y = a[1]
        if q == DEAD or y in avoid or (inner is not None and y not in inner):
            return DEAD
        return "safe"

    return SpecAutomaton("safe", delta, {"safe"}, Mode.SAFETY, alphabet, name or "avoid")


def visit_all(targets, alphabet: Alphabet = Alphabet(), inner=None, name="") -> SpecAutomaton:
    """Words that have visited every sys state in ``targets``."""
    targets = frozenset(targets)
    inner = None if inner is None else frozenset(inner)

    def delta(q, a):
        y = a[1]
        if q == DEAD or (inner is not None and y not in inner):
            return DEAD
        return q | ({y} & targets)

    return SpecAutomaton(
        frozenset(), delta, lambda q: q != DEAD and q == targets, Mode.FINITE, alphabet, name or "visit_all"
    )


def gf(predicates: Sequence[Callable[[Letter], bool]], alphabet: Alphabet = Alphabet(), name="") -> SpecAutomaton:
    """Always-eventually for each predicate (degeneralised round-robin counter).

    State ``(i, hit)``: waiting for predicate ``i``; ``hit`` marks a completed round.
    """
    n = len(predicates)
    if n == 0:
        return SpecAutomaton((0, True), lambda q, a: (0, True), lambda q: True, Mode.BUCHI, alphabet, name or "gf")

    def delta(q, a):
        i, _ = q
        j = i
        while j < n and predicates[j](a):
            j += 1
        if j == n:
            return (0, True)
        return (j, False)

    return SpecAutomaton((0, False), delta, lambda q: q[1], Mode.BUCHI, alphabet, name or "gf")


def always_inner(inner, alphabet: Alphabet = Alphabet(), name="inner-forever") -> SpecAutomaton:
    """Buchi automaton of infinite words that never leave ``inner``."""
    inner = frozenset(inner)

    def delta(q, a):
        return DEAD if q == DEAD or a[1] not in inner else "in"

    return SpecAutomaton("in", delta, {"in"}, Mode.BUCHI, alphabet, name)
