"""Two-player game graphs, plays, strategies and compliant play generation.

States are arbitrary hashable labels.  Each graph keeps the declaration order
of its state lists; that order is the "state index" used for deterministic
tie-breaking elsewhere in the package.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Protocol, Sequence

State = Hashable
Pair = tuple  # (env_state, sys_state)


class InitNotAPlay(ValueError):
    pass


class SystemStrategy(Protocol):
    """Partial rule ``(history, x) -> y``; returns ``None`` where undefined."""

    def __call__(self, history: Sequence[Pair], x: State) -> State | None: ...


class EnvStrategy(Protocol):
    """Total rule ``history -> x``."""

    def __call__(self, history: Sequence[Pair]) -> State: ...


def _as_successor_fn(trans) -> Callable[[State, State], frozenset]:
    if callable(trans):
        cache: dict = {}

        def succ(x, y):
            key = (x, y)
            if key not in cache:
                cache[key] = frozenset(trans(x, y))
            return cache[key]

        return succ
    table = {k: frozenset(v) for k, v in trans.items()}
    return lambda x, y: table.get((x, y), frozenset())


class GameGraph:
    """Finite game graph with environment map ``env_succ`` and system map ``sys_succ``.

    ``env_trans``/``sys_trans`` may be mappings ``(x, y) -> iterable`` or
    callables with the same signature (evaluated lazily and memoised).
    """

    def __init__(
        self,
        env_states: Iterable[State],
        sys_states: Iterable[State],
        env_trans: Mapping | Callable,
        sys_trans: Mapping | Callable,
        name: str = "",
    ):
        self.env_states = tuple(env_states)
        self.sys_states = tuple(sys_states)
        self.env_index = {x: i for i, x in enumerate(self.env_states)}
        self.sys_index = {y: i for i, y in enumerate(self.sys_states)}
        if len(self.env_index) != len(self.env_states) or len(self.sys_index) != len(self.sys_states):
            raise ValueError("duplicate state labels")
        self._env = _as_successor_fn(env_trans)
        self._sys = _as_successor_fn(sys_trans)
        self.name = name

    def env_succ(self, x: State, y: State) -> frozenset:
        return self._env(x, y)

    def sys_succ(self, x: State, y: State) -> frozenset:
        return self._sys(x, y)

    def pairs(self):
        for x in self.env_states:
            for y in self.sys_states:
                yield x, y

    def tables(self) -> tuple[dict, dict]:
        """Materialise both transition maps as dictionaries."""
        env = {(x, y): self.env_succ(x, y) for x, y in self.pairs()}
        sys_ = {(x, y): self.sys_succ(x, y) for x, y in self.pairs()}
        return env, sys_

    def __repr__(self):
        return f"GameGraph({self.name!r}, |X|={len(self.env_states)}, |Y|={len(self.sys_states)})"


@dataclass
class SerialReport:
    env_empty: list = field(default_factory=list)
    sys_empty: list = field(default_factory=list)
    out_of_range: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.env_empty or self.sys_empty or self.out_of_range)


def validate_serial(g: GameGraph) -> SerialReport:
    rep = SerialReport()
    for x, y in g.pairs():
        xs, ys = g.env_succ(x, y), g.sys_succ(x, y)
        if not xs:
            rep.env_empty.append((x, y))
        if not ys:
            rep.sys_empty.append((x, y))
        bad = [s for s in xs if s not in g.env_index] + [s for s in ys if s not in g.sys_index]
        if bad:
            rep.out_of_range.append(((x, y), bad))
    return rep


def step_ok(g: GameGraph, prev: Pair, cur: Pair) -> bool:
    (x0, y0), (x1, y1) = prev, cur
    return x1 in g.env_succ(x0, y0) and y1 in g.sys_succ(x1, y0)


def is_play(g: GameGraph, seq: Sequence[Pair]) -> bool:
    if not seq:
        raise ValueError("a play has at least one element")
    for x, y in seq:
        if x not in g.env_index or y not in g.sys_index:
            return False
    return all(step_ok(g, seq[k - 1], seq[k]) for k in range(1, len(seq)))


class Termination(enum.Enum):
    HORIZON = "HorizonReached"
    BLOCKED = "Blocked"


def compliant_play(
    g: GameGraph,
    f: SystemStrategy,
    e: EnvStrategy,
    init: Sequence[Pair],
    horizon: int,
) -> tuple[list, Termination]:
    """Extend ``init`` by ``horizon`` rounds of env move then system move."""
    play = list(init)
    if not play or not is_play(g, play):
        raise InitNotAPlay(init)
    for _ in range(horizon):
        x_prev, y_prev = play[-1]
        x = e(play)
        if x not in g.env_succ(x_prev, y_prev):
            raise ValueError(f"environment move {x!r} is not in the env map")
        y = f(play, x)
        if y is None:
            return play, Termination.BLOCKED
        play.append((x, y))
    return play, Termination.HORIZON


def dump_graph(g: GameGraph, provenance: str = "given") -> dict:
    """Plain-data form of a graph (used for golden files and the CLI)."""
    env, sys_ = g.tables()
    return {
        "name": g.name,
        "provenance": provenance,
        "env_states": [repr(x) for x in g.env_states],
        "sys_states": [repr(y) for y in g.sys_states],
        "env_trans": sorted(
            [repr(x), repr(y), sorted(repr(s) for s in v)] for (x, y), v in env.items() if v
        ),
        "sys_trans": sorted(
            [repr(x), repr(y), sorted(repr(s) for s in v)] for (x, y), v in sys_.items() if v
        ),
    }
