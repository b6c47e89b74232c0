"""Local game solving on product arenas.

An arena is the product of a local game graph with the objective automaton
(and, optionally, an assumption automaton), explored from a root position.
Two kinds of positions alternate:

* ``("S", x, y, q)`` - the environment has just moved to ``x``; the system picks
  ``y'`` and the letter ``(x, y')`` is read;
* ``("E", x, y, q)`` - the letter ``(x, y)`` has been read; the environment picks
  the next ``x'`` (no moves when ``y`` is an exit state).

``q`` is the pair ``(objective state, assumption state or None)``.  A position
without moves ends the play; it counts as won only if the objective accepts
at that point.
"""
from __future__ import annotations

import enum
import time
from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .automata import Mode, SpecAutomaton


class Unrealizable(RuntimeError):
    pass


class UnsupportedObjective(ValueError):
    pass


class AlphabetMismatch(ValueError):
    pass


class ArenaTooLarge(RuntimeError):
    pass


class SolveMode(enum.Enum):
    WORST_CASE = "worst-case"
    ASSUMPTION = "assumption-restricted"


@dataclass
class SolveStats:
    positions: int = 0
    iterations: int = 0
    seconds: float = 0.0


# global tallies read by the bench command
STATS = {"calls": 0, "positions": 0, "seconds": 0.0}


def reset_stats():
    STATS.update(calls=0, positions=0, seconds=0.0)


class Arena:
    def __init__(self, lgg, objective: SpecAutomaton, assumption: SpecAutomaton | None,
                 root_node: tuple, sys_order: dict | None = None, env_order: dict | None = None,
                 max_positions: int = 2_000_000, extra_env: dict | None = None):
        self.lgg = lgg
        self.objective = objective
        self.assumption = assumption
        self.sys_order = sys_order or {y: i for i, y in enumerate(lgg.sys_states)}
        self.env_order = env_order or {x: i for i, x in enumerate(lgg.env_states)}
        self.nodes: list = []
        self.index: dict = {}
        self.succ: list[list[int]] = []
        self._extra_env = extra_env or {}
        self._build(root_node, max_positions)
        self.root = 0
        n = len(self.nodes)
        self.sys_owned = [self.nodes[i][0] == "S" for i in range(n)]
        self.pred: list[list[int]] = [[] for _ in range(n)]
        for i, out in enumerate(self.succ):
            for j in out:
                self.pred[j].append(i)

    def _adv(self, q, letter):
        qo, qa = q
        qo = self.objective.step(qo, letter)
        if self.assumption is not None:
            qa = self.assumption.step(qa, letter)
        return (qo, qa)

    def _build(self, root, cap):
        lgg = self.lgg
        self.index[root] = 0
        self.nodes.append(root)
        self.succ.append([])
        todo = deque([0])
        inner = set(lgg.inner)
        ykey = lambda y: self.sys_order.get(y, len(self.sys_order))
        xkey = lambda x: self.env_order.get(x, len(self.env_order))
        while todo:
            i = todo.popleft()
            kind, x, y, q = self.nodes[i]
            if kind == "S":
                nxt = [("E", x, y2, self._adv(q, (x, y2))) for y2 in sorted(lgg.sys_succ(x, y), key=ykey)]
            elif y in inner:
                xs = self._extra_env.get((x, y)) or lgg.env_succ(x, y)
                nxt = [("S", x2, y, q) for x2 in sorted(xs, key=xkey)]
            else:
                nxt = []
            out = []
            for node in nxt:
                j = self.index.get(node)
                if j is None:
                    j = len(self.nodes)
                    if j >= cap:
                        raise ArenaTooLarge(cap)
                    self.index[node] = j
                    self.nodes.append(node)
                    self.succ.append([])
                    todo.append(j)
                out.append(j)
            self.succ[i] = out

    def __len__(self):
        return len(self.nodes)

    def objective_states(self):
        return [n[3][0] for n in self.nodes]

    def assumption_states(self):
        return [n[3][1] for n in self.nodes]


# ---------------------------------------------------------------------------
# fixpoints


@dataclass
class AttractorResult:
    region: set
    rank: dict
    move: dict  # owner-position -> chosen successor (for the attracting player)


def attractor(arena: Arena, target, player: str = "system", within=None, succ=None) -> AttractorResult:
    """Positions from which ``player`` forces a visit to ``target``.

    Ranks are BFS levels; the move table picks a successor of minimal rank,
    ties going to the first successor in arena order (lowest state index).
    Non-target positions without successors are never attracted.
    """
    succ = succ if succ is not None else arena.succ
    mine = arena.sys_owned if player == "system" else [not s for s in arena.sys_owned]
    inside = (lambda i: True) if within is None else within.__contains__
    rank = {}
    todo = deque()
    for t in target:
        if inside(t) and t not in rank:
            rank[t] = 0
            todo.append(t)
    count = {}
    while todo:
        j = todo.popleft()
        for i in arena.pred[j]:
            if i in rank or not inside(i) or j not in succ[i]:
                continue
            if mine[i]:
                rank[i] = rank[j] + 1
                todo.append(i)
            else:
                if i not in count:
                    count[i] = sum(1 for s in succ[i] if inside(s))
                count[i] -= 1
                if count[i] == 0:
                    rank[i] = rank[j] + 1
                    todo.append(i)
    move = {}
    for i in rank:
        if rank[i] > 0 and mine[i]:
            best = None
            for s in succ[i]:
                if s in rank and (best is None or rank[s] < rank[best]):
                    best = s
            move[i] = best
    return AttractorResult(set(rank), rank, move)


def _cpre_region(arena, i, Z, mine, succ) -> bool:
    out = [s for s in succ[i]]
    if mine[i]:
        return any(s in Z for s in out)
    return bool(out) and all(s in Z for s in out)


def buchi(arena: Arena, accepting, player: str = "system", succ=None) -> tuple[set, dict]:
    """Buchi winning region for ``player`` and a positional move table."""
    succ = succ if succ is not None else arena.succ
    mine = arena.sys_owned if player == "system" else [not s for s in arena.sys_owned]
    other = "environment" if player == "system" else "system"
    Z = set(range(len(arena)))
    acc = set(accepting)
    iters = 0
    while True:
        iters += 1
        sub = _restricted_succ(succ, Z)
        tgt = {i for i in acc & Z if _cpre_region(arena, i, Z, mine, sub)}
        A = attractor(arena, tgt, player, within=Z, succ=sub)
        trap = Z - A.region
        if not trap:
            break
        B = attractor(arena, trap, other, within=Z, succ=sub)
        Z -= B.region
    move = dict(A.move)
    for i in tgt:
        if mine[i]:
            cands = [s for s in sub[i] if s in Z]
            move[i] = min(cands, key=lambda s: A.rank.get(s, 0)) if cands else None
    return Z, move


def _restricted_succ(succ, Z):
    """Successor lists cut down to ``Z`` (positions outside keep their lists)."""

    class _View:
        def __getitem__(self, i):
            return [s for s in succ[i] if s in Z] if i in Z else succ[i]

    return _View()


def safety(arena: Arena, safe, player: str = "system", succ=None) -> tuple[set, dict]:
    succ = succ if succ is not None else arena.succ
    mine = arena.sys_owned if player == "system" else [not s for s in arena.sys_owned]
    other = "environment" if player == "system" else "system"
    unsafe = set(range(len(arena))) - set(safe)
    bad = attractor(arena, unsafe, other, succ=succ)
    W = set(range(len(arena))) - bad.region
    move = {}
    for i in W:
        if mine[i]:
            cands = [s for s in succ[i] if s in W]
            move[i] = cands[0] if cands else None
    return W, move


def reach_or_cobuchi(arena: Arena, target, bad, succ=None) -> tuple[set, dict]:
    """System wins by reaching ``target`` or by eventually avoiding ``bad`` forever."""
    succ = succ if succ is not None else arena.succ
    mine = arena.sys_owned
    first = attractor(arena, target, "system", succ=succ)
    won = set(first.region)
    move = dict(first.move)
    R = set(range(len(arena))) - won
    bad = set(bad)
    while R:
        sub = _restricted_succ(succ, R)
        env_a = attractor(arena, bad & R, "environment", within=R, succ=sub)
        trap = R - env_a.region
        if not trap:
            break
        a = attractor(arena, trap, "system", within=R, succ=sub)
        for i in trap:
            if mine[i]:
                cands = [s for s in sub[i] if s in trap]
                move[i] = cands[0] if cands else None
        move.update(a.move)
        won |= a.region
        R -= a.region
    return won, move


# ---------------------------------------------------------------------------
# strategies


@dataclass
class PruneResult:
    succ: list
    pruned: int
    warning: str | None = None
    region: set | None = None  # env's assumption-winning region when pruning applied


def restrict_env(arena: Arena) -> PruneResult:
    """Drop env moves that leave the environment's winning region for its assumption."""
    zeta = arena.assumption
    if zeta is None:
        return PruneResult(arena.succ, 0)
    # a play that ends in a dead end (an exit or a finished task) does not
    # count against the environment, so dead ends become accepting sinks
    looped = [out if out else [i] for i, out in enumerate(arena.succ)]
    acc = [i for i, n in enumerate(arena.nodes) if zeta.is_accepting(n[3][1]) or not arena.succ[i]]
    if zeta.mode is Mode.BUCHI:
        Wz, _ = buchi(arena, acc, "environment", succ=looped)
    elif zeta.mode is Mode.SAFETY:
        Wz, _ = safety(arena, acc, "environment", succ=looped)
    else:
        raise UnsupportedObjective(f"assumption mode {zeta.mode}")
    if arena.root not in Wz:
        return PruneResult(arena.succ, 0, "assumption cannot be met from the root; arena left unpruned")
    succ = []
    pruned = 0
    for i, out in enumerate(arena.succ):
        if not arena.sys_owned[i] and i in Wz:
            keep = [s for s in out if s in Wz]
            pruned += len(out) - len(keep)
            succ.append(keep)
        else:
            succ.append(out)
    return PruneResult(succ, pruned, None, Wz)


class SolvedStrategy:
    """Winning region plus positional move table on the product arena.

    ``decide(history, x)`` follows the possibly-winning wrapper: it is defined
    only at system positions inside the winning region from which the
    objective is not already met, and returns ``None`` (blocked) otherwise.
    """

    def __init__(self, arena: Arena, win: set, move: dict, done_positions: set,
                 stats: SolveStats, warning: str | None = None, succ=None, allowed=None):
        self.arena = arena
        self.win = win
        self.move = move
        self.done_positions = done_positions
        self.stats = stats
        self.warning = warning
        self.succ = succ if succ is not None else arena.succ
        # positions the environment may enter without breaking its assumption
        self.allowed = allowed
        self._memo: tuple | None = None
        self._state = None  # for next_move

    @property
    def realizable(self) -> bool:
        return self.arena.root in self.win

    def memory(self, history: Sequence[tuple]):
        a, z = self.arena.objective, self.arena.assumption
        n = len(history)
        if self._memo is not None:
            m, last, q = self._memo
            if m <= n and history[m - 1] == last:
                start = m
            else:
                start, q = 0, (a.initial, z.initial if z else None)
        else:
            start, q = 0, (a.initial, z.initial if z else None)
        for letter in history[start:]:
            q = (a.step(q[0], letter), z.step(q[1], letter) if z else None)
        if n:
            self._memo = (n, history[-1], q)
        return q

    def position(self, history, x):
        y = history[-1][1]
        return self.arena.index.get(("S", x, y, self.memory(history)))

    def defined(self, history, x) -> bool:
        return self.decide(history, x) is not None

    def decide(self, history, x):
        i = self.position(history, x)
        if i is None or i not in self.win or i in self.done_positions:
            return None
        if self.allowed is not None and i not in self.allowed:
            return None
        j = self.move.get(i)
        if j is None:
            return None
        return self.arena.nodes[j][2]

    # single-consumer stateful interface
    def reset(self, history):
        self._state = (list(history), self.memory(history))

    def next_move(self, x):
        hist, _ = self._state
        y = self.decide(hist, x)
        if y is not None:
            hist.append((x, y))
        return y

    __call__ = decide


def sol(lgg, init_history: Sequence[tuple], objective: SpecAutomaton,
        assumption: SpecAutomaton | None = None, mode: SolveMode = SolveMode.WORST_CASE,
        next_env=None, sys_order=None, env_order=None, strict: bool = False,
        max_positions: int = 2_000_000) -> SolvedStrategy:
    """Solve the local game from ``init_history``.

    With ``next_env`` the arena is rooted at the system position after that
    env move, otherwise at the env position after the history.
    """
    t0 = time.perf_counter()
    if init_history is None or not len(init_history):
        raise ValueError("empty initial history")
    if assumption is not None and not objective.alphabet.same_as(assumption.alphabet):
        if objective.alphabet.env is not None and assumption.alphabet.env is not None:
            raise AlphabetMismatch("objective and assumption alphabets differ")
    use_assumption = assumption if mode is SolveMode.ASSUMPTION else None
    if use_assumption is not None and use_assumption.mode is Mode.FINITE:
        raise UnsupportedObjective("assumptions are Safety or Buchi automata")
    q = (objective.initial, use_assumption.initial if use_assumption else None)
    for letter in init_history:
        q = (objective.step(q[0], letter), use_assumption.step(q[1], letter) if use_assumption else None)
    x_last, y_last = init_history[-1]
    root = ("E", x_last, y_last, q)
    extra = {}
    known = lgg.env_succ(x_last, y_last)
    if next_env is not None and next_env not in known:
        # the history ends with an env value restricted to the previous context;
        # later queries on the same history see values reachable from the sensed one
        extra[(x_last, y_last)] = known | {next_env} | lgg.env_succ(next_env, y_last)
    elif not known and y_last in set(lgg.inner):
        xs = set()
        for z in lgg.env_states:
            xs |= lgg.env_succ(z, y_last)
        extra[(x_last, y_last)] = frozenset(xs)
    arena = Arena(lgg, objective, use_assumption, root, sys_order, env_order, max_positions, extra)
    if next_env is not None:
        arena.root = arena.index[("S", next_env, y_last, q)]
    acc = [i for i, n in enumerate(arena.nodes) if objective.is_accepting(n[3][0])]
    warning = None
    succ = arena.succ
    allowed = None
    if use_assumption is not None:
        pr = restrict_env(arena)
        succ, warning, allowed = pr.succ, pr.warning, pr.region
    stats = SolveStats(positions=len(arena))
    done = set()
    if objective.mode is Mode.FINITE:
        done = set(acc)
        if use_assumption is not None and use_assumption.mode is Mode.BUCHI and warning is None:
            bad = _bad_for_assumption(arena, succ, done)
            win, move = reach_or_cobuchi(arena, done, bad, succ=succ)
        else:
            res = attractor(arena, done, "system", succ=succ)
            win, move = res.region, res.move
    elif objective.mode is Mode.SAFETY:
        if use_assumption is not None and use_assumption.mode is Mode.BUCHI and warning is None:
            unsafe = set(range(len(arena))) - set(acc)
            bad = _bad_for_assumption(arena, succ, set()) & unsafe
            win, move = reach_or_cobuchi(arena, set(), bad | _dead_unsafe(arena, succ, unsafe), succ=succ)
        else:
            win, move = safety(arena, acc, "system", succ=succ)
    elif objective.mode is Mode.BUCHI:
        if use_assumption is not None and use_assumption.mode is Mode.BUCHI:
            warning = (warning or "") + "Buchi objective under Buchi assumption solved worst-case"
        win, move = buchi(arena, acc, "system", succ=succ)
    else:
        raise UnsupportedObjective(objective.mode)
    stats.seconds = time.perf_counter() - t0
    STATS["calls"] += 1
    STATS["positions"] += len(arena)
    STATS["seconds"] += stats.seconds
    s = SolvedStrategy(arena, win, move, done, stats, warning, succ, allowed)
    if strict and not s.realizable:
        raise Unrealizable(root)
    return s


def _bad_for_assumption(arena: Arena, succ, target) -> set:
    """Positions the environment must visit infinitely often, plus dead ends."""
    z = arena.assumption
    bad = {i for i, n in enumerate(arena.nodes) if z.is_accepting(n[3][1])}
    bad |= {i for i in range(len(arena)) if not succ[i] and i not in target}
    return bad


def _dead_unsafe(arena, succ, unsafe) -> set:
    return {i for i in unsafe if not succ[i]}
