"""Abstract game graphs per layer, local game graphs per context, and the
locality check on restriction maps.
"""
from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field

from .game import GameGraph
from .layering import Layering


class NonSerialResult(RuntimeError):
    pass


class EmptyContext(ValueError):
    pass


class AbstractGameGraph(GameGraph):
    def __init__(self, *args, provenance: str = "computed", nonserial=(), repaired=(), **kw):
        super().__init__(*args, **kw)
        self.provenance = provenance
        # abstract pairs without env or sys successors (after repair)
        self.nonserial = list(nonserial)
        # pairs that received a sys self-loop because staying forever is possible
        self.repaired = list(repaired)


class _ClassExplorer:
    """Forward exploration of layer-0 positions confined to one layer-``l`` class."""

    def __init__(self, g0: GameGraph, lay: Layering, l: int, cls):
        self.g0, self.lay, self.l, self.cls = g0, lay, l, cls

    def explore(self, starts):
        """Return (abstract envs seen at sys turns, exits, can-stay-forever)."""
        g0, lay, l, cls = self.g0, self.lay, self.l, self.cls
        seen = set(starts)
        todo = deque(starts)
        env_seen = set()
        exits = set()
        edges = defaultdict(set)
        while todo:
            x, y = todo.popleft()
            for x2 in g0.env_succ(x, y):
                ax = lay.rx_up(l, x2, y)
                env_seen.add(ax)
                for y2 in g0.sys_succ(x2, y):
                    if lay.ry_up(l, y2) == cls:
                        edges[(x, y)].add((x2, y2))
                        if (x2, y2) not in seen:
                            seen.add((x2, y2))
                            todo.append((x2, y2))
                    else:
                        exits.add((ax, lay.ry_up(l, y2)))
        # greatest set of positions with an in-class successor inside the set
        alive = set(seen)
        changed = True
        while changed:
            changed = False
            for p in list(alive):
                if not (edges.get(p, set()) & alive):
                    alive.discard(p)
                    changed = True
        return env_seen, exits, bool(alive)


def build_agg(g0: GameGraph, lay: Layering, l: int, strict: bool = False) -> AbstractGameGraph:
    """Abstract game graph of layer ``l`` computed from the concrete game.

    Concrete positions are grouped by the projected letter they open (at
    time 0 or right after an abstract sys change).  Each group is explored
    forward inside its class, collecting the abstract env values observed
    before the next abstract sys change and the abstract exits together with
    the abstract env value at the exit step.
    """
    if l == 0:
        raise ValueError("layer 0 is the concrete game")
    xs_l, ys_l = lay.env_states[l], lay.sys_states[l]
    groups = defaultdict(set)
    for x in g0.env_states:
        for y in g0.sys_states:
            groups[lay.lift(l, x, y)].add((x, y))
            # positions entered by a class change start a projected letter whose
            # env part is lifted with the sys state before the change
            cls = lay.ry_up(l, y)
            for x2 in g0.env_succ(x, y):
                ax = None
                for y2 in g0.sys_succ(x2, y):
                    ay2 = lay.ry_up(l, y2)
                    if ay2 != cls:
                        ax = lay.rx_up(l, x2, y) if ax is None else ax
                        groups[(ax, ay2)].add((x2, y2))
    env_t = defaultdict(set)
    sys_t = defaultdict(set)
    stay = set()
    for (ax, ay), starts in groups.items():
        ex = _ClassExplorer(g0, lay, l, ay)
        env_seen, exits, can_stay = ex.explore(sorted(starts, key=repr))
        env_t[(ax, ay)] |= env_seen
        for bx, by in exits:
            sys_t[(bx, ay)].add(by)
        if can_stay:
            stay.add((ax, ay))
    nonserial, repaired = [], []
    for ax in xs_l:
        for ay in ys_l:
            if not sys_t.get((ax, ay)):
                if (ax, ay) in stay:
                    sys_t[(ax, ay)] = {ay}
                    repaired.append((ax, ay))
                else:
                    nonserial.append(("sys", ax, ay))
            if not env_t.get((ax, ay)):
                nonserial.append(("env", ax, ay))
    if strict and nonserial:
        raise NonSerialResult(nonserial[:10])
    return AbstractGameGraph(
        xs_l, ys_l, dict(env_t), dict(sys_t), name=f"AGG{l}",
        provenance="computed", nonserial=nonserial, repaired=repaired,
    )


def declared_agg(lay: Layering, l: int, env_trans, sys_trans) -> AbstractGameGraph:
    return AbstractGameGraph(
        lay.env_states[l], lay.sys_states[l], env_trans, sys_trans, name=f"AGG{l}", provenance="declared"
    )


def post(agg: GameGraph, nu) -> frozenset:
    out = set()
    for x in agg.env_states:
        out |= agg.sys_succ(x, nu)
    out.discard(nu)
    return frozenset(out)


@dataclass
class LocalGameGraph:
    layer: int
    context: object
    env_states: tuple
    inner: tuple
    outer: tuple
    env_trans: dict
    sys_trans: dict
    # exit state -> the layer l+1 context it belongs to
    exit_context: dict = field(default_factory=dict)
    # successor contexts of this context in the layer l+1 graph
    post_set: frozenset = frozenset()
    _graph: GameGraph | None = field(default=None, repr=False)

    @property
    def sys_states(self) -> tuple:
        return self.inner + self.outer

    def env_succ(self, x, y) -> frozenset:
        return self.env_trans.get((x, y), frozenset())

    def sys_succ(self, x, y) -> frozenset:
        return self.sys_trans.get((x, y), frozenset())

    def is_inner(self, y) -> bool:
        return y in self._inner_set

    def exits_into(self, nu_next) -> tuple:
        return tuple(y for y in self.outer if self.exit_context.get(y) == nu_next)

    def __post_init__(self):
        self._inner_set = frozenset(self.inner)
        self._outer_set = frozenset(self.outer)

    def as_graph(self) -> GameGraph:
        if self._graph is None:
            self._graph = GameGraph(self.env_states, self.sys_states, self.env_trans, self.sys_trans,
                                    name=f"LGG{self.layer}[{self.context}]")
        return self._graph


def build_lgg(agg_l: GameGraph, agg_up: GameGraph, lay: Layering, l: int, nu) -> LocalGameGraph:
    """Local game of layer ``l`` in context ``nu`` (a layer ``l+1`` sys state)."""
    inner = lay.inner(l, nu)
    if not inner:
        raise EmptyContext(nu)
    inner_set = set(inner)
    xs_nu = lay.restricted_env_states(l, nu)
    targets = post(agg_up, nu)
    outer = []
    seen_out = set()
    for y in inner:
        for x in xs_nu:
            for y2 in agg_l.sys_succ(x, y):
                if y2 not in inner_set and y2 not in seen_out and lay.context(l, y2) in targets:
                    seen_out.add(y2)
    outer = tuple(y for y in lay.sys_states[l] if y in seen_out)
    local = inner_set | seen_out
    env_t = defaultdict(set)
    sys_t = defaultdict(set)
    for x in agg_l.env_states:
        rx = lay.restrict(l, nu, x)
        for y in inner:
            for x2 in agg_l.env_succ(x, y):
                env_t[(rx, y)].add(lay.restrict(l, nu, x2))
            for y2 in agg_l.sys_succ(x, y):
                if y2 in local:
                    sys_t[(rx, y)].add(y2)
    return LocalGameGraph(
        l, nu, xs_nu, tuple(inner), outer,
        {k: frozenset(v) for k, v in env_t.items()},
        {k: frozenset(v) for k, v in sys_t.items()},
        {y: lay.context(l, y) for y in outer},
        targets,
    )


def check_locality(g: GameGraph, lay: Layering, l: int) -> list:
    """Triples ``(x, y, y')`` where a move depends on out-of-context env info."""
    if l >= lay.L:
        return []
    out = []
    for nu in lay.sys_states[l + 1]:
        for y in lay.inner(l, nu):
            for x in g.env_states:
                rx = lay.restrict(l, nu, x)
                for y2 in sorted(g.sys_succ(x, y) ^ g.sys_succ(rx, y), key=repr):
                    out.append((nu, x, y, y2))
    return out


def is_local_play(lgg, seg) -> bool:
    """Whether a context segment is a play of its local game.

    The first letter carries an env value restricted to the previous
    context, so only the transitions after it are checked against the
    local env map from a state of the local env domain.
    """
    for k in range(1, len(seg)):
        (x0, y0), (x1, y1) = seg[k - 1], seg[k]
        if y1 not in lgg.sys_succ(x1, y0):
            return False
        if k >= 2 and x1 not in lgg.env_succ(x0, y0):
            return False
        if x1 not in lgg.env_states:
            return False
    return True


class GraphFamily:
    """Concrete game, computed (or declared) AGGs, and lazily built LGGs."""

    def __init__(self, g0: GameGraph, lay: Layering, aggs: list | None = None):
        self.lay = lay
        self.graphs = [g0] + (list(aggs) if aggs is not None else [build_agg(g0, lay, l) for l in range(1, lay.L + 1)])
        self._lgg: dict = {}

    @property
    def L(self) -> int:
        return self.lay.L

    def graph(self, l: int) -> GameGraph:
        return self.graphs[l]

    def lgg(self, l: int, nu) -> LocalGameGraph:
        if l == self.L:
            raise ValueError("the top layer is played on its abstract game graph")
        key = (l, nu)
        if key not in self._lgg:
            self._lgg[key] = build_lgg(self.graphs[l], self.graphs[l + 1], self.lay, l, nu)
        return self._lgg[key]

    def top_as_local(self) -> LocalGameGraph:
        """The top abstract game wrapped as a context-free local game."""
        key = ("top",)
        if key not in self._lgg:
            g = self.graphs[self.L]
            env_t, sys_t = {}, {}
            for x in g.env_states:
                for y in g.sys_states:
                    if g.env_succ(x, y):
                        env_t[(x, y)] = g.env_succ(x, y)
                    if g.sys_succ(x, y):
                        sys_t[(x, y)] = g.sys_succ(x, y)
            self._lgg[key] = LocalGameGraph(self.L, None, g.env_states, g.sys_states, (), env_t, sys_t)
        return self._lgg[key]


class FlatLocalGame:
    """A whole game graph viewed as a context-free local game (no exits)."""

    def __init__(self, g: GameGraph):
        self._g = g
        self.layer = 0
        self.context = None
        self.env_states = g.env_states
        self.sys_states = g.sys_states
        self.inner = g.sys_states
        self.outer = ()
        self.post_set = frozenset()
        self.exit_context = {}

    def env_succ(self, x, y):
        return self._g.env_succ(x, y)

    def sys_succ(self, x, y):
        return self._g.sys_succ(x, y)

    def is_inner(self, y) -> bool:
        return y in self._g.sys_index
