"""The dynamic hierarchical strategy: per tick, lift the sensed env state
bottom-up, refresh strategies top-down, evaluate the layer predicates and
emit the next layer-0 move.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

from .automata import Mode, accepts_finite
from .hrg_spec import HierarchicalGame, concat_spec, confine, reach_spec
from .layering import ProjectionBundle, _fmt
from .solver import SolveMode, SolvedStrategy, sol


class TopLevelUnrealizable(RuntimeError):
    pass


class EnvMoveIllegal(ValueError):
    pass


class LocalityBroken(RuntimeError):
    """A local strategy proposed a move the concrete game does not allow."""


class OutcomeKind(enum.Enum):
    DONE_ALL = "DoneAll"
    STUCK = "Stuck"
    HORIZON = "HorizonReached"


@dataclass
class LayerState:
    context: object = None
    target: object = None
    kind: str = "none"  # "top", "task", "done" or "empty"
    strategy: SolvedStrategy | None = None
    win: bool = False
    done: bool = False
    stuck: bool = False
    unreal: bool = False
    resolved: bool = False


@dataclass
class RunOutcome:
    kind: OutcomeKind
    k: int
    layer: int | None
    trace: list
    log: list = field(default_factory=list)
    solves: list = field(default_factory=list)

    def __str__(self):
        if self.kind is OutcomeKind.STUCK:
            return f"Stuck(layer={self.layer}, k={self.k})"
        return f"{self.kind.value}({self.k})"


@dataclass
class Terminated:
    outcome: OutcomeKind
    k: int
    layer: int | None = None


class Controller:
    """Runtime state of the hierarchical strategy (one instance per run)."""

    def __init__(self, hrg: HierarchicalGame, mode: SolveMode = SolveMode.WORST_CASE):
        self.hrg = hrg
        self.mode = mode
        self.lay = hrg.lay
        self.L = hrg.L
        self.g0 = hrg.family.graph(0)
        self.bundle = ProjectionBundle(self.lay, [tuple(hrg.init)])
        self.layers = [LayerState() for _ in range(self.L + 1)]
        self.solves = [0] * (self.L + 1)
        self.log: list = []
        self.warnings: list = []
        self._orders = [self._order(l) for l in range(self.L + 1)]
        top = self.layers[self.L]
        top.kind = "top"
        top.strategy = self._solve(self.L, None, hrg.phi_for(self.L), self.bundle.last_segment(self.L), None)
        if not top.strategy.realizable:
            raise TopLevelUnrealizable(f"top objective {hrg.phi_for(self.L).name} cannot be won")

    @property
    def play(self) -> list:
        return self.bundle.play

    @property
    def k(self) -> int:
        return len(self.bundle.play) - 1

    def _order(self, l):
        g = self.hrg.family.graph(l)
        return ({y: i for i, y in enumerate(g.sys_states)}, {x: i for i, x in enumerate(g.env_states)})

    def _solve(self, l, nu, objective, history, next_env) -> SolvedStrategy:
        lgg = self.hrg.local_game(l, nu)
        self.solves[l] += 1
        so, eo = self._orders[l]
        s = sol(lgg, history, objective, self.hrg.zeta_for(l, nu), self.mode, next_env, so, eo)
        if s.warning:
            self.warnings.append((self.k, l, s.warning))
        return s

    def tick(self, x_next):
        """Advance one step; returns the emitted sys move or a ``Terminated`` record."""
        b = self.bundle
        x_prev, y_prev = b.play[-1]
        if x_next not in self.g0.env_succ(x_prev, y_prev):
            raise EnvMoveIllegal(f"{x_next!r} is not an env successor at step {self.k}")
        k = self.k
        pend = [b.pending_env(l, x_next) for l in range(self.L + 1)]
        hists = [b.last_segment(l) for l in range(self.L + 1)]
        for l in range(self.L, -1, -1):
            st = self.layers[l]
            st.resolved = False
            hist, x_l = hists[l], pend[l]
            if l < self.L:
                up = self.layers[l + 1]
                nu = b.context(l)
                phi = self.hrg.phi_for(l, nu)
                changed = nu != st.context or k == 0
                if up.stuck:
                    st.kind, st.strategy, st.target = "empty", None, None
                elif up.done:
                    if changed or st.kind != "done":
                        # leaving the context would undo the finished layer above
                        inside = confine(phi, self.hrg.local_game(l, nu).inner)
                        st.strategy = self._solve(l, nu, inside, hist, x_l)
                        st.resolved = True
                    st.kind, st.target = "done", None
                else:
                    target = up.strategy.decide(hists[l + 1], pend[l + 1])
                    if changed or target != st.target or st.kind != "task":
                        lgg = self.hrg.local_game(l, nu)
                        objective = concat_spec(phi, reach_spec(lgg, target))
                        st.strategy = self._solve(l, nu, objective, hist, x_l)
                        st.resolved = True
                    st.kind, st.target = "task", target
                st.context = nu
            else:
                phi = self.hrg.phi_for(l)
            defined = st.strategy is not None and st.strategy.defined(hist, x_l)
            st.win = phi.mode is not Mode.BUCHI and accepts_finite(phi, hist)
            above_done = l == self.L or self.layers[l + 1].done
            st.done = above_done and st.win and not defined
            st.stuck = not st.done and not defined
        for l in range(self.L + 1):
            st = self.layers[l]
            st.unreal = st.stuck and (l == self.L or not self.layers[l + 1].stuck)
        record = self._record(k, x_next)
        if self.layers[0].stuck:
            layer = max(l for l in range(self.L + 1) if self.layers[l].unreal)
            record["terminated"] = f"Stuck(layer={layer})"
            self.log.append(record)
            return Terminated(OutcomeKind.STUCK, k, layer)
        if self.layers[0].done:
            record["terminated"] = "DoneAll"
            self.log.append(record)
            return Terminated(OutcomeKind.DONE_ALL, k)
        y = self.layers[0].strategy.decide(hists[0], pend[0])
        if y not in self.g0.sys_succ(x_next, y_prev):
            raise LocalityBroken(f"move {y!r} at step {k} is not allowed by the concrete game")
        b.append((x_next, y))
        record["move"] = _fmt(y)
        self.log.append(record)
        return y

    def _record(self, k, x_next) -> dict:
        return {
            "k": k,
            "x": _fmt(x_next),
            "layers": [
                {
                    "context": _fmt(st.context),
                    "target": _fmt(st.target),
                    "kind": st.kind,
                    "win": st.win,
                    "done": st.done,
                    "stuck": st.stuck,
                    "unreal": st.unreal,
                    "resolved": st.resolved,
                }
                for st in self.layers
            ],
        }


def init(hrg: HierarchicalGame, mode: SolveMode = SolveMode.WORST_CASE) -> Controller:
    return Controller(hrg, mode)


def run(hrg: HierarchicalGame, env: Callable, horizon: int,
        mode: SolveMode = SolveMode.WORST_CASE) -> RunOutcome:
    """Play the hierarchical strategy against ``env`` (``history -> x``)."""
    try:
        ctl = Controller(hrg, mode)
    except TopLevelUnrealizable:
        return RunOutcome(OutcomeKind.STUCK, 0, hrg.L, [tuple(hrg.init)], [], [0] * hrg.L + [1])
    for _ in range(horizon):
        r = ctl.tick(env(ctl.play))
        if isinstance(r, Terminated):
            return RunOutcome(r.outcome, r.k, r.layer, list(ctl.play), ctl.log, list(ctl.solves))
    return RunOutcome(OutcomeKind.HORIZON, ctl.k, None, list(ctl.play), ctl.log, list(ctl.solves))
