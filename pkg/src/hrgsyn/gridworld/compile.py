"""Compilation of a building scenario into the concrete game, the three-layer
layering (cells, rooms, floors) and the hierarchical game.

Env states at layer 0 are sets of occupied cells, enumerated over the
declared controllable elements (doors and obstacles).  At layer 1 they are
sets of closed doors and at layer 2 sets of blocked staircases.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ..automata import Mode, SpecAutomaton, avoid_until_exit, gf, reach, universal, visit_all
from ..game import GameGraph
from ..hiergraphs import GraphFamily, build_agg, declared_agg
from ..hrg_spec import HierarchicalGame
from ..layering import Layering
from .scenario import BuildingScenario, GeometryError, SchemaError


class StateBlowup(RuntimeError):
    pass


DEFAULT_CAP = 4096


def cell_label(level: int, col: int, row: int) -> str:
    if col < 10 and row < 10:
        return f"q{level}_{col}{row}"
    return f"q{level}_{col}.{row}"


@dataclass(frozen=True)
class Element:
    kind: str  # "door" or "obstacle"
    id: str
    cells: frozenset  # cell labels
    dynamic: bool


@dataclass
class CompiledBuilding:
    scenario: BuildingScenario
    g0: GameGraph
    lay: Layering
    hrg: HierarchicalGame
    labels: dict  # cell tuple -> label
    cells: dict  # label -> cell tuple
    room_of: dict  # cell label -> room id
    floor_of: dict  # room id -> floor id
    elements: list
    neighbors: dict  # cell label -> passable neighbor labels
    region: dict  # room id -> cell labels relevant to that room
    door_cells: dict  # door id -> cell labels
    init_x: frozenset
    stats: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.g0, self.lay, self.hrg))

    def label(self, ref) -> str:
        """Cell label from ``[floor, col, row]`` or a label string."""
        if isinstance(ref, str):
            if ref not in self.cells:
                raise KeyError(ref)
            return ref
        return self.labels[(str(ref[0]), int(ref[1]), int(ref[2]))]

    def door_closed(self, door: str, x: frozenset) -> bool:
        return self.door_cells[door] <= x

    def legal_env(self, x, y) -> frozenset:
        return self.g0.env_succ(x, y)


def _passable_pairs(sc: BuildingScenario, labels: dict, owner: dict):
    walls = {frozenset((labels[a], labels[b])) for f in sc.floors for a, b in f.walls}
    pairs = set()
    for r in sc.rooms:
        cs = set(r.cells)
        for c in r.cells:
            for dc, dr in ((1, 0), (0, 1)):
                n = (c[0], c[1] + dc, c[2] + dr)
                if n in cs:
                    p = frozenset((labels[c], labels[n]))
                    if p not in walls:
                        pairs.add(p)
    for f in sc.floors:
        for a, b in f.openings:
            pairs.add(frozenset((labels[a], labels[b])))
    for d in sc.doors:
        for a, b in itertools.combinations(d.cells, 2):
            if owner[a] != owner[b] and a[0] == b[0] and abs(a[1] - b[1]) + abs(a[2] - b[2]) == 1:
                pairs.add(frozenset((labels[a], labels[b])))
    for s in sc.stairs:
        for a, b in s.links:
            pairs.add(frozenset((labels[a], labels[b])))
    return pairs


def compile_building(sc: BuildingScenario, cap: int = DEFAULT_CAP) -> CompiledBuilding:
    levels = {f.id: f.level for f in sc.floors}
    labels, cells, owner = {}, {}, {}
    order = []
    for f in sc.floors:
        fcells = sorted((c for r in f.rooms for c in r.cells), key=lambda c: (c[1], c[2]))
        for c in fcells:
            lab = cell_label(levels[f.id], c[1], c[2])
            if lab in cells:
                raise GeometryError(f"duplicate cell label {lab}")
            labels[c], cells[lab] = lab, c
            order.append(lab)
    for r in sc.rooms:
        for c in r.cells:
            owner[c] = r.id
    room_of = {labels[c]: rid for c, rid in owner.items()}
    floor_of = {r.id: r.floor for r in sc.rooms}
    neighbors = {lab: set() for lab in order}
    for p in _passable_pairs(sc, labels, owner):
        a, b = tuple(p)
        neighbors[a].add(b)
        neighbors[b].add(a)
    neighbors = {k: frozenset(v) for k, v in neighbors.items()}

    door_cells = {d.id: frozenset(labels[c] for c in d.cells) for d in sc.doors}
    elements = [Element("door", d.id, door_cells[d.id], True) for d in sc.doors]
    elements += [Element("obstacle", labels[o.cell], frozenset([labels[o.cell]]), not o.fixed) for o in sc.obstacles]
    used = set()
    for e in elements:
        if used & e.cells:
            raise GeometryError(f"element {e.id} overlaps another door or obstacle")
        used |= e.cells
    if 2 ** len(elements) > cap:
        raise StateBlowup(f"{2 ** len(elements)} env states exceed the cap {cap}")

    def state_of(active) -> frozenset:
        out = set()
        for e in active:
            out |= e.cells
        return frozenset(out)

    xs0 = [state_of(c) for n in range(len(elements) + 1) for c in itertools.combinations(elements, n)]
    init_x = state_of([e for e in elements if (e.kind == "door" and e.id in sc.occupied_doors)
                       or (e.kind == "obstacle" and cells[e.id] in sc.occupied_obstacles)])
    dynamic = [e for e in elements if e.dynamic]

    def env_trans(x, y):
        fixed = [e for e in elements if not e.dynamic and e.cells <= x]
        base = state_of(fixed)
        out = []
        for n in range(len(dynamic) + 1):
            for c in itertools.combinations(dynamic, n):
                x2 = base | state_of(c)
                if y not in x2:
                    out.append(x2)
        return out or [x]

    couplings = {}
    for cp in sc.couplings:
        a, b = labels[cp[0]], labels[cp[1]]
        couplings.setdefault((a, b), set()).add(labels[cp[2]])

    def sys_trans(x, y):
        return [y] + [n for n in neighbors[y] if n not in x and not (couplings.get((y, n), set()) & x)]

    g0 = GameGraph(xs0, order, env_trans, sys_trans, name=f"{sc.name}:cells")

    # layers 1 and 2
    room_ids = [r.id for r in sc.rooms]
    floor_ids = [f.id for f in sc.floors]
    door_ids = [d.id for d in sc.doors]
    stair_doors = {s.id: s.door for s in sc.stairs if s.door}
    xs1 = [frozenset(c) for n in range(len(door_ids) + 1) for c in itertools.combinations(door_ids, n)]
    stair_ids = list(stair_doors)
    xs2 = [frozenset(c) for n in range(len(stair_ids) + 1) for c in itertools.combinations(stair_ids, n)]

    def rx1(x, y):
        return frozenset(d for d in door_ids if door_cells[d] <= x)

    def rx2(x1, y1):
        return frozenset(s for s, d in stair_doors.items() if d in x1)

    region = {}
    for r in sc.rooms:
        mine = {labels[c] for c in r.cells}
        region[r.id] = frozenset(mine | {n for c in mine for n in neighbors[c]})
    elem_by_region = {rid: [e for e in elements if e.cells & reg] for rid, reg in region.items()}
    by_cells = {}

    def r0(nu, x):
        key = (nu, x)
        v = by_cells.get(key)
        if v is None:
            v = by_cells[key] = state_of(e for e in elem_by_region[nu] if e.cells <= x)
        return v

    floor_doors = {f: frozenset(d.id for d in sc.doors if any(floor_of[r] == f for r in d.rooms)) for f in floor_ids}

    def r1(nu, x1):
        return x1 & floor_doors[nu]

    lay = Layering(
        [order, room_ids, floor_ids],
        [xs0, xs1, xs2],
        [None, room_of, floor_of],
        [None, rx1, rx2],
        [r0, r1, None],
    )
    aggs = [declared_graph(lay, l, sc.abstract_graphs[l]) if l in sc.abstract_graphs else build_agg(g0, lay, l)
            for l in (1, 2)]
    family = GraphFamily(g0, lay, aggs)
    cb = CompiledBuilding(sc, g0, lay, None, labels, cells, room_of, floor_of, elements, neighbors,
                          region, door_cells, init_x)
    phi, zeta = _instantiate(sc, cb, lay)
    init = (init_x, labels[sc.robot])
    cb.hrg = HierarchicalGame(family, init, phi, zeta, name=sc.name)
    cb.stats = {"env_states": len(xs0), "cells": len(order), "rooms": len(room_ids), "floors": len(floor_ids)}
    return cb


def declared_graph(lay: Layering, l: int, edges):
    """Abstract graph from an adjacency list: an edge can be taken while its
    gate is not in the abstract env state.  The env may change arbitrarily."""
    adj = {}
    for a, b, via in edges:
        adj.setdefault(a, []).append((b, via))
        adj.setdefault(b, []).append((a, via))
    xs, ys = lay.env_states[l], lay.sys_states[l]
    env_t = {(x, y): xs for x in xs for y in ys}
    sys_t = {}
    for x in xs:
        for y in ys:
            nxt = {b for b, via in adj.get(y, ()) if via is None or via not in x}
            sys_t[(x, y)] = nxt or {y}
    return declared_agg(lay, l, env_t, sys_t)


# ---------------------------------------------------------------------------
# spec and assumption templates


def _targets(cb: CompiledBuilding, l: int, items) -> list:
    if l == 0:
        return [cb.label(i) for i in items]
    return [str(i) for i in items]


def task_template(cb: CompiledBuilding, l: int, tpl, name="") -> SpecAutomaton:
    if tpl in (None, "true", True):
        return universal(name="true")
    if not isinstance(tpl, dict) or len(tpl) != 1:
        raise SchemaError(f"bad spec template {tpl!r}")
    (kind, items), = tpl.items()
    if kind == "reach":
        return reach(_targets(cb, l, items), name=name or f"reach{items}")
    if kind == "avoid":
        return avoid_until_exit(_targets(cb, l, items), name=name or f"avoid{items}")
    if kind == "visit_all":
        return visit_all(_targets(cb, l, items), name=name or f"visit{items}")
    raise SchemaError(f"unknown spec template {kind!r}")


def assumption_template(cb: CompiledBuilding, l: int, nu, tpl) -> SpecAutomaton | None:
    if tpl in (None, "true", True):
        return None
    if not isinstance(tpl, dict) or list(tpl) != ["gf_open"]:
        raise SchemaError(f"bad assumption template {tpl!r}")
    items = tpl["gf_open"]
    if l == 0:
        if items == "*":
            items = [d for d, cs in cb.door_cells.items() if nu is None or cs & cb.region[nu]]
        preds = [_door_open_at0(cb.door_cells[d]) for d in items]
    else:
        if items == "*":
            if l == 1:
                items = [d.id for d in cb.scenario.doors
                         if nu is None or any(cb.floor_of[r] == nu for r in d.rooms)]
            else:
                items = [s.id for s in cb.scenario.stairs if s.door]
        preds = [_absent(i) for i in items]
    return gf(preds, name=f"gf_open{list(items)}")


def _door_open_at0(cells: frozenset):
    return lambda a: not cells <= a[0]


def _absent(item):
    return lambda a: item not in a[0]


def _contexts(lay: Layering, l: int, key):
    if key == "*":
        return list(lay.sys_states[l + 1])
    return [str(key)]


def _instantiate(sc: BuildingScenario, cb: CompiledBuilding, lay: Layering):
    L = lay.L
    phi, zeta = {}, {}
    for key, body in (sc.specs or {}).items():
        if key == "top":
            phi[(L, None)] = task_template(cb, L, body, name="top")
            continue
        l = int(key)
        for ctx, tpl in (body or {}).items():
            for nu in _contexts(lay, l, ctx):
                phi[(l, nu)] = task_template(cb, l, tpl)
    for key, body in (sc.assumptions or {}).items():
        if key == "top":
            a = assumption_template(cb, L, None, body)
            if a is not None:
                zeta[(L, None)] = a
            continue
        l = int(key)
        for ctx, tpl in (body or {}).items():
            for nu in _contexts(lay, l, ctx):
                a = assumption_template(cb, l, nu, tpl)
                if a is not None:
                    zeta[(l, nu)] = a
    for key, a in phi.items():
        if a.mode is Mode.BUCHI and key[0] != L:
            raise SchemaError(f"local task at {key} must be a finite-word template")
    return phi, zeta
