"""Building scenarios: floors of grid cells partitioned into rooms, doors,
staircases, obstacles, spec/assumption templates and env profiles.

Scenario documents are YAML.  Cells are written ``[col, row]`` inside a
floor section and ``[floor_id, col, row]`` elsewhere.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import yaml


class SchemaError(ValueError):
    pass


class GeometryError(ValueError):
    pass


Cell = tuple  # (floor_id, col, row)


@dataclass
class Room:
    id: str
    floor: str
    cells: tuple


@dataclass
class Floor:
    id: str
    level: int
    rooms: list
    walls: list  # pairs of cells
    openings: list  # pairs of cells


@dataclass
class Door:
    id: str
    cells: tuple
    rooms: tuple


@dataclass
class Stairs:
    id: str
    room: str
    links: list  # pairs of cells across floors
    door: str | None = None


@dataclass
class Obstacle:
    cell: Cell
    fixed: bool = True


@dataclass
class BuildingScenario:
    name: str
    floors: list
    doors: list
    stairs: list
    obstacles: list
    robot: Cell
    occupied_doors: frozenset
    occupied_obstacles: frozenset
    specs: dict = field(default_factory=dict)
    assumptions: dict = field(default_factory=dict)
    profiles: dict = field(default_factory=dict)
    mode: str = "worst-case"
    reference_path: list = field(default_factory=list)
    # (from, to, blocker): the move from -> to is disabled while blocker is occupied
    couplings: list = field(default_factory=list)
    # layer -> undirected edges (a, b, via); via is a door (layer 1) or a
    # staircase (layer 2) that must be open, or None
    abstract_graphs: dict = field(default_factory=dict)

    @property
    def rooms(self) -> list:
        return [r for f in self.floors for r in f.rooms]

    def room(self, rid: str) -> Room:
        for r in self.rooms:
            if r.id == rid:
                return r
        raise KeyError(rid)

    def floor(self, fid: str) -> Floor:
        for f in self.floors:
            if f.id == fid:
                return f
        raise KeyError(fid)


def _need(d: dict, key: str, where: str):
    if not isinstance(d, dict) or key not in d:
        raise SchemaError(f"{where}: missing '{key}'")
    return d[key]


def _cell(v, floor=None, where="") -> Cell:
    if isinstance(v, (list, tuple)) and len(v) == 3:
        return (str(v[0]), int(v[1]), int(v[2]))
    if isinstance(v, (list, tuple)) and len(v) == 2 and floor is not None:
        return (floor, int(v[0]), int(v[1]))
    raise SchemaError(f"{where}: bad cell {v!r}")


def _room_cells(r: dict, fid: str, where: str) -> tuple:
    if "cells" in r:
        return tuple(_cell(c, fid, where) for c in r["cells"])
    cols, rows = _need(r, "cols", where), _need(r, "rows", where)
    return tuple(
        (fid, c, w) for c in range(int(cols[0]), int(cols[1]) + 1) for w in range(int(rows[0]), int(rows[1]) + 1)
    )


def parse_scenario(doc: dict) -> BuildingScenario:
    if not isinstance(doc, dict):
        raise SchemaError("scenario document must be a mapping")
    floors = []
    for i, f in enumerate(_need(doc, "floors", "scenario")):
        where = f"floors[{i}]"
        fid = str(_need(f, "id", where))
        rooms = [
            Room(str(_need(r, "id", f"{where}.rooms[{j}]")), fid, _room_cells(r, fid, f"{where}.rooms[{j}]"))
            for j, r in enumerate(_need(f, "rooms", where))
        ]
        walls = [tuple(_cell(c, fid, where) for c in p) for p in f.get("walls", [])]
        openings = [tuple(_cell(c, fid, where) for c in p) for p in f.get("openings", [])]
        floors.append(Floor(fid, int(f.get("level", i)), rooms, walls, openings))
    doors = [
        Door(str(_need(d, "id", "door")), tuple(_cell(c, d.get("floor"), "door") for c in _need(d, "cells", "door")),
             tuple(str(r) for r in _need(d, "rooms", "door")))
        for d in doc.get("doors", [])
    ]
    stairs = [
        Stairs(str(_need(s, "id", "stairs")), str(_need(s, "room", "stairs")),
               [tuple(_cell(c, None, "stairs link") for c in p) for p in _need(s, "links", "stairs")],
               s.get("door"))
        for s in doc.get("stairs", [])
    ]
    obstacles = [Obstacle(_cell(_need(o, "cell", "obstacle"), None, "obstacle"), bool(o.get("fixed", True)))
                 for o in doc.get("obstacles", [])]
    init = _need(doc, "initial", "scenario")
    occ = init.get("occupied", {}) or {}
    sc = BuildingScenario(
        name=str(doc.get("name", "scenario")),
        floors=floors,
        doors=doors,
        stairs=stairs,
        obstacles=obstacles,
        robot=_cell(_need(init, "robot", "initial"), None, "initial.robot"),
        occupied_doors=frozenset(str(d) for d in occ.get("doors", [])),
        occupied_obstacles=frozenset(_cell(c, None, "initial.occupied") for c in occ.get("obstacles", [])),
        specs=doc.get("specs", {}) or {},
        assumptions=doc.get("assumptions", {}) or {},
        profiles=doc.get("profiles", {}) or {},
        mode=str(doc.get("mode", "worst-case")),
        reference_path=[_cell(c, None, "reference_path") for c in doc.get("reference_path", [])],
        couplings=[
            tuple(_cell(cp[k], None, "coupling") for k in ("from", "to", "blocked_by"))
            for cp in doc.get("couplings", [])
        ],
    )
    check_geometry(sc)
    sc.abstract_graphs = _abstract_graphs(doc.get("abstract_graphs", {}) or {}, sc)
    return sc


def _abstract_graphs(doc: dict, sc: BuildingScenario) -> dict:
    out = {}
    names = {1: {r.id for r in sc.rooms}, 2: {f.id for f in sc.floors}}
    gates = {1: {d.id for d in sc.doors}, 2: {s.id for s in sc.stairs}}
    for key, edges in doc.items():
        l = int(key)
        if l not in names:
            raise SchemaError(f"abstract_graphs: layer {l} is not 1 or 2")
        parsed = []
        for e in edges:
            if not isinstance(e, (list, tuple)) or len(e) not in (2, 3):
                raise SchemaError(f"abstract_graphs[{l}]: bad edge {e!r}")
            a, b = str(e[0]), str(e[1])
            via = str(e[2]) if len(e) == 3 else None
            if a not in names[l] or b not in names[l]:
                raise GeometryError(f"abstract_graphs[{l}]: unknown state in {e!r}")
            if via is not None and via not in gates[l]:
                raise GeometryError(f"abstract_graphs[{l}]: unknown door or staircase {via!r}")
            parsed.append((a, b, via))
        out[l] = parsed
    return out


def load_scenario(text: str) -> BuildingScenario:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SchemaError(str(exc)) from None
    return parse_scenario(doc)


def load_scenario_file(path) -> BuildingScenario:
    with open(path, encoding="utf-8") as fh:
        return load_scenario(fh.read())


def _adjacent(a: Cell, b: Cell) -> bool:
    return a[0] == b[0] and abs(a[1] - b[1]) + abs(a[2] - b[2]) == 1


def check_geometry(sc: BuildingScenario):
    owner = {}
    room_ids = set()
    for r in sc.rooms:
        if r.id in room_ids:
            raise GeometryError(f"duplicate room id {r.id}")
        room_ids.add(r.id)
        if not r.cells:
            raise GeometryError(f"room {r.id} has no cells")
        for c in r.cells:
            if c[0] != r.floor:
                raise GeometryError(f"room {r.id} lists a cell of another floor: {c}")
            if c in owner:
                raise GeometryError(f"rooms {owner[c]} and {r.id} overlap at {c}")
            owner[c] = r.id
    for f in sc.floors:
        for a, b in f.openings + f.walls:
            if a not in owner or b not in owner or not _adjacent(a, b):
                raise GeometryError(f"floor {f.id}: {a}-{b} is not a pair of adjacent cells")
    for d in sc.doors:
        if len(d.rooms) != 2 or any(r not in room_ids for r in d.rooms):
            raise GeometryError(f"door {d.id} references missing rooms {d.rooms}")
        for c in d.cells:
            if owner.get(c) not in d.rooms:
                raise GeometryError(f"door {d.id}: cell {c} is not in rooms {d.rooms}")
        sides = {owner[c] for c in d.cells}
        if sides != set(d.rooms):
            raise GeometryError(f"door {d.id} does not touch both of its rooms")
        if not any(_adjacent(a, b) and owner[a] != owner[b] for a in d.cells for b in d.cells):
            raise GeometryError(f"door {d.id} cells are not on the shared boundary")
    door_ids = {d.id for d in sc.doors}
    for s in sc.stairs:
        if s.room not in room_ids:
            raise GeometryError(f"stairs {s.id} references missing room {s.room}")
        if s.door is not None and s.door not in door_ids:
            raise GeometryError(f"stairs {s.id} references missing door {s.door}")
        for a, b in s.links:
            if a not in owner or b not in owner:
                raise GeometryError(f"stairs {s.id}: link {a}-{b} leaves the building")
        floors_touched = {a[0] for a, b in s.links} | {b[0] for a, b in s.links}
        if len(floors_touched) < 2:
            raise GeometryError(f"stairs {s.id} does not connect distinct floors")
    for o in sc.obstacles:
        if o.cell not in owner:
            raise GeometryError(f"obstacle at {o.cell} is outside the building")
    for cp in sc.couplings:
        if any(c not in owner for c in cp) or not _adjacent(cp[0], cp[1]) and cp[0][0] == cp[1][0]:
            raise GeometryError(f"coupling {cp} references unknown or non-adjacent cells")
    if sc.robot not in owner:
        raise GeometryError(f"robot cell {sc.robot} is outside the building")
    blocked = set(sc.occupied_obstacles)
    for d in sc.doors:
        if d.id in sc.occupied_doors:
            blocked |= set(d.cells)
    if sc.robot in blocked:
        raise GeometryError("robot starts on an occupied cell")
    unknown = sc.occupied_doors - door_ids
    if unknown:
        raise GeometryError(f"initially closed doors are undeclared: {sorted(unknown)}")
    obstacle_cells = {o.cell for o in sc.obstacles}
    if not sc.occupied_obstacles <= obstacle_cells:
        raise GeometryError("initially occupied obstacle cells must be declared obstacles")
