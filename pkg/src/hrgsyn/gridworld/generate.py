"""Seeded random building scenarios for property suites and experiments.

A floor is a grid of rectangular rooms.  Neighbouring rooms are joined by an
opening or a door along a random spanning tree, plus a few extra links.
Two-floor buildings get one staircase.  Task templates are drawn per layer.
"""
from __future__ import annotations

import random

from .scenario import BuildingScenario, parse_scenario


def _floor_layout(rng, fid, level, nr, nc, w, h):
    rooms, blocks = [], {}
    for i in range(nr):
        for j in range(nc):
            rid = f"{fid}r{i}{j}"
            c0, r0 = 1 + j * w, 1 + i * h
            rooms.append({"id": rid, "cols": [c0, c0 + w - 1], "rows": [r0, r0 + h - 1]})
            blocks[(i, j)] = (rid, c0, r0)
    return rooms, blocks


def _boundary_pair(rng, a, b, w, h, horizontal):
    """A pair of adjacent cells across the wall between blocks a and b."""
    _, ca, ra = a
    if horizontal:  # b is right of a
        row = ra + rng.randrange(h)
        return [ca + w - 1, row], [ca + w, row]
    col = ca + rng.randrange(w)
    return [col, ra + h - 1], [col, ra + h]


def random_scenario_doc(seed: int, max_floors: int = 2) -> dict:
    rng = random.Random(seed)
    n_floors = rng.randint(1, max_floors)
    floors, doors, used = [], [], set()
    all_cells = {}
    for f in range(n_floors):
        fid = f"f{f}"
        nr, nc = rng.choice([(1, 2), (1, 3), (2, 2)])
        w, h = rng.randint(2, 3), rng.randint(2, 3)
        rooms, blocks = _floor_layout(rng, fid, f, nr, nc, w, h)
        links = []
        for (i, j), a in blocks.items():
            if (i, j + 1) in blocks:
                links.append((a, blocks[(i, j + 1)], True))
            if (i + 1, j) in blocks:
                links.append((a, blocks[(i + 1, j)], False))
        rng.shuffle(links)
        # spanning tree first, then extra links with some probability
        parent = {b[0]: b[0] for b in blocks.values()}

        def root(r):
            while parent[r] != r:
                r = parent[r]
            return r

        openings = []
        for a, b, horiz in links:
            tree = root(a[0]) != root(b[0])
            if not tree and rng.random() < 0.6:
                continue
            parent[root(a[0])] = root(b[0])
            p, q = _boundary_pair(rng, a, b, w, h, horiz)
            clash = {(fid, *p), (fid, *q)} & used
            if rng.random() < 0.4 and len(doors) < 3 and not clash:
                doors.append({"id": f"d{len(doors)}", "floor": fid, "cells": [p, q], "rooms": [a[0], b[0]]})
                used |= {(fid, *p), (fid, *q)}
            else:
                openings.append([p, q])
        floors.append({"id": fid, "level": f, "rooms": rooms, "openings": openings})
        for r in rooms:
            cells = [(fid, c, w_) for c in range(r["cols"][0], r["cols"][1] + 1)
                     for w_ in range(r["rows"][0], r["rows"][1] + 1)]
            all_cells[r["id"]] = cells
    stairs = []
    if n_floors == 2:
        ra = rng.choice(floors[0]["rooms"])["id"]
        rb = rng.choice(floors[1]["rooms"])["id"]
        a = rng.choice([c for c in all_cells[ra] if c not in used])
        b = rng.choice([c for c in all_cells[rb] if c not in used])
        stairs.append({"id": "s01", "room": rb, "links": [[list(a), list(b)]]})
        used |= {a, b}
    free = [c for cs in all_cells.values() for c in cs if c not in used]
    rng.shuffle(free)
    robot = free.pop()
    obstacles = []
    for _ in range(rng.randint(0, 2)):
        c = free.pop()
        obstacles.append({"cell": list(c), "fixed": rng.random() < 0.5})
    closed = [d["id"] for d in doors if rng.random() < 0.3]
    occupied_obs = [o["cell"] for o in obstacles if rng.random() < 0.7]

    specs = {"top": {"reach": [rng.choice(floors)["id"]]} if rng.random() < 0.7 else True, 1: {}, 0: {}}
    for fl in floors:
        if rng.random() < 0.7:
            specs[1][fl["id"]] = {"reach": [rng.choice(fl["rooms"])["id"]]}
    obstacle_cells = {tuple(o["cell"]) for o in obstacles}
    for rid, cells in all_cells.items():
        choices = [c for c in cells if c not in used and c not in obstacle_cells]
        u = rng.random()
        if u < 0.4 and choices:
            specs[0][rid] = {"reach": [list(rng.choice(choices))]}
        elif u < 0.55 and len(choices) >= 2:
            specs[0][rid] = {"visit_all": [list(c) for c in rng.sample(choices, 2)]}
        elif u < 0.7 and [c for c in choices if c != robot]:
            # the robot must not start on a cell it is told to avoid
            specs[0][rid] = {"avoid": [list(rng.choice([c for c in choices if c != robot]))]}
    return {
        "name": f"random-{seed}",
        "floors": floors,
        "doors": doors,
        "stairs": stairs,
        "obstacles": obstacles,
        "initial": {"robot": list(robot), "occupied": {"doors": closed, "obstacles": occupied_obs}},
        "specs": specs,
        "assumptions": {0: {"*": {"gf_open": "*"}}},
        "profiles": {
            "adversarial": {"kind": "adversarial"},
            "fair": {"kind": "fair-doors", "flip": rng.choice([0.2, 0.4]), "bound": rng.randint(1, 4)},
            "scripted": {"kind": "scripted", "events": _random_events(rng, doors, obstacles)},
        },
    }


def _random_events(rng, doors, obstacles):
    events = []
    refs = [d["id"] for d in doors] + [o["cell"] for o in obstacles if not o["fixed"]]
    for _ in range(rng.randint(1, 4)):
        if not refs:
            break
        ref = rng.choice(refs)
        verb = rng.choice(["close", "open"]) if isinstance(ref, str) else rng.choice(["occupy", "free"])
        events.append({"at": rng.randint(1, 30), verb: [ref]})
    return events


def random_scenario(seed: int, max_floors: int = 2) -> BuildingScenario:
    return parse_scenario(random_scenario_doc(seed, max_floors))
