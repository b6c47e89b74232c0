"""Environment profiles: concrete env strategies for compiled buildings.

Each profile owns its random generator (seeded), so a profile instance is a
single consumer of one play.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .scenario import SchemaError


@dataclass
class EnvProfile:
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0


class _Base:
    def __init__(self, cb, profile: EnvProfile):
        self.cb = cb
        self.profile = profile
        self.rng = random.Random(profile.seed)
        self.index = {x: i for i, x in enumerate(cb.g0.env_states)}

    def _legal(self, history):
        x, y = history[-1]
        return x, y, self.cb.g0.env_succ(x, y)

    def _with_elements(self, x, y, changes: dict):
        """Apply element on/off changes one by one, skipping illegal ones."""
        legal = self.cb.g0.env_succ(x, y)
        cur = set(x)
        for e in self.cb.elements:
            want = changes.get(e.id)
            if want is None:
                continue
            trial = (cur | e.cells) if want else (cur - e.cells)
            if frozenset(trial) in legal:
                cur = set(trial)
        out = frozenset(cur)
        return out if out in legal else x

    def __call__(self, history):
        raise NotImplementedError


class StaticEnv(_Base):
    def __call__(self, history):
        x, y, legal = self._legal(history)
        return x if x in legal else min(legal, key=self.index.__getitem__)


class ScriptedEnv(_Base):
    """Timetable of element changes: ``{at: k, close: [...], open: [...]}``."""

    def __init__(self, cb, profile):
        super().__init__(cb, profile)
        self.events = {}
        for ev in profile.params.get("events", []):
            k = int(ev["at"])
            ch = self.events.setdefault(k, {})
            for ref in ev.get("close", []) + ev.get("occupy", []):
                ch[self._element_id(ref)] = True
            for ref in ev.get("open", []) + ev.get("free", []):
                ch[self._element_id(ref)] = False

    def _element_id(self, ref):
        if isinstance(ref, str) and ref in self.cb.door_cells:
            return ref
        lab = self.cb.label(ref)
        for e in self.cb.elements:
            if e.id == lab:
                return e.id
        raise SchemaError(f"scripted event references unknown element {ref!r}")

    def __call__(self, history):
        x, y, legal = self._legal(history)
        k = len(history)
        if k in self.events:
            return self._with_elements(x, y, self.events[k])
        return x if x in legal else min(legal, key=self.index.__getitem__)


class FairDoorsEnv(_Base):
    """Doors flip with probability ``flip``; a door closed for ``bound``
    consecutive steps is reopened."""

    def __init__(self, cb, profile):
        super().__init__(cb, profile)
        self.flip = float(profile.params.get("flip", 0.2))
        self.bound = int(profile.params.get("bound", 4))
        if self.bound < 1:
            raise SchemaError("fair-doors bound must be at least 1")

    def closed_run(self, history, door) -> int:
        cells = self.cb.door_cells[door]
        n = 0
        for x, _ in reversed(history):
            if cells <= x:
                n += 1
            else:
                break
        return n

    def __call__(self, history):
        x, y, legal = self._legal(history)
        changes = {}
        for e in self.cb.elements:
            if e.kind != "door":
                continue
            closed = e.cells <= x
            roll = self.rng.random()
            if closed:
                if self.closed_run(history, e.id) >= self.bound or roll < self.flip:
                    changes[e.id] = False
            elif roll < self.flip:
                changes[e.id] = True
        return self._with_elements(x, y, changes)


class AdversarialEnv(_Base):
    """Uniformly random legal env move."""

    def __call__(self, history):
        x, y, legal = self._legal(history)
        return self.rng.choice(sorted(legal, key=self.index.__getitem__))


KINDS = {
    "static": StaticEnv,
    "scripted": ScriptedEnv,
    "fair-doors": FairDoorsEnv,
    "adversarial": AdversarialEnv,
}


def make_env(cb, profile: EnvProfile | dict | str, seed: int | None = None):
    if isinstance(profile, str):
        if profile in KINDS:
            profile = EnvProfile(profile)
        else:
            try:
                profile = dict(cb.scenario.profiles[profile])
            except KeyError:
                raise SchemaError(f"unknown profile {profile!r}") from None
    if isinstance(profile, dict):
        p = dict(profile)
        kind = p.pop("kind", None)
        profile = EnvProfile(kind, p, int(p.pop("seed", 0)))
    if seed is not None:
        profile = EnvProfile(profile.kind, profile.params, seed)
    if profile.kind not in KINDS:
        raise SchemaError(f"unknown profile kind {profile.kind!r}")
    return KINDS[profile.kind](cb, profile)


def env_step(env, history):
    """One env move of ``env`` after ``history``."""
    return env(history)
