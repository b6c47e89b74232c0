"""Abstraction layers: lifting, abstract plays, timescales, projections and
context-local segments of plays.

Layer indices run from 0 (the concrete game) to ``L``.  For ``l >= 1``:

* ``ry[l]``: layer ``l-1`` sys state -> layer ``l`` sys state;
* ``rx[l]``: (layer ``l-1`` env state, layer ``l-1`` sys state) -> layer ``l`` env state;
* ``restrict[l]``: (context at layer ``l+1``, layer ``l`` env state) -> restricted
  env state, for ``l < L``; the top layer is never restricted.
"""
from __future__ import annotations

from typing import Callable, Hashable, Mapping, Sequence


class LayerOutOfRange(IndexError):
    pass


class RangeViolation(RuntimeError):
    """A higher-layer timescale index is missing from the lower timescale."""


def _as_fn2(m):
    if m is None or callable(m):
        return m
    return lambda a, b: m[(a, b)]


class Layering:
    def __init__(
        self,
        sys_states: Sequence[Sequence[Hashable]],
        env_states: Sequence[Sequence[Hashable]],
        ry: Sequence[Mapping | None],
        rx: Sequence[Mapping | Callable | None],
        restrict: Sequence[Mapping | Callable | None] | None = None,
    ):
        self.L = len(sys_states) - 1
        if not (len(env_states) == len(ry) == len(rx) == self.L + 1):
            raise ValueError("per-layer lists must all have L+1 entries")
        self.sys_states = [tuple(s) for s in sys_states]
        self.env_states = [tuple(s) for s in env_states]
        self.ry = [None] + [dict(m) for m in ry[1:]]
        self.rx = [None] + [_as_fn2(m) for m in rx[1:]]
        restrict = list(restrict) if restrict is not None else [None] * (self.L + 1)
        self._restrict = [_as_fn2(m) for m in restrict]
        self._inner: dict = {}
        for l in range(1, self.L + 1):
            missing = [y for y in self.sys_states[l - 1] if y not in self.ry[l]]
            if missing:
                raise ValueError(f"ry[{l}] is not total: {missing[:5]}")
        # composed sys abstraction per layer and memoised lifts
        self._ry_up = [{y: y for y in self.sys_states[0]}]
        for l in range(1, self.L + 1):
            self._ry_up.append({y: self.ry[l][self._ry_up[l - 1][y]] for y in self.sys_states[0]})
        self._lift: dict = {}

    def _check(self, l):
        if not 0 <= l <= self.L:
            raise LayerOutOfRange(l)

    def ry_up(self, l: int, y):
        self._check(l)
        m = self._ry_up[l]
        if y in m:
            return m[y]
        for j in range(1, l + 1):
            y = self.ry[j][y]
        return y

    def lift(self, l: int, x, y):
        """Composed abstraction ``(Rx_up^l(x, y), Ry_up^l(y))`` of layer-0 states."""
        key = (l, x, y)
        v = self._lift.get(key)
        if v is None:
            self._check(l)
            xl, yl = x, y
            for j in range(1, l + 1):
                xl, yl = self.rx[j](xl, yl), self.ry[j][yl]
            v = self._lift[key] = (xl, yl)
        return v

    def rx_up(self, l: int, x, y):
        return self.lift(l, x, y)[0]

    def restrict(self, l: int, nu, x):
        self._check(l)
        if l == self.L or self._restrict[l] is None:
            return x
        return self._restrict[l](nu, x)

    def context(self, l: int, y):
        """The layer ``l+1`` state a layer ``l`` sys state belongs to."""
        return self.ry[l + 1][y]

    def inner(self, l: int, nu) -> tuple:
        key = (l, nu)
        if key not in self._inner:
            self._inner[key] = tuple(y for y in self.sys_states[l] if self.ry[l + 1][y] == nu)
        return self._inner[key]

    def restricted_env_states(self, l: int, nu) -> tuple:
        out, seen = [], set()
        for x in self.env_states[l]:
            r = self.restrict(l, nu, x)
            if r not in seen:
                seen.add(r)
                out.append(r)
        return tuple(out)


# ---------------------------------------------------------------------------
# whole-play operations


def abstract_play(lay: Layering, pi: Sequence[tuple], l: int) -> list:
    if not pi:
        raise ValueError("empty play")
    out = [lay.lift(l, *pi[0])]
    for k in range(1, len(pi)):
        x, y = pi[k]
        out.append((lay.rx_up(l, x, pi[k - 1][1]), lay.ry_up(l, y)))
    return out


def timescale(yl: Sequence, identity: bool = False) -> list:
    """Indices at which the sequence changes value (always starting at 0)."""
    if not yl:
        raise ValueError("empty sequence")
    if identity:
        return list(range(len(yl)))
    ks = [0]
    for k in range(1, len(yl)):
        if yl[k] != yl[ks[-1]]:
            ks.append(k)
    return ks


def project(lay: Layering, pi: Sequence[tuple], l: int) -> list:
    ab = abstract_play(lay, pi, l)
    return [ab[k] for k in timescale([p[1] for p in ab], identity=(l == 0))]


def kappa_between(kappa_l: Sequence[int], kappa_l1: Sequence[int], k: int) -> int:
    t = kappa_l1[k]
    # both sequences are strictly increasing
    lo, hi = 0, len(kappa_l)
    while lo < hi:
        mid = (lo + hi) // 2
        if kappa_l[mid] < t:
            lo = mid + 1
        else:
            hi = mid
    if lo == len(kappa_l) or kappa_l[lo] != t:
        raise RangeViolation(f"{t} not in lower timescale")
    return lo


class ProjectionBundle:
    """Incrementally maintained projections of a growing play.

    Per layer ``l`` it keeps the abstract play, the timescale ``kappa[l]``, the
    locally restricted projected play ``local[l]`` and the start positions (in
    ``local[l]``) of the context segments.
    """

    def __init__(self, lay: Layering, play: Sequence[tuple] = ()):
        self.lay = lay
        n = lay.L + 1
        self.play: list = []
        self.abstract: list[list] = [[] for _ in range(n)]
        self.kappa: list[list[int]] = [[] for _ in range(n)]
        self.local: list[list] = [[] for _ in range(n)]
        self.seg_starts: list[list[int]] = [[] for _ in range(n)]
        for p in play:
            self.append(p)

    def __len__(self):
        return len(self.play)

    def append(self, pair: tuple):
        lay = self.lay
        x, y = pair
        k = len(self.play)
        y_prev = self.play[-1][1] if k else y
        self.play.append(pair)
        changed = []
        for l in range(lay.L + 1):
            xl, yl = lay.rx_up(l, x, y_prev), lay.ry_up(l, y)
            ab = self.abstract[l]
            ab.append((xl, yl))
            if k == 0 or l == 0 or yl != ab[self.kappa[l][-1]][1]:
                self.kappa[l].append(k)
                changed.append(l)
        for l in changed:
            xl, yl = self.abstract[l][k]
            if l < lay.L:
                # restriction w.r.t. the context before this step's system move
                ctx = self.abstract[l + 1][k - 1 if k else 0][1]
                xl = lay.restrict(l, ctx, xl)
            self.local[l].append((xl, yl))
        for l in changed:
            if l >= 1:
                if self.kappa[l - 1][-1] != k:
                    raise RangeViolation(f"layer {l} changed at {k} without layer {l - 1}")
                self.seg_starts[l - 1].append(len(self.kappa[l - 1]) - 1)
        if k == 0:
            self.seg_starts[lay.L].append(0)

    # views -----------------------------------------------------------------
    def projected(self, l: int) -> list:
        return [self.abstract[l][k] for k in self.kappa[l]]

    def segments(self, l: int) -> list[list]:
        starts = self.seg_starts[l]
        if l == self.lay.L:
            return [list(self.local[l])]
        out = []
        for j, b in enumerate(starts):
            end = starts[j + 1] + 1 if j + 1 < len(starts) else len(self.local[l])
            out.append(self.local[l][b:end])
        return out

    def last_segment(self, l: int) -> list:
        if l == self.lay.L:
            return list(self.local[l])
        return self.local[l][self.seg_starts[l][-1]:]

    def context(self, l: int):
        """Current context ``y^{l+1}(k)`` of layer ``l`` (``None`` at the top)."""
        if l == self.lay.L:
            return None
        return self.abstract[l + 1][-1][1]

    def pending_env(self, l: int, x_next):
        """Restricted env state ``r^l_{y^{l+1}(k)}(Rx_up^l(x_next, y(k)))``."""
        xl = self.lay.rx_up(l, x_next, self.play[-1][1])
        if l < self.lay.L:
            xl = self.lay.restrict(l, self.context(l), xl)
        return xl

    def step_record(self) -> dict:
        """Per-layer summary of the latest step for trace logs."""
        k = len(self.play) - 1
        return {
            "k": k,
            "layers": [
                {
                    "x": _fmt(self.abstract[l][k][0]),
                    "y": _fmt(self.abstract[l][k][1]),
                    "trigger": bool(self.kappa[l] and self.kappa[l][-1] == k),
                }
                for l in range(self.lay.L + 1)
            ],
        }


def localize(lay: Layering, pi: Sequence[tuple]) -> ProjectionBundle:
    return ProjectionBundle(lay, pi)


def _fmt(v):
    if isinstance(v, (frozenset, set)):
        return sorted(_fmt(e) for e in v)
    if isinstance(v, tuple):
        return [_fmt(e) for e in v]
    return v
