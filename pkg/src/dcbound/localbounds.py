"""Local bounds: per-transition counter variables found via simple cycles.

A variable v is accepted as the local bound of a transition t when every
simple cycle through t both tests v > 0 on some transition and decreases v
by a constant on some transition. Transitions on no cycle get the marker ONE
(they run at most once); transitions on a cycle with no qualifying variable
are recorded as having no local bound, which later turns their transition
bound into the undefined element.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

from dcbound.dcp import Dcp, Transition, Var

__all__ = [
    "ONE",
    "DEFAULT_CYCLE_CAP",
    "CycleOverflow",
    "SimpleCycle",
    "simple_cycles",
    "enumerate_simple_cycles",
    "LocalBoundMap",
    "local_bound_map",
]

ONE = "1"

DEFAULT_CYCLE_CAP = 10_000

SimpleCycle = tuple[Transition, ...]


class CycleOverflow(Exception):
    """More simple cycles than the configured cap."""

    def __init__(self, cap: int):
        super().__init__(f"more than {cap} simple cycles")
        self.cap = cap


class _Edge(Protocol):
    id: str
    source: str
    target: str


def enumerate_simple_cycles(locations: Sequence[str], edges: Sequence[_Edge],
                            cap: int) -> list[tuple[_Edge, ...]]:
    """All edge-level simple cycles of a directed multigraph.

    Each cycle is anchored at its smallest location and the interior visits
    no location twice, so parallel edges yield distinct cycles and every
    cycle appears exactly once. Deterministic: starts are taken in location
    order and children in edge-id order.
    """
    order = {loc: i for i, loc in enumerate(sorted(locations))}
    outgoing: dict[str, list[_Edge]] = {loc: [] for loc in locations}
    for e in edges:
        outgoing[e.source].append(e)
    for loc in outgoing:
        outgoing[loc].sort(key=lambda e: e.id)

    cycles: list[tuple[_Edge, ...]] = []
    for start in sorted(locations):
        s = order[start]
        path: list[_Edge] = []
        on_path = {start}

        def dfs(loc: str) -> None:
            for e in outgoing[loc]:
                tgt = e.target
                if order[tgt] < s:
                    continue
                if tgt == start:
                    cycles.append(tuple(path + [e]))
                    if len(cycles) > cap:
                        raise CycleOverflow(cap)
                elif tgt not in on_path:
                    path.append(e)
                    on_path.add(tgt)
                    dfs(tgt)
                    on_path.discard(tgt)
                    path.pop()

        dfs(start)
    return cycles


def simple_cycles(dcp: Dcp, cap: int = DEFAULT_CYCLE_CAP) -> list[SimpleCycle]:
    return enumerate_simple_cycles(dcp.locations, dcp.transitions, cap)


@dataclass(frozen=True)
class LocalBoundMap:
    """Total mapping from transition id to a variable name, ONE, or None
    (no local bound found; the transition may be unbounded)."""

    mapping: dict[str, str | None]

    def __getitem__(self, tid: str) -> str | None:
        return self.mapping[tid]

    @property
    def unbounded(self) -> list[str]:
        return sorted(t for t, v in self.mapping.items() if v is None)


def _qualifying(cycle: SimpleCycle) -> set[str]:
    guarded = {g for t in cycle for g in t.guard}
    decremented = {
        u.lhs
        for t in cycle
        for u in t.updates
        if u.rhs == Var(u.lhs) and u.offset < 0
    }
    return guarded & decremented


def local_bound_map(dcp: Dcp, cycles: Sequence[SimpleCycle]) -> LocalBoundMap:
    """Assign each transition its local bound. Among several qualifying
    variables the lexicographically smallest is chosen, for determinism."""
    per_cycle = [(frozenset(t.id for t in c), _qualifying(c)) for c in cycles]
    mapping: dict[str, str | None] = {}
    for t in dcp.transitions:
        candidates: set[str] | None = None
        for ids, qual in per_cycle:
            if t.id in ids:
                candidates = qual if candidates is None else candidates & qual
        if candidates is None:
            mapping[t.id] = ONE
        elif candidates:
            mapping[t.id] = min(candidates)
        else:
            mapping[t.id] = None
    return LocalBoundMap(mapping)
