"""Greedy parking of idle data qubits, adding storage dots only when needed.

Bus locations are ``(base, sub)`` pairs: ``(p, 0)`` is the dot of placement
position ``p`` and ``(p, j)`` for ``j >= 1`` is the j-th extra dot inserted
right of it (``p = -1`` for dots left of the first qubit). Tuple order is bus
order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..chain_graph import Chain
from ..code_model import NUM_SLICES, QubitId

Loc = tuple[int, int]


@dataclass(frozen=True)
class AugmentedLayout:
    placement: dict
    idle_dots: tuple[Loc, ...]
    # (data qubit, slice) -> parking location, for every idle slice
    idle_assignment: dict
    # (data qubit, slice) -> location for every data qubit and slice 0..4 (0 = home)
    track: dict = field(default_factory=dict)

    @property
    def bus_length(self) -> int:
        return len(self.placement) + len(self.idle_dots)

    def dots(self) -> list[Loc]:
        """All bus dots in left-to-right order."""
        return sorted([(p, 0) for p in self.placement.values()] + list(self.idle_dots))

    def dot_index(self) -> dict[Loc, int]:
        return {loc: i for i, loc in enumerate(self.dots())}

    def bus_position(self, q: QubitId) -> int:
        return self.dot_index()[(self.placement[q], 0)]


def insert_idle_dots(pos: Mapping[QubitId, int], chains: Sequence[Chain]) -> AugmentedLayout:
    """Park every idle data qubit on a free dot that keeps its motion rightward.

    Before its first interaction a data qubit stays home. Otherwise, for each
    slice in turn and each idle qubit from right to left, the leftmost free
    dot between where the qubit is and where it must go next is taken. Only
    when no such dot exists is a new dot inserted, just left of the qubit's
    next target.
    Ancilla dots are never free; a data dot is free while its owner is away.
    """
    pos = dict(pos)
    ancilla_dots = {(p, 0) for q, p in pos.items() if not q.is_data}
    extra: list[Loc] = []
    loc: dict[tuple[QubitId, int], Loc] = {}
    idle: dict[tuple[QubitId, int], Loc] = {}
    by_data = {c.data: c for c in chains}

    for c in chains:
        loc[(c.data, 0)] = (pos[c.data], 0)

    for s in range(1, NUM_SLICES + 1):
        occupied: set[Loc] = set(ancilla_dots)
        waiting = []
        for c in chains:
            a = c.steps[s - 1]
            first = c.active_slices()[0][0]
            if a is not None:
                loc[(c.data, s)] = (pos[a], 0)
            elif s < first:
                loc[(c.data, s)] = (pos[c.data], 0)
                occupied.add(loc[(c.data, s)])
            else:
                nxt = next((pos[b] for t, b in c.active_slices() if t > s), None)
                waiting.append((loc[(c.data, s - 1)], nxt, c.data))
        # right-most first so that qubits further left keep more room
        waiting.sort(key=lambda w: (w[0], str(w[2])), reverse=True)
        for here, nxt, q in waiting:
            hi = (nxt, 0) if nxt is not None else None
            spot = _free_dot(pos, extra, occupied, here, hi)
            if spot is None:
                spot = _new_dot(extra, here if hi is None else (hi[0] - 1, 0))
            occupied.add(spot)
            loc[(q, s)] = spot
            idle[(q, s)] = spot
    assert all(by_data[q] for q, _ in idle)
    return AugmentedLayout(pos, tuple(sorted(extra)), idle, loc)


def _free_dot(pos, extra, occupied, here: Loc, hi: Loc | None) -> Loc | None:
    cands = [(p, 0) for p in pos.values()] + extra
    best = None
    for c in cands:
        if c < here or c in occupied:
            continue
        if hi is not None and not c < hi:
            continue
        if best is None or c < best:
            best = c
    return best


def _new_dot(extra: list[Loc], here: Loc) -> Loc:
    j = max([s for b, s in extra if b == here[0]] + [here[1]]) + 1
    spot = (here[0], j)
    extra.append(spot)
    return spot


def check_occupancy(layout: AugmentedLayout, chains: Sequence[Chain]) -> list[str]:
    """Simulate every slice and report clashes and leftward moves (empty if fine)."""
    problems = []
    pos = layout.placement
    anc = {(p, 0): q for q, p in pos.items() if not q.is_data}
    for s in range(0, NUM_SLICES + 1):
        seen: dict[Loc, QubitId] = {}
        for c in chains:
            here = layout.track[(c.data, s)]
            a = c.steps[s - 1] if s >= 1 else None
            if s >= 1 and s - 1 >= 0 and here < layout.track[(c.data, s - 1)]:
                problems.append(f"slice {s}: {c.data} moves left")
            if a is not None:
                continue
            if here in anc:
                problems.append(f"slice {s}: {c.data} parked on ancilla {anc[here]}")
            if here in seen:
                problems.append(f"slice {s}: {c.data} and {seen[here]} share {here}")
            seen[here] = c.data
    return problems


def bus_tracks(layout: AugmentedLayout) -> dict[QubitId, tuple[int, ...]]:
    """Bus index of every data qubit at home and after each of the four slices."""
    idx = layout.dot_index()
    out: dict[QubitId, list] = {}
    for (q, s), loc in sorted(layout.track.items()):
        out.setdefault(q, [0] * (NUM_SLICES + 1))[s] = idx[loc]
    return {q: tuple(v) for q, v in out.items()}


def bus_slice_times(layout: AugmentedLayout) -> tuple[int, ...]:
    """Bottleneck displacement per shuttle on the physical bus, parking moves included.

    Same shape as :func:`metrics.slice_times` but measured in bus dots, so
    inserted dots and idle detours count.
    """
    t = [0] * (NUM_SLICES + 1)
    for tr in bus_tracks(layout).values():
        for s in range(1, NUM_SLICES + 1):
            t[s - 1] = max(t[s - 1], tr[s] - tr[s - 1])
        t[NUM_SLICES] = max(t[NUM_SLICES], tr[NUM_SLICES] - tr[0])
    return tuple(t)
