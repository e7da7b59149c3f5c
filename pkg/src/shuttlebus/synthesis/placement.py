"""Heuristic placements, placement checking and placement files."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ..chain_graph import Chain, ChainDag, kahn_toposort
from ..code_model import CodeSpec, QubitId, data

Placement = dict  # QubitId -> bus position


def naive_topological(dag: ChainDag) -> Placement:
    return {q: i for i, q in enumerate(kahn_toposort(dag))}


def zigzag_data_order(d: int) -> list[QubitId]:
    """Data qubits along anti-diagonals, alternating direction, from the top-left."""
    order = []
    for s in range(2 * d - 1):
        rows = range(d) if s % 2 else reversed(range(d))
        for r in rows:
            c = s - r
            if 0 <= c < d:
                order.append(data(r * d + c + 1))
    return order


def place_in_data_order(dag: ChainDag, data_order: Iterable[QubitId]) -> Placement:
    """Place data qubits in the given order, each followed by every ancilla
    whose predecessors are now all placed (smallest label first)."""
    placed: list[QubitId] = []
    where: dict[QubitId, int] = {}
    waiting = {q: len(dag.pred[q]) for q in dag.nodes}
    ready: list[QubitId] = []

    def put(q):
        where[q] = len(placed)
        placed.append(q)
        for v in dag.succ[q]:
            waiting[v] -= 1
            if waiting[v] == 0:
                ready.append(v)

    def urgency(a):
        # the ancilla whose oldest incoming hop has waited longest goes first
        return (min(where[p] for p in dag.pred[a]), a)

    for q in data_order:
        if q in where:
            continue
        put(q)
        while ready:
            ready.sort(key=urgency)
            put(ready.pop(0))
    done = set(where)
    leftovers = [q for q in dag.nodes if q not in done]
    if leftovers:
        raise ValueError(f"data order does not cover the DAG: {leftovers[:3]}...")
    return {q: i for i, q in enumerate(placed)}


def zigzag(code: CodeSpec, dag: ChainDag) -> Placement:
    if not code.is_surface_code():
        raise ValueError("zig-zag placement is defined for the rotated surface code only")
    return place_in_data_order(dag, zigzag_data_order(code.distance))


def verify_placement(pos: Mapping[QubitId, int], chains: Iterable[Chain]) -> list[tuple[Chain, str]]:
    """Return every chain whose left-to-right order is broken (empty when valid)."""
    violations = []
    values = list(pos.values())
    if len(set(values)) != len(values):
        violations.append((None, "two qubits share a position"))
    for c in chains:
        seq = c.sequence
        missing = [q for q in seq if q not in pos]
        if missing:
            violations.append((c, f"unplaced {', '.join(map(str, missing))}"))
            continue
        for u, v in zip(seq, seq[1:]):
            if not pos[u] < pos[v]:
                violations.append((c, f"{u}@{pos[u]} not left of {v}@{pos[v]}"))
                break
    return violations


def order_of(pos: Mapping[QubitId, int]) -> list[QubitId]:
    return sorted(pos, key=pos.__getitem__)


def dump_placement(pos: Mapping[QubitId, int], meta: Mapping | None = None) -> str:
    out = {"meta": dict(meta or {}), "placement": {str(q): p for q, p in sorted(pos.items(), key=lambda x: x[1])}}
    return json.dumps(out, indent=2) + "\n"


def load_placement(text_or_path: str | Path) -> tuple[Placement, dict]:
    text = str(text_or_path)
    if not text.lstrip().startswith("{"):
        text = Path(text_or_path).read_text()
    raw = json.loads(text)
    pos = {QubitId.parse(k): int(v) for k, v in raw["placement"].items()}
    if sorted(pos.values()) != list(range(len(pos))):
        raise ValueError("placement positions must be 0..n-1")
    return pos, raw.get("meta", {})


def as_sequence(pos: Mapping[QubitId, int]) -> Sequence[str]:
    return [str(q) for q in order_of(pos)]
