"""Interaction chains and the chain-preserving DAG.

A chain lists, for one data qubit, the ancilla it meets in each of the four
slices (``None`` when idle). Merging all chains on their shared ancilla labels
gives a directed graph whose topological orders are exactly the bus orderings
where every data qubit only ever moves right.
"""

from __future__ import annotations

import heapq
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .code_model import NUM_SLICES, CodeSpec, QubitId, ScheduleSpec


class CyclicDependency(ValueError):
    def __init__(self, cycle: Sequence[QubitId]):
        self.cycle = list(cycle)
        super().__init__("cyclic dependency: " + " -> ".join(map(str, self.cycle + self.cycle[:1])))


@dataclass(frozen=True)
class Chain:
    data: QubitId
    steps: tuple[QubitId | None, ...]  # one entry per slice; None = idle

    def __post_init__(self):
        active = [a for a in self.steps if a is not None]
        if not active:
            raise ValueError(f"chain of {self.data} has no interactions")
        if len(set(active)) != len(active):
            raise ValueError(f"chain of {self.data} repeats an ancilla")

    @property
    def ancillas(self) -> tuple[QubitId, ...]:
        return tuple(a for a in self.steps if a is not None)

    @property
    def sequence(self) -> tuple[QubitId, ...]:
        """Data qubit followed by its ancillas in visiting order."""
        return (self.data,) + self.ancillas

    @property
    def last(self) -> QubitId:
        return self.ancillas[-1]

    def active_slices(self) -> list[tuple[int, QubitId]]:
        return [(s, a) for s, a in enumerate(self.steps, start=1) if a is not None]

    def __str__(self) -> str:
        return f"{self.data}: " + " ".join("-" if a is None else str(a) for a in self.steps)


def extract_chains(code: CodeSpec, schedule: ScheduleSpec) -> list[Chain]:
    steps: dict[QubitId, list] = {q: [None] * NUM_SLICES for q in code.data_qubits}
    for s, pairs in schedule.slices.items():
        for d, a in pairs:
            steps[d][s - 1] = a
    return [Chain(q, tuple(steps[q])) for q in code.data_qubits if any(steps[q])]


def chains_from_sequences(seqs: Iterable[Sequence[QubitId]]) -> list[Chain]:
    """Chains from plain (data, a1, a2, ...) sequences, one slice per ancilla."""
    out = []
    for seq in seqs:
        steps = list(seq[1:]) + [None] * (NUM_SLICES - len(seq) + 1)
        out.append(Chain(seq[0], tuple(steps[: max(NUM_SLICES, len(seq) - 1)])))
    return out


# Graphs are plain adjacency dicts: node -> sorted list of successors.
Graph = dict


def build_composite_graph(chains: Iterable[Chain]) -> Graph:
    succ: dict[QubitId, set] = defaultdict(set)
    for ch in chains:
        seq = ch.sequence
        for q in seq:
            succ[q]
        for u, v in zip(seq, seq[1:]):
            succ[u].add(v)
    return {u: sorted(vs) for u, vs in sorted(succ.items())}


def check_acyclic(graph: Graph) -> list[QubitId] | None:
    """Return None if acyclic, else one cycle as a vertex list."""
    WHITE, GREY, BLACK = 0, 1, 2
    color = {u: WHITE for u in graph}
    parent: dict = {}
    for root in graph:
        if color[root] != WHITE:
            continue
        stack = [(root, iter(graph[root]))]
        color[root] = GREY
        while stack:
            u, it = stack[-1]
            for v in it:
                if color.get(v, WHITE) == WHITE:
                    color[v] = GREY
                    parent[v] = u
                    stack.append((v, iter(graph.get(v, ()))))
                    break
                if color.get(v) == GREY:
                    cycle = [u]
                    while cycle[-1] != v:
                        cycle.append(parent[cycle[-1]])
                    return cycle[::-1]
            else:
                color[u] = BLACK
                stack.pop()
    return None


@dataclass(frozen=True)
class ChainDag:
    nodes: tuple[QubitId, ...]
    succ: dict  # QubitId -> tuple of successors
    pred: dict  # QubitId -> tuple of predecessors

    @property
    def edges(self) -> list[tuple[QubitId, QubitId]]:
        return [(u, v) for u in self.nodes for v in self.succ[u]]

    def __len__(self) -> int:
        return len(self.nodes)


def build_chain_dag(chains: Iterable[Chain]) -> ChainDag:
    graph = build_composite_graph(chains)
    cycle = check_acyclic(graph)
    if cycle is not None:
        raise CyclicDependency(cycle)
    pred: dict[QubitId, list] = {u: [] for u in graph}
    for u, vs in graph.items():
        for v in vs:
            pred[v].append(u)
    nodes = tuple(sorted(graph))
    return ChainDag(
        nodes,
        {u: tuple(graph[u]) for u in nodes},
        {u: tuple(sorted(pred[u])) for u in nodes},
    )


def data_first(q: QubitId):
    """Data qubits first, then ancillas by index with X before Z (X1, Z1, X2, ...)."""
    return (not q.is_data, q.index, q.kind)


def kahn_toposort(dag: ChainDag | Graph, key: Callable[[QubitId], object] | None = None) -> list[QubitId]:
    """Kahn's algorithm; among ready nodes the smallest ``key`` goes first."""
    succ = dag.succ if isinstance(dag, ChainDag) else dag
    key = key or data_first
    indeg = {u: 0 for u in succ}
    for u in succ:
        for v in succ[u]:
            indeg[v] = indeg.get(v, 0) + 1
    heap = [(key(u), u) for u, k in indeg.items() if k == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        _, u = heapq.heappop(heap)
        order.append(u)
        for v in succ.get(u, ()):
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(heap, (key(v), v))
    if len(order) != len(indeg):
        cycle = check_acyclic({u: list(succ.get(u, ())) for u in indeg})
        raise CyclicDependency(cycle or [])
    return order


def transitive_reduction(dag: ChainDag) -> ChainDag:
    order = kahn_toposort(dag)
    rank = {q: i for i, q in enumerate(order)}
    reach: dict[QubitId, set] = {}
    keep: dict[QubitId, list] = {}
    for u in reversed(order):
        r: set = set()
        kept = []
        for v in sorted(dag.succ[u], key=rank.__getitem__):
            if v not in r:
                kept.append(v)
            r.add(v)
            r |= reach[v]
        reach[u] = r
        keep[u] = sorted(kept)
    pred: dict[QubitId, list] = {u: [] for u in dag.nodes}
    for u, vs in keep.items():
        for v in vs:
            pred[v].append(u)
    return ChainDag(dag.nodes, {u: tuple(keep[u]) for u in dag.nodes},
                    {u: tuple(sorted(pred[u])) for u in dag.nodes})


def to_edge_list(graph: ChainDag | Graph) -> str:
    """Plain-text node/edge list (TGF): nodes, a ``#`` line, then edges."""
    succ = graph.succ if isinstance(graph, ChainDag) else graph
    nodes = sorted(set(succ) | {v for vs in succ.values() for v in vs})
    lines = [f"{n} {n}" for n in nodes] + ["#"]
    lines += [f"{u} {v}" for u in sorted(succ) for v in succ[u]]
    return "\n".join(lines) + "\n"


def chains_for(code: CodeSpec, schedule: ScheduleSpec | None = None) -> list[Chain]:
    from .code_model import build_schedule

    return extract_chains(code, schedule or build_schedule(code))
