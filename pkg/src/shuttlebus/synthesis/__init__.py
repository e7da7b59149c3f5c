"""Bus placement strategies: naive topological, zig-zag and exact optimal."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..chain_graph import Chain, build_chain_dag, chains_for
from ..code_model import CodeSpec, code_for
from ..metrics import slice_times, total_shuttle_distance
from .exact import BranchAndBound, ObjectiveWeights, SearchStats
from .idle_dots import AugmentedLayout, check_occupancy, insert_idle_dots
from .placement import (
    Placement,
    dump_placement,
    load_placement,
    naive_topological,
    order_of,
    verify_placement,
    zigzag,
)

STRATEGIES = ("naive", "zigzag", "optimal")
# the exact solve is only attempted up to this distance unless forced
EXACT_MAX_DISTANCE = 7


class BudgetExceeded(RuntimeError):
    """The exact solve ran out of time; ``incumbent`` holds the best placement found."""

    def __init__(self, incumbent: "SynthesisResult"):
        self.incumbent = incumbent
        super().__init__(f"budget exhausted, best objective {incumbent.objective}")


@dataclass(frozen=True)
class SynthesisResult:
    placement: Placement
    slice_times: tuple[int, ...]
    total_distance: int
    objective: float
    optimality: str  # "Certified" or "Heuristic"
    chains: tuple[Chain, ...]
    strategy: str = ""
    stats: SearchStats | None = None

    @property
    def sum_t(self) -> int:
        return sum(self.slice_times)


def evaluate(pos: Placement, chains: Sequence[Chain], weights: ObjectiveWeights | None = None,
             optimality: str = "Heuristic", strategy: str = "", stats=None) -> SynthesisResult:
    weights = weights or ObjectiveWeights()
    t = slice_times(pos, chains)
    dist = total_shuttle_distance(pos, chains)
    return SynthesisResult(dict(pos), t, dist, weights.value(sum(t), dist), optimality,
                           tuple(chains), strategy, stats)


def optimal(chains: Sequence[Chain], weights: ObjectiveWeights | None = None,
            budget: float | None = None, incumbents: Sequence[Placement] = (),
            strict: bool = False) -> SynthesisResult:
    """Exact minimiser of the placement objective.

    Returns a ``Certified`` result when the search closes, otherwise the best
    incumbent marked ``Heuristic``; with ``strict`` the latter raises
    :class:`BudgetExceeded` instead.
    """
    weights = weights or ObjectiveWeights()
    solver = BranchAndBound(chains, weights, budget)
    pos, certified, stats = solver.solve(incumbents)
    res = evaluate(pos, chains, weights, "Certified" if certified else "Heuristic", "optimal", stats)
    if not certified and strict:
        raise BudgetExceeded(res)
    return res


def synthesize(code: CodeSpec | int | str, strategy: str = "zigzag",
               weights: ObjectiveWeights | None = None, budget: float | None = 60.0,
               strict: bool = False) -> SynthesisResult:
    """Place the qubits of ``code`` (a CodeSpec, distance or code name)."""
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {', '.join(STRATEGIES)}")
    if not isinstance(code, CodeSpec):
        code = code_for(code)
    chains = chains_for(code)
    dag = build_chain_dag(chains)
    if strategy == "naive":
        return evaluate(naive_topological(dag), chains, weights, strategy="naive")
    if strategy == "zigzag":
        return evaluate(zigzag(code, dag), chains, weights, strategy="zigzag")

    seeds = [naive_topological(dag)]
    if code.is_surface_code():
        seeds.append(zigzag(code, dag))
    if code.is_surface_code() and code.distance > EXACT_MAX_DISTANCE and not strict:
        # far beyond what the exact search can close; report the heuristic
        best = min((evaluate(p, chains, weights) for p in seeds),
                   key=lambda r: (weights or ObjectiveWeights()).key(r.sum_t, r.total_distance))
        return SynthesisResult(best.placement, best.slice_times, best.total_distance,
                               best.objective, "Heuristic", best.chains, "optimal")
    return optimal(chains, weights, budget, seeds, strict)


__all__ = [
    "AugmentedLayout",
    "BranchAndBound",
    "BudgetExceeded",
    "ObjectiveWeights",
    "Placement",
    "STRATEGIES",
    "SynthesisResult",
    "check_occupancy",
    "dump_placement",
    "evaluate",
    "insert_idle_dots",
    "load_placement",
    "naive_topological",
    "optimal",
    "order_of",
    "synthesize",
    "verify_placement",
    "zigzag",
]
