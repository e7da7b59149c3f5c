"""Architectural metrics of a bus placement.

Distances and slice times are in bus positions (dots); ``ArchParams`` turns
them into metres and seconds.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, asdict
from typing import Iterable, Mapping, Sequence

from .chain_graph import Chain
from .code_model import QubitId

NUM_SHUTTLES = 5  # four slices plus the return shuttle


@dataclass(frozen=True)
class ArchParams:
    d_qu: float = 100e-9  # dot pitch [m]
    v_sh: float = 2.8  # shuttle velocity [m/s]
    t_1q: float = 100e-9
    t_2q: float = 50e-9
    t_meas: float = 500e-9

    def __post_init__(self):
        for k, v in asdict(self).items():
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"ArchParams.{k} must be positive and finite, got {v!r}")

    def shuttle_time(self, dots: float) -> float:
        return dots * self.d_qu / self.v_sh


def hop_lengths(pos: Mapping[QubitId, int], chain: Chain) -> list[tuple[int, int]]:
    """(shuttle index, length) for every hop of a chain, return shuttle last."""
    hops = []
    prev = pos[chain.data]
    for s, a in chain.active_slices():
        hops.append((s, pos[a] - prev))
        prev = pos[a]
    hops.append((NUM_SHUTTLES, pos[chain.data] - prev))
    return hops


def chain_distance(pos: Mapping[QubitId, int], chain: Chain) -> int:
    return 2 * (pos[chain.last] - pos[chain.data])


def total_shuttle_distance(pos: Mapping[QubitId, int], chains: Iterable[Chain]) -> int:
    return sum(chain_distance(pos, c) for c in chains)


def slice_times(pos: Mapping[QubitId, int], chains: Iterable[Chain]) -> tuple[int, ...]:
    """Bottleneck displacement per shuttle t1..t5 (t5 is the return)."""
    t = [0] * NUM_SHUTTLES
    for c in chains:
        prev = pos[c.data]
        for s, a in c.active_slices():
            t[s - 1] = max(t[s - 1], pos[a] - prev)
            prev = pos[a]
        t[4] = max(t[4], pos[c.last] - pos[c.data])
    return tuple(t)


def cycle_time(times: Sequence[float], arch: ArchParams) -> float:
    """Duration of one syndrome-extraction cycle in seconds.

    Prep rotation, four (shuttle + CNOT) slices, return shuttle, unprep
    rotation, then readout. Each step ends on a barrier.
    """
    if len(times) != NUM_SHUTTLES:
        raise ValueError("expected five shuttle times")
    total = arch.t_1q
    for t in times[:4]:
        total += arch.shuttle_time(t) + arch.t_2q
    total += arch.shuttle_time(times[4])
    total += arch.t_1q + arch.t_meas
    return total


@dataclass(frozen=True)
class MetricsReport:
    total_distance_dots: int
    total_distance_m: float
    slice_times_dots: tuple[int, ...]
    slice_times_s: tuple[float, ...]
    shuttle_time_s: float
    cycle_time_s: float
    bus_length: int
    per_data_distance: dict = field(default_factory=dict)

    @property
    def sum_t(self) -> int:
        return sum(self.slice_times_dots)


def report(pos: Mapping[QubitId, int], chains: Sequence[Chain], arch: ArchParams,
           bus_length: int | None = None) -> MetricsReport:
    t = slice_times(pos, chains)
    dist = total_shuttle_distance(pos, chains)
    ts = tuple(arch.shuttle_time(x) for x in t)
    return MetricsReport(
        total_distance_dots=dist,
        total_distance_m=dist * arch.d_qu,
        slice_times_dots=t,
        slice_times_s=ts,
        shuttle_time_s=sum(ts),
        cycle_time_s=cycle_time(t, arch),
        bus_length=len(pos) if bus_length is None else bus_length,
        per_data_distance={str(c.data): chain_distance(pos, c) for c in chains},
    )


SCALING_COLUMNS = (
    "d", "strategy", "optimality", "sum_t", "t1", "t2", "t3", "t4", "t5",
    "total_distance", "extra_dots", "bus_length", "shuttle_time_s", "cycle_time_s",
    "dist_min", "dist_median", "dist_max", "flag",
)


def scaling_sweep(distances: Iterable[int], strategy: str, arch: ArchParams | None = None,
                  budget: float = 60.0) -> list[dict]:
    """One row per distance with time, distance and extra-dot columns.

    An exact solve that runs out of budget is reported with the incumbent and
    ``flag=budget``.
    """
    from . import synthesis

    arch = arch or ArchParams()
    rows = []
    for d in distances:
        res = synthesis.synthesize(d, strategy, budget=budget)
        layout = synthesis.insert_idle_dots(res.placement, res.chains)
        rep = report(res.placement, res.chains, arch, layout.bus_length)
        per = sorted(rep.per_data_distance.values())
        rows.append({
            "d": d,
            "strategy": strategy,
            "optimality": res.optimality,
            "sum_t": rep.sum_t,
            **{f"t{i + 1}": v for i, v in enumerate(rep.slice_times_dots)},
            "total_distance": rep.total_distance_dots,
            "extra_dots": len(layout.idle_dots),
            "bus_length": layout.bus_length,
            "shuttle_time_s": rep.shuttle_time_s,
            "cycle_time_s": rep.cycle_time_s,
            "dist_min": per[0],
            "dist_median": per[len(per) // 2],
            "dist_max": per[-1],
            "flag": "budget" if res.optimality == "Heuristic" and strategy == "optimal" else "",
        })
    return rows


def rows_to_csv(rows: Sequence[Mapping], columns: Sequence[str], header: str = "") -> str:
    buf = io.StringIO()
    for line in header.splitlines():
        buf.write(f"# {line}\n")
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(v) for k, v in r.items()})
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.9g}"
    return v
