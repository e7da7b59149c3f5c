"""Noisy memory-experiment circuits on a synthesized bus, in Stim text format.

Qubit indices in emitted circuits are bus positions (idle dots included), so
a circuit file alone tells where every qubit sits on the bus.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .chain_graph import Chain
from .code_model import CodeSpec, QubitId, code_for
from .metrics import ArchParams
from .noise_model import (
    DEPOLARIZE1,
    DEPOLARIZE2,
    PAULI_Z,
    NoiseParams,
    Segment,
    build_noise_timeline,
)
from .synthesis import insert_idle_dots, synthesize
from .synthesis.idle_dots import AugmentedLayout

NOISE_NAMES = {DEPOLARIZE1: "DEPOLARIZE1", DEPOLARIZE2: "DEPOLARIZE2", PAULI_Z: "Z_ERROR"}
KIND_OF = {v: k for k, v in NOISE_NAMES.items()}
GATES = {"R", "RX", "H", "CX", "M", "MX", "MR", "TICK"}
ANNOTATIONS = {"DETECTOR", "OBSERVABLE_INCLUDE"}
MEASUREMENTS = {"M", "MX", "MR"}


class Instruction(NamedTuple):
    name: str
    targets: tuple[int, ...] = ()  # qubits, or negative record lookbacks
    args: tuple[float, ...] = ()


@dataclass
class Circuit:
    instructions: list[Instruction] = field(default_factory=list)
    rounds: int = 0

    def append(self, name: str, targets=(), args=()) -> None:
        self.instructions.append(Instruction(name, tuple(targets), tuple(args)))

    @property
    def num_qubits(self) -> int:
        qs = [t for ins in self.instructions if ins.name not in ANNOTATIONS for t in ins.targets]
        return max(qs) + 1 if qs else 0

    @property
    def num_measurements(self) -> int:
        return sum(len(i.targets) for i in self.instructions if i.name in MEASUREMENTS)

    @property
    def num_detectors(self) -> int:
        return sum(1 for i in self.instructions if i.name == "DETECTOR")

    @property
    def num_observables(self) -> int:
        obs = [int(i.args[0]) for i in self.instructions if i.name == "OBSERVABLE_INCLUDE"]
        return max(obs) + 1 if obs else 0

    def without_noise(self) -> "Circuit":
        return Circuit([i for i in self.instructions if i.name not in KIND_OF], self.rounds)

    def __len__(self) -> int:
        return len(self.instructions)


@dataclass(frozen=True)
class MemoryExperiment:
    code: CodeSpec
    layout: AugmentedLayout
    chains: tuple[Chain, ...]
    basis: str = "Z"
    rounds: int | None = None  # None means 3d
    arch: ArchParams = ArchParams()
    noise: NoiseParams = NoiseParams()

    def __post_init__(self):
        if self.basis not in ("X", "Z"):
            raise ValueError(f"basis must be X or Z, got {self.basis!r}")
        if self.rounds is not None and self.rounds < 1:
            raise ValueError("rounds must be at least 1")
        placed = set(self.layout.placement)
        if placed != set(self.code.qubits):
            raise ValueError("layout does not place exactly the code's qubits")

    @property
    def num_rounds(self) -> int:
        return self.rounds if self.rounds is not None else 3 * self.code.distance


def memory_experiment(code: CodeSpec | int | str, strategy: str = "zigzag", basis: str = "Z",
                      rounds: int | None = None, arch: ArchParams | None = None,
                      noise: NoiseParams | None = None, budget: float | None = 60.0) -> MemoryExperiment:
    """Synthesize a layout for ``code`` and wrap it in a memory experiment."""
    if not isinstance(code, CodeSpec):
        code = code_for(code)
    res = synthesize(code, strategy, budget=budget)
    layout = insert_idle_dots(res.placement, res.chains)
    return MemoryExperiment(code, layout, res.chains, basis, rounds,
                            arch or ArchParams(), noise or NoiseParams())


def build_memory_circuit(exp: MemoryExperiment) -> Circuit:
    code, basis = exp.code, exp.basis
    bus = {q: exp.layout.bus_position(q) for q in code.qubits}
    data = sorted(code.data_qubits, key=bus.__getitem__)
    anc = sorted(code.ancillas, key=bus.__getitem__)
    timeline = build_noise_timeline(exp.layout, exp.chains, exp.arch, exp.noise, code)
    support = {c.ancilla: c.support for c in code.checks}
    basis_of = {c.ancilla: c.basis for c in code.checks}
    coords = code.coords

    circ = Circuit(rounds=exp.num_rounds)
    n_meas = 0
    last: dict[QubitId, int] = {}

    def rec(*indices):
        return [i - n_meas for i in indices]

    def det_args(q, t):
        r, c = coords.get(q, (0.0, 0.0))
        return (c, r, float(t))

    circ.append("R" if basis == "Z" else "RX", [bus[q] for q in data])
    circ.append("R", [bus[q] for q in anc])
    for rnd in range(exp.num_rounds):
        for seg in timeline:
            circ.append("TICK")
            _emit_segment(circ, seg, bus)
        this = {}
        for q in anc:
            this[q] = n_meas
            n_meas += 1
        for q in anc:
            if rnd == 0:
                if basis_of[q] == basis:
                    circ.append("DETECTOR", rec(this[q]), det_args(q, rnd))
            else:
                circ.append("DETECTOR", rec(this[q], last[q]), det_args(q, rnd))
        last = this

    circ.append("TICK")
    circ.append("M" if basis == "Z" else "MX", [bus[q] for q in data])
    final = {}
    for q in data:
        final[q] = n_meas
        n_meas += 1
    for q in anc:
        if basis_of[q] == basis:
            circ.append("DETECTOR", rec(last[q], *(final[d] for d in support[q])),
                        det_args(q, exp.num_rounds))
    logical = code.logicals[basis]
    circ.append("OBSERVABLE_INCLUDE", rec(*(final[d] for d in logical)), (0,))
    return circ


def _emit_segment(circ: Circuit, seg: Segment, bus: dict) -> None:
    for name, qubits in seg.gates:
        targets = [bus[q] for q in qubits]
        if name != "CX":
            targets.sort()  # measurement records follow bus order
        if targets:
            circ.append(name, targets)
    # group events by (kind, probability) in first-seen order, zero-probability ones dropped
    groups: dict[tuple[str, float], list[int]] = {}
    for ev in seg.events:
        if ev.probability > 0:
            groups.setdefault((ev.kind, ev.probability), []).extend(bus[q] for q in ev.targets)
    for (kind, p), targets in groups.items():
        circ.append(NOISE_NAMES[kind], targets, (p,))


def count_error_locations(circ: Circuit) -> dict[str, int]:
    out = Counter({k: 0 for k in NOISE_NAMES})
    for ins in circ.instructions:
        kind = KIND_OF.get(ins.name)
        if kind is not None:
            out[kind] += len(ins.targets) // (2 if kind == DEPOLARIZE2 else 1)
    return dict(out)


# -- text format ---------------------------------------------------------------

def _fmt_arg(x: float) -> str:
    if float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return format(x, ".9g")


def emit_circuit_text(circ: Circuit) -> str:
    lines = []
    for ins in circ.instructions:
        head = ins.name
        if ins.args:
            head += "(" + ", ".join(_fmt_arg(a) for a in ins.args) + ")"
        if ins.name in ANNOTATIONS:
            body = [f"rec[{t}]" for t in ins.targets]
        else:
            body = [str(t) for t in ins.targets]
        lines.append(" ".join([head] + body))
    return "".join(line + "\n" for line in lines)


_LINE = re.compile(r"^([A-Z_0-9]+)(?:\(([^)]*)\))?\s*(.*)$")


def parse_circuit_text(text: str) -> Circuit:
    """Parse the subset of Stim syntax written by :func:`emit_circuit_text`."""
    circ = Circuit()
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE.match(line)
        if not m:
            raise ValueError(f"line {n}: cannot parse {raw!r}")
        name, args, rest = m.group(1), m.group(2), m.group(3)
        if name not in GATES | ANNOTATIONS | set(KIND_OF):
            raise ValueError(f"line {n}: unsupported instruction {name}")
        argv = tuple(float(a) for a in args.split(",")) if args else ()
        targets = []
        for tok in rest.split():
            if tok.startswith("rec[") and tok.endswith("]"):
                targets.append(int(tok[4:-1]))
            else:
                targets.append(int(tok))
        circ.append(name, targets, argv)
    circ.rounds = sum(1 for i in circ.instructions if i.name == "MR")
    return circ


def circuit_for(d: int | str, strategy: str = "zigzag", basis: str = "Z", rounds: int | None = None,
                arch: ArchParams | None = None, noise: NoiseParams | None = None) -> Circuit:
    return build_memory_circuit(memory_experiment(d, strategy, basis, rounds, arch, noise))


__all__ = [
    "Circuit",
    "Instruction",
    "MemoryExperiment",
    "build_memory_circuit",
    "circuit_for",
    "count_error_locations",
    "emit_circuit_text",
    "memory_experiment",
    "parse_circuit_text",
]
