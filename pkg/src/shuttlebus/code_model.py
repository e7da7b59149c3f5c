"""Stabilizer codes with a fixed 4-slice CNOT schedule.

Two constructions are provided: the rotated surface code of odd distance and
the [[7,1,3]] Steane code. Generic CSS codes can be loaded from a JSON
code-definition file (see :func:`load_code`; :func:`dump_code` writes the format).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

NUM_SLICES = 4


class Kind(enum.IntEnum):
    # value order doubles as the Kahn tie-break order
    DATA = 0
    ANCILLA_X = 1
    ANCILLA_Z = 2


_KIND_PREFIX = {Kind.DATA: "D", Kind.ANCILLA_X: "X", Kind.ANCILLA_Z: "Z"}
_PREFIX_KIND = {v: k for k, v in _KIND_PREFIX.items()}


@dataclass(frozen=True, order=True)
class QubitId:
    kind: Kind
    index: int

    @property
    def is_data(self) -> bool:
        return self.kind is Kind.DATA

    def __str__(self) -> str:
        return f"{_KIND_PREFIX[self.kind]}{self.index}"

    @classmethod
    def parse(cls, text: str) -> "QubitId":
        try:
            return cls(_PREFIX_KIND[text[0]], int(text[1:]))
        except (KeyError, ValueError, IndexError):
            raise ValueError(f"bad qubit label {text!r}") from None


def data(i: int) -> QubitId:
    return QubitId(Kind.DATA, i)


class InvalidDistance(ValueError):
    pass


class InvalidCode(ValueError):
    pass


@dataclass(frozen=True)
class Check:
    ancilla: QubitId
    basis: str  # "X" or "Z"
    # (slice, data qubit) pairs; slices are 1-based
    schedule: tuple[tuple[int, QubitId], ...]

    @property
    def weight(self) -> int:
        return len(self.schedule)

    @property
    def support(self) -> tuple[QubitId, ...]:
        return tuple(q for _, q in self.schedule)


@dataclass(frozen=True)
class CodeSpec:
    name: str
    distance: int
    data_qubits: tuple[QubitId, ...]
    checks: tuple[Check, ...]
    # grid coordinates, present for surface codes only
    coords: dict[QubitId, tuple[float, float]] = field(default_factory=dict, compare=False)
    # logical operator supports, keyed by basis
    logicals: dict[str, tuple[QubitId, ...]] = field(default_factory=dict, compare=False)

    @property
    def ancillas(self) -> tuple[QubitId, ...]:
        return tuple(c.ancilla for c in self.checks)

    @property
    def qubits(self) -> tuple[QubitId, ...]:
        return self.data_qubits + self.ancillas

    def check_of(self, ancilla: QubitId) -> Check:
        for c in self.checks:
            if c.ancilla == ancilla:
                return c
        raise KeyError(ancilla)

    def is_surface_code(self) -> bool:
        return self.name == "rotated_surface_code"


@dataclass(frozen=True)
class ScheduleSpec:
    """CNOT pairs per slice: ``slices[s]`` is a frozenset of (data, ancilla)."""

    slices: dict[int, frozenset[tuple[QubitId, QubitId]]]

    def pairs(self) -> list[tuple[int, QubitId, QubitId]]:
        return [(s, d, a) for s in sorted(self.slices) for d, a in sorted(self.slices[s])]

    @property
    def num_cnots(self) -> int:
        return sum(len(v) for v in self.slices.values())


# Offsets (row, col) from a plaquette corner (i, j) to the data qubit visited in
# each slice. Data qubit (r, c) touches corners (r..r+1, c..c+1); corner (i, j)
# touches data rows i-1..i and cols j-1..j.
_X_ORDER = ((0, 0), (0, -1), (-1, 0), (-1, -1))
_Z_ORDER = ((0, 0), (-1, 0), (0, -1), (-1, -1))


def build_rotated_surface_code(d: int, *, z_order=_Z_ORDER, x_order=_X_ORDER) -> CodeSpec:
    """Rotated surface code with d*d data qubits numbered 1.. row-major from top-left.

    X checks sit on the top/bottom boundaries and Z checks on the left/right
    boundaries; ancillas are numbered row-major by plaquette position. Every
    check visits its data qubits in a hook-avoiding zig-zag (N for X, Z for Z).
    """
    if not isinstance(d, int) or d < 3 or d % 2 == 0:
        raise InvalidDistance(f"distance must be an odd integer >= 3, got {d!r}")

    def dq(r: int, c: int) -> QubitId:
        return data(r * d + c + 1)

    coords: dict[QubitId, tuple[float, float]] = {}
    for r in range(d):
        for c in range(d):
            coords[dq(r, c)] = (float(r), float(c))

    plaquettes: list[tuple[int, int, str]] = []
    for i in range(d + 1):
        for j in range(d + 1):
            basis = "X" if (i + j) % 2 else "Z"
            if basis == "X" and j in (0, d):
                continue
            if basis == "Z" and i in (0, d):
                continue
            plaquettes.append((i, j, basis))

    checks = []
    counters = {"X": 0, "Z": 0}
    for i, j, basis in plaquettes:
        counters[basis] += 1
        kind = Kind.ANCILLA_X if basis == "X" else Kind.ANCILLA_Z
        anc = QubitId(kind, counters[basis])
        coords[anc] = (i - 0.5, j - 0.5)
        order = x_order if basis == "X" else z_order
        sched = []
        for s, (dr, dc) in enumerate(order, start=1):
            r, c = i + dr, j + dc
            if 0 <= r < d and 0 <= c < d:
                sched.append((s, dq(r, c)))
        checks.append(Check(anc, basis, tuple(sched)))

    logicals = {
        # Z-type logical along the top row, X-type along the left column
        "Z": tuple(dq(0, c) for c in range(d)),
        "X": tuple(dq(r, 0) for r in range(d)),
    }
    code = CodeSpec(
        "rotated_surface_code",
        d,
        tuple(dq(r, c) for r in range(d) for c in range(d)),
        tuple(checks),
        coords,
        logicals,
    )
    validate_code(code)
    return code


def build_schedule(code: CodeSpec) -> ScheduleSpec:
    slices: dict[int, set] = {s: set() for s in range(1, NUM_SLICES + 1)}
    for chk in code.checks:
        for s, q in chk.schedule:
            slices[s].add((q, chk.ancilla))
    return ScheduleSpec({s: frozenset(v) for s, v in slices.items()})


def validate_code(code: CodeSpec) -> None:
    seen = set()
    for q in code.qubits:
        if q in seen:
            raise InvalidCode(f"duplicate qubit {q}")
        seen.add(q)
    data_set = set(code.data_qubits)
    for chk in code.checks:
        if chk.basis not in ("X", "Z"):
            raise InvalidCode(f"{chk.ancilla}: basis must be X or Z")
        slices = [s for s, _ in chk.schedule]
        if len(set(slices)) != len(slices):
            raise InvalidCode(f"{chk.ancilla}: repeated slice")
        if any(not 1 <= s <= NUM_SLICES for s in slices):
            raise InvalidCode(f"{chk.ancilla}: slice out of range")
        if not set(chk.support) <= data_set:
            raise InvalidCode(f"{chk.ancilla}: support outside data qubits")
        if len(set(chk.support)) != len(chk.support):
            raise InvalidCode(f"{chk.ancilla}: repeated data qubit")
    busy: set[tuple[int, QubitId]] = set()
    for chk in code.checks:
        for s, q in chk.schedule:
            if (s, q) in busy:
                raise InvalidCode(f"data qubit {q} used twice in slice {s}")
            busy.add((s, q))


# ---------------------------------------------------------------------------
# generic codes

# Each data qubit visits the three ancillas in the order A < B < C, which keeps
# the interaction chains loop-free with only four slices.
_STEANE = {
    "name": "steane",
    "distance": 3,
    "num_data": 7,
    "checks": [
        {"basis": "Z", "schedule": {"1": 7, "2": 3, "3": 5, "4": 1}},
        {"basis": "Z", "schedule": {"1": 6, "2": 7, "3": 3, "4": 2}},
        {"basis": "Z", "schedule": {"1": 4, "2": 6, "3": 7, "4": 5}},
    ],
    "logicals": {"Z": [1, 2, 3], "X": [1, 2, 3]},
}


def build_steane_code() -> CodeSpec:
    return code_from_dict(_STEANE)


def code_from_dict(spec: dict) -> CodeSpec:
    """Build a CodeSpec from the JSON code-definition schema.

    Schema::

        {"name": str, "distance": int, "num_data": int,
         "checks": [{"basis": "X"|"Z", "schedule": {"<slice>": <data index>, ...}}],
         "logicals": {"Z": [data indices], "X": [data indices]}}   # optional

    Data qubits are numbered from 1. Ancillas are numbered per basis in list order.
    """
    try:
        n = int(spec["num_data"])
        raw_checks = spec["checks"]
    except KeyError as exc:
        raise InvalidCode(f"missing field {exc}") from None
    checks = []
    counters = {"X": 0, "Z": 0}
    for raw in raw_checks:
        basis = raw.get("basis")
        if basis not in counters:
            raise InvalidCode(f"bad basis {basis!r}")
        counters[basis] += 1
        kind = Kind.ANCILLA_X if basis == "X" else Kind.ANCILLA_Z
        sched = tuple(sorted((int(s), data(int(q))) for s, q in raw["schedule"].items()))
        checks.append(Check(QubitId(kind, counters[basis]), basis, sched))
    logicals = {b: tuple(data(int(i)) for i in v) for b, v in spec.get("logicals", {}).items()}
    code = CodeSpec(
        spec.get("name", "custom"),
        int(spec.get("distance", 0)),
        tuple(data(i) for i in range(1, n + 1)),
        tuple(checks),
        {},
        logicals,
    )
    validate_code(code)
    return code


def load_code(path: str | Path) -> CodeSpec:
    return code_from_dict(json.loads(Path(path).read_text()))


def dump_code(code: CodeSpec) -> str:
    checks = [
        {"basis": c.basis, "schedule": {str(s): q.index for s, q in c.schedule}}
        for c in code.checks
    ]
    out = {
        "name": code.name,
        "distance": code.distance,
        "num_data": len(code.data_qubits),
        "checks": checks,
        "logicals": {b: [q.index for q in v] for b, v in code.logicals.items()},
    }
    return json.dumps(out, indent=2) + "\n"


def code_for(name_or_distance: str | int) -> CodeSpec:
    if isinstance(name_or_distance, int) or str(name_or_distance).isdigit():
        return build_rotated_surface_code(int(name_or_distance))
    if name_or_distance == "steane":
        return build_steane_code()
    return load_code(name_or_distance)


def iter_distances(lo: int, hi: int) -> Iterable[int]:
    return range(lo + (lo % 2 == 0), hi + 1, 2)
