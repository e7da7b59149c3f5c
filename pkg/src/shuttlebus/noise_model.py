"""Pauli-channel parameters for gate, idle and shuttling noise, and the
per-round timeline of noise events on a synthesized bus.

Dephasing over a time t with coherence time T2 is a Z error with
probability (1 - exp(-t / 2 T2)) / 2. Shuttling uses the same channel with
a motionally narrowed coherence time that grows with the distance moved.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Sequence

from .chain_graph import Chain
from .code_model import NUM_SLICES, CodeSpec, QubitId
from .metrics import ArchParams, cycle_time
from .synthesis.idle_dots import AugmentedLayout, bus_slice_times, bus_tracks

INF = math.inf

DEPOLARIZE1 = "Depolarize1"
DEPOLARIZE2 = "Depolarize2"
PAULI_Z = "PauliZ"
EVENT_KINDS = (DEPOLARIZE1, DEPOLARIZE2, PAULI_Z)


@dataclass(frozen=True)
class NoiseParams:
    p_gate: float = 0.0  # depolarizing probability after every gate
    T2_qd: float = INF  # idle dephasing time in a dot [s]
    T2_bus: float = INF  # base dephasing time while shuttling [s]
    l_c: float = 13e-9  # correlation length [m]

    def __post_init__(self):
        if not 0.0 <= self.p_gate <= 1.0:
            raise ValueError(f"p_gate must be in [0, 1], got {self.p_gate}")
        for k in ("T2_qd", "T2_bus", "l_c"):
            v = getattr(self, k)
            if not v > 0 or math.isnan(v):
                raise ValueError(f"{k} must be positive (inf allowed for T2), got {v}")
        if math.isinf(self.l_c):
            raise ValueError("l_c must be finite")

    @property
    def lossless(self) -> bool:
        return self.p_gate == 0 and math.isinf(self.T2_qd) and math.isinf(self.T2_bus)


def dephasing_prob(t: float, T2: float) -> float:
    if t < 0:
        raise ValueError(f"negative duration {t}")
    if math.isinf(T2):
        return 0.0
    return -math.expm1(-t / (2.0 * T2)) / 2.0


def shuttle_t2(T2_bus: float, d_sh: float, l_c: float) -> float:
    """Effective coherence time of a spin shuttled over ``d_sh`` metres."""
    if d_sh < 0:
        raise ValueError(f"negative shuttle distance {d_sh}")
    if l_c <= 0:
        raise ValueError("l_c must be positive")
    return T2_bus * math.sqrt((d_sh + l_c) / l_c)


def shuttle_dephasing_prob(d_sh: float, arch: ArchParams, noise: NoiseParams) -> float:
    if d_sh == 0:
        return 0.0
    return dephasing_prob(d_sh / arch.v_sh, shuttle_t2(noise.T2_bus, d_sh, noise.l_c))


@dataclass(frozen=True)
class NoiseEvent:
    kind: str
    targets: tuple[QubitId, ...]
    probability: float
    provenance: str  # "gate", "idle" or "shuttle"
    amount: float = 0.0  # idle seconds or shuttled metres

    def __post_init__(self):
        hi = 0.5 if self.kind == PAULI_Z else 1.0
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind}")
        if not 0.0 <= self.probability <= hi:
            raise ValueError(f"{self.kind} probability {self.probability} out of range")


@dataclass(frozen=True)
class Segment:
    """Barrier-to-barrier step of a round: gates, then the noise they accrue."""

    label: str
    duration: float
    gates: tuple[tuple[str, tuple[QubitId, ...]], ...]
    events: tuple[NoiseEvent, ...]


def _cx_pairs(code: CodeSpec, s: int) -> list[tuple[QubitId, QubitId]]:
    """(control, target) pairs of slice ``s``; X ancillas control, Z ancillas target."""
    pairs = []
    for chk in code.checks:
        for t, dq in chk.schedule:
            if t == s:
                pairs.append((chk.ancilla, dq) if chk.basis == "X" else (dq, chk.ancilla))
    return sorted(pairs)


def build_noise_timeline(layout: AugmentedLayout, chains: Sequence[Chain], arch: ArchParams,
                         noise: NoiseParams, code: CodeSpec) -> list[Segment]:
    """One syndrome-extraction round as a list of barrier segments.

    Segment durations follow :func:`metrics.cycle_time` applied to the bus
    slice times, so the timeline and the cycle time always agree. Events with
    zero probability are kept; the circuit generator drops them.
    """
    tracks = bus_tracks(layout)
    times = bus_slice_times(layout)
    data = list(code.data_qubits)
    anc = list(code.ancillas)
    x_anc = [a for a in anc if a.kind.name == "ANCILLA_X"]
    everyone = data + anc
    p = noise.p_gate

    def idle_events(busy: dict, duration: float) -> list[NoiseEvent]:
        out = []
        for q in everyone:
            t = duration - busy.get(q, 0.0)
            if t > 1e-18:
                out.append(NoiseEvent(PAULI_Z, (q,), dephasing_prob(t, noise.T2_qd), "idle", t))
        return out

    def one_qubit_layer(label, qubits):
        ev = [NoiseEvent(DEPOLARIZE1, (q,), p, "gate") for q in qubits]
        ev += idle_events({q: arch.t_1q for q in qubits}, arch.t_1q)
        return Segment(label, arch.t_1q, (("H", tuple(qubits)),), tuple(ev))

    def shuttle_layer(label, dots, moves):
        dur = arch.shuttle_time(dots)
        ev, busy = [], {}
        for q, k in moves:
            if k > 0:
                d_sh = k * arch.d_qu
                ev.append(NoiseEvent(PAULI_Z, (q,), shuttle_dephasing_prob(d_sh, arch, noise), "shuttle", d_sh))
                busy[q] = arch.shuttle_time(k)
        return Segment(label, dur, (), tuple(ev + idle_events(busy, dur)))

    segs = [one_qubit_layer("prep", x_anc)]
    for s in range(1, NUM_SLICES + 1):
        moves = [(q, tracks[q][s] - tracks[q][s - 1]) for q in data if q in tracks]
        segs.append(shuttle_layer(f"shuttle{s}", times[s - 1], moves))
        pairs = _cx_pairs(code, s)
        flat = tuple(q for pr in pairs for q in pr)
        ev = [NoiseEvent(DEPOLARIZE2, pr, p, "gate") for pr in pairs]
        ev += idle_events({q: arch.t_2q for q in flat}, arch.t_2q)
        segs.append(Segment(f"cnot{s}", arch.t_2q, (("CX", flat),), tuple(ev)))
    moves = [(q, tracks[q][NUM_SLICES] - tracks[q][0]) for q in data if q in tracks]
    segs.append(shuttle_layer("return", times[NUM_SLICES], moves))
    segs.append(one_qubit_layer("unprep", x_anc))
    ev = idle_events({a: arch.t_meas for a in anc}, arch.t_meas)
    segs.append(Segment("measure", arch.t_meas, (("MR", tuple(anc)),), tuple(ev)))
    return segs


def timeline_duration(segments: Sequence[Segment]) -> float:
    return sum(s.duration for s in segments)


def layout_cycle_time(layout: AugmentedLayout, arch: ArchParams) -> float:
    return cycle_time(bus_slice_times(layout), arch)


# -- configuration files ------------------------------------------------------

CONFIG_KEYS = {
    "arch": {f.name for f in fields(ArchParams)},
    "noise": {f.name for f in fields(NoiseParams)},
}


def load_config(path: str | Path, arch: ArchParams | None = None,
                noise: NoiseParams | None = None) -> tuple[ArchParams, NoiseParams]:
    """Read ``[arch]`` and ``[noise]`` sections of an INI file (SI units).

    Keys: d_qu, v_sh, t_1q, t_2q, t_meas under ``[arch]``; p_gate, T2_qd,
    T2_bus, l_c under ``[noise]``. Missing keys keep their defaults.
    """
    cp = configparser.ConfigParser()
    cp.optionxform = str  # keep T2_qd case
    if not cp.read(path):
        raise FileNotFoundError(path)
    arch = arch or ArchParams()
    noise = noise or NoiseParams()
    vals: dict[str, dict] = {"arch": {}, "noise": {}}
    for section in cp.sections():
        if section not in CONFIG_KEYS:
            raise ValueError(f"unknown section [{section}]")
        for k, v in cp.items(section):
            if k not in CONFIG_KEYS[section]:
                raise ValueError(f"unknown key {section}.{k}")
            vals[section][k] = float(v)  # "inf" and 1e-6 style both parse
    return replace(arch, **vals["arch"]), replace(noise, **vals["noise"])


def dump_config(arch: ArchParams, noise: NoiseParams) -> str:
    lines = ["[arch]"] + [f"{k} = {v!r}" for k, v in asdict(arch).items()]
    lines += ["", "[noise]"] + [f"{k} = {v!r}" for k, v in asdict(noise).items()]
    return "\n".join(lines) + "\n"
