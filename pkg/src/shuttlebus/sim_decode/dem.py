"""Detector error models by forward propagation of single-qubit Pauli components.

Every noise channel is rewritten as independent Pauli terms. A term is a
product of single-qubit X and Z components, and its detector signature is
the XOR of theirs, so it is enough to propagate each component once. All
components are propagated together, one per bit column, by the frame
simulator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..circuit_gen import Circuit
from .frame import WORD, Program, unpack

Signature = tuple[frozenset, int]  # (flipped detectors, observable bitmask)
EMPTY: Signature = (frozenset(), 0)


class NonGraphlikeModel(ValueError):
    pass


class NonCliffordInstruction(ValueError):
    pass


@dataclass(frozen=True)
class Fault:
    probability: float
    detectors: tuple[int, ...]
    observables: int  # bitmask
    # graphlike pieces whose XOR is this fault, each flipping at most two detectors
    components: tuple[tuple[tuple[int, ...], int], ...] = ()


@dataclass
class DetectorErrorModel:
    faults: list[Fault]
    num_detectors: int
    num_observables: int
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.faults)

    def to_text(self) -> str:
        """Stim-style ``error(p) D.. L..`` lines, components joined with ``^``."""
        out = []
        for f in self.faults:
            parts = []
            for dets, obs in f.components or ((f.detectors, f.observables),):
                toks = [f"D{d}" for d in dets] + [f"L{k}" for k in range(self.num_observables) if obs >> k & 1]
                parts.append(" ".join(toks))
            out.append(f"error({f.probability:.9g}) " + " ^ ".join(parts))
        return "\n".join(out) + ("\n" if out else "")


def xor_prob(p1: float, p2: float) -> float:
    """Probability that exactly one of two independent events happens."""
    return p1 + p2 - 2 * p1 * p2


def depolarize1_component(p: float) -> float:
    """Independent X, Y, Z probability that composes to DEPOLARIZE1(p)."""
    return 0.5 - 0.5 * math.sqrt(max(0.0, 1 - 4 * p / 3))


def depolarize2_component(p: float) -> float:
    """Independent probability for each of the 15 two-qubit Paulis composing to DEPOLARIZE2(p)."""
    return 0.5 - 0.5 * max(0.0, 1 - 16 * p / 15) ** 0.125


def _propagate(prog: Program, sites: list[tuple[int, int, int]]):
    """Detector/observable flips for each (op index, qubit, pauli 1=X 3=Z) site."""
    by_op: dict[int, list[tuple[int, int, int]]] = {}
    for col, (i, q, p) in enumerate(sites):
        by_op.setdefault(i, []).append((col, q, p))
    cols = max(1, len(sites))
    words = -(-cols // WORD)

    def inject(i, op, x, z):
        for col, q, p in by_op.get(i, ()):
            frame = x if p == 1 else z
            frame[q, col >> 6] ^= np.uint64(1) << np.uint64(col & 63)

    dets, obs = prog.run(words, inject)
    D = unpack(dets, cols)  # (cols, n_det)
    O = unpack(obs, cols)
    sig = []
    obs_w = 1 << np.arange(O.shape[1], dtype=np.int64)
    for c in range(len(sites)):
        sig.append((frozenset(np.flatnonzero(D[c]).tolist()), int((O[c] * obs_w).sum())))
    return sig


def _xor(*sigs: Signature) -> Signature:
    dets: frozenset = frozenset()
    obs = 0
    for d, o in sigs:
        dets = dets ^ d
        obs ^= o
    return dets, obs


def _graphlike(parts: list[Signature]) -> list[Signature]:
    out = []
    for s in parts:
        if s == EMPTY:
            continue
        if len(s[0]) > 2:
            raise NonGraphlikeModel(f"component flips {len(s[0])} detectors: {sorted(s[0])}")
        out.append(s)
    return out


def _decompose(xs: list[Signature], zs: list[Signature]) -> list[Signature]:
    """Split a term with X components ``xs`` and Z components ``zs`` into graphlike pieces."""
    total = _xor(*xs, *zs)
    x_part, z_part = _xor(*xs), _xor(*zs)
    if x_part != EMPTY and z_part != EMPTY:
        pieces = []
        for part, singles in ((x_part, xs), (z_part, zs)):
            pieces += [part] if len(part[0]) <= 2 else _graphlike(list(singles))
        return pieces
    if len(total[0]) <= 2:
        return [total] if total != EMPTY else []
    return _graphlike(xs + zs)


def derive_detector_model(circuit: Circuit, decompose: bool = True) -> DetectorErrorModel:
    """Merge every Pauli term of every noise channel into a detector error model.

    Faults with identical signatures are combined with :func:`xor_prob`; terms
    that flip nothing are dropped. With ``decompose`` each fault also carries a
    graphlike decomposition (first term seen wins), raising
    :class:`NonGraphlikeModel` when none exists.
    """
    try:
        prog = Program(circuit)
    except ValueError as exc:
        raise NonCliffordInstruction(str(exc)) from exc
    sites: list[tuple[int, int, int]] = []
    index: dict[tuple[int, int, int], int] = {}
    for i in prog.noise_ops:
        op = prog.ops[i]
        if op.p <= 0:
            continue
        qs = op.a.tolist() + (op.b.tolist() if op.b is not None else [])
        for q in qs:
            for p in ((3,) if op.name == "Z_ERROR" else (1, 3)):
                index[(i, q, p)] = len(sites)
                sites.append((i, q, p))
    sig = _propagate(prog, sites) if sites else []

    def comp(i, q, p):
        return sig[index[(i, q, p)]]

    merged: dict[Signature, list] = {}

    def add(prob, xs, zs):
        total = _xor(*xs, *zs)
        if total == EMPTY or prob <= 0:
            return
        if total in merged:
            merged[total][0] = xor_prob(merged[total][0], prob)
        else:
            pieces = _decompose(xs, zs) if decompose else [total]
            merged[total] = [prob, pieces]

    for i in prog.noise_ops:
        op = prog.ops[i]
        if op.p <= 0:
            continue
        if op.name == "Z_ERROR":
            for q in op.a.tolist():
                add(op.p, [], [comp(i, q, 3)])
        elif op.name == "DEPOLARIZE1":
            pc = depolarize1_component(op.p)
            for q in op.a.tolist():
                X, Z = comp(i, q, 1), comp(i, q, 3)
                add(pc, [X], [])
                add(pc, [X], [Z])
                add(pc, [], [Z])
        else:
            pc = depolarize2_component(op.p)
            for a, b in zip(op.a.tolist(), op.b.tolist()):
                ca = {1: comp(i, a, 1), 3: comp(i, a, 3)}
                cb = {1: comp(i, b, 1), 3: comp(i, b, 3)}
                for code in range(1, 16):
                    xs, zs = [], []
                    for c, pa in ((ca, code >> 2), (cb, code & 3)):
                        if pa in (1, 2):
                            xs.append(c[1])
                        if pa in (2, 3):
                            zs.append(c[3])
                    add(pc, xs, zs)

    faults = []
    for (dets, obs), (prob, pieces) in merged.items():
        faults.append(Fault(prob, tuple(sorted(dets)), obs,
                            tuple((tuple(sorted(d)), o) for d, o in pieces)))
    faults.sort(key=lambda f: (f.detectors, f.observables))
    return DetectorErrorModel(faults, prog.num_detectors, prog.num_observables)
