"""Bit-packed Pauli-frame simulation of Clifford circuits with Pauli noise.

Frames are stored as ``(n_qubits, W)`` uint64 arrays, one bit per shot, so
each gate is a handful of vectorised XORs. Noise is injected sparsely: the
firing (target, shot) pairs of a channel are drawn as a Bernoulli process
with geometric gaps, which costs time proportional to the number of errors
rather than the number of shots.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..circuit_gen import Circuit

WORD = 64
DEFAULT_BATCH = 1 << 14


@dataclass(frozen=True)
class Op:
    name: str
    a: np.ndarray  # qubits, or controls for CX
    b: np.ndarray | None = None  # targets for CX
    p: float = 0.0
    meas: int = -1  # first measurement index written by this op


class Program:
    """A circuit lowered to index arrays, ready for repeated execution."""

    def __init__(self, circuit: Circuit):
        self.num_qubits = circuit.num_qubits
        self.ops: list[Op] = []
        self.detectors: list[np.ndarray] = []
        self.observables: dict[int, list[int]] = {}
        n_meas = 0
        for ins in circuit.instructions:
            name, t = ins.name, np.asarray(ins.targets, dtype=np.int64)
            if name == "TICK":
                continue
            if name == "DETECTOR":
                self.detectors.append(n_meas + t)
            elif name == "OBSERVABLE_INCLUDE":
                self.observables.setdefault(int(ins.args[0]), []).extend((n_meas + t).tolist())
            elif name in ("CX", "DEPOLARIZE2"):
                if len(t) % 2:
                    raise ValueError(f"{name} needs an even number of targets")
                self.ops.append(Op(name, t[0::2], t[1::2], ins.args[0] if ins.args else 0.0))
            elif name in ("M", "MX", "MR"):
                self.ops.append(Op(name, t, meas=n_meas))
                n_meas += len(t)
            elif name in ("R", "RX", "H"):
                self.ops.append(Op(name, t))
            elif name in ("DEPOLARIZE1", "Z_ERROR"):
                self.ops.append(Op(name, t, p=ins.args[0]))
            else:
                raise ValueError(f"unsupported instruction {name}")
        self.num_measurements = n_meas
        self.num_detectors = len(self.detectors)
        self.num_observables = max(self.observables) + 1 if self.observables else 0
        self.noise_ops = [i for i, op in enumerate(self.ops) if op.name in NOISE_OPS]

    def run(self, words: int, inject: Callable[[int, Op, np.ndarray, np.ndarray], None]):
        """Propagate frames through the circuit; ``inject`` is called at every noise op.

        Returns (detectors, observables) as bit-packed ``(count, words)`` arrays.
        """
        x = np.zeros((self.num_qubits, words), dtype=np.uint64)
        z = np.zeros_like(x)
        meas = np.zeros((self.num_measurements, words), dtype=np.uint64)
        for i, op in enumerate(self.ops):
            name = op.name
            if name == "CX":
                x[op.b] ^= x[op.a]
                z[op.a] ^= z[op.b]
            elif name == "H":
                x[op.a], z[op.a] = z[op.a], x[op.a]
            elif name in ("R", "RX"):
                x[op.a] = 0
                z[op.a] = 0
            elif name == "M":
                meas[op.meas:op.meas + len(op.a)] = x[op.a]
            elif name == "MX":
                meas[op.meas:op.meas + len(op.a)] = z[op.a]
            elif name == "MR":
                meas[op.meas:op.meas + len(op.a)] = x[op.a]
                x[op.a] = 0
                z[op.a] = 0
            else:
                inject(i, op, x, z)
        dets = np.zeros((self.num_detectors, words), dtype=np.uint64)
        for k, recs in enumerate(self.detectors):
            dets[k] = np.bitwise_xor.reduce(meas[recs], axis=0)
        obs = np.zeros((self.num_observables, words), dtype=np.uint64)
        for k, recs in self.observables.items():
            obs[k] = np.bitwise_xor.reduce(meas[recs], axis=0)
        return dets, obs


NOISE_OPS = ("DEPOLARIZE1", "DEPOLARIZE2", "Z_ERROR")


def bernoulli_hits(rng: np.random.Generator, n: int, p: float) -> np.ndarray:
    """Sorted indices in [0, n) that fire independently with probability p."""
    if p <= 0 or n <= 0:
        return np.empty(0, dtype=np.int64)
    if p >= 1:
        return np.arange(n, dtype=np.int64)
    mean = n * p
    size = int(mean + 6 * np.sqrt(mean) + 16)
    pos = np.cumsum(rng.geometric(p, size)) - 1
    while pos[-1] < n:
        more = np.cumsum(rng.geometric(p, size)) + pos[-1]
        pos = np.concatenate([pos, more])
    return pos[pos < n]


def _flip(frame: np.ndarray, qubits: np.ndarray, shots: np.ndarray) -> None:
    if len(shots):
        bits = np.left_shift(np.uint64(1), (shots & (WORD - 1)).astype(np.uint64))
        np.bitwise_xor.at(frame, (qubits, shots >> 6), bits)


def _paulis(frame_x, frame_z, qubits, shots, codes) -> None:
    """Apply single-qubit Paulis coded 1=X, 2=Y, 3=Z."""
    xm = (codes == 1) | (codes == 2)
    zm = codes >= 2
    _flip(frame_x, qubits[xm], shots[xm])
    _flip(frame_z, qubits[zm], shots[zm])


def random_injector(rng: np.random.Generator, shots: int):
    def inject(i: int, op: Op, x: np.ndarray, z: np.ndarray) -> None:
        m = len(op.a)
        hits = bernoulli_hits(rng, m * shots, op.p)
        if not len(hits):
            return
        tgt, shot = np.divmod(hits, shots)
        if op.name == "Z_ERROR":
            _flip(z, op.a[tgt], shot)
        elif op.name == "DEPOLARIZE1":
            _paulis(x, z, op.a[tgt], shot, rng.integers(1, 4, len(hits)))
        else:
            code = rng.integers(1, 16, len(hits))
            _paulis(x, z, op.a[tgt], shot, code >> 2)
            _paulis(x, z, op.b[tgt], shot, code & 3)
    return inject


@dataclass
class ShotBatch:
    """Sampled detector and observable flips, bit-packed with shots along the last axis."""

    n_shots: int
    seed: int
    detectors: np.ndarray  # (num_detectors, W) uint64
    observables: np.ndarray  # (num_observables, W) uint64

    def detector_bits(self) -> np.ndarray:
        return unpack(self.detectors, self.n_shots)

    def observable_bits(self) -> np.ndarray:
        return unpack(self.observables, self.n_shots)


def unpack(packed: np.ndarray, n: int) -> np.ndarray:
    """``(rows, W)`` uint64 to a ``(n, rows)`` bool array (shot-major)."""
    if packed.shape[0] == 0:
        return np.zeros((n, 0), dtype=bool)
    bits = np.unpackbits(packed.astype("<u8").view(np.uint8), axis=1, bitorder="little")
    return bits[:, :n].T.astype(bool)


def batch_rng(seed: int, batch_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(batch_index,))))


def sample_shots(circuit: Circuit | Program, n: int, seed: int = 0, batch_size: int = DEFAULT_BATCH,
                 first_batch: int = 0) -> ShotBatch:
    """Sample ``n`` shots.

    Shots are generated in fixed-size batches and batch ``b`` always uses the
    stream derived from ``(seed, b)``, so shot ``i`` is the same no matter how
    the work is split; ``first_batch`` lets workers start mid-stream.
    """
    if n < 1:
        raise ValueError("need at least one shot")
    if batch_size % WORD:
        raise ValueError("batch_size must be a multiple of 64")
    prog = circuit if isinstance(circuit, Program) else Program(circuit)
    dets, obs = [], []
    b = first_batch
    left = n
    while left > 0:
        d, o = prog.run(batch_size // WORD, random_injector(batch_rng(seed, b), batch_size))
        take = min(left, batch_size)
        w = -(-take // WORD)
        dets.append(d[:, :w])
        obs.append(o[:, :w])
        left -= take
        b += 1
    D = np.concatenate(dets, axis=1) if len(dets) > 1 else dets[0]
    O = np.concatenate(obs, axis=1) if len(obs) > 1 else obs[0]
    # chunks other than the last are full words, so plain concatenation keeps shot order
    _clear_tail(D, n)
    _clear_tail(O, n)
    return ShotBatch(n, seed, D, O)


def _clear_tail(a: np.ndarray, n: int) -> None:
    r = n % WORD
    if r and a.shape[1]:
        a[:, -1] &= np.uint64((1 << r) - 1)
