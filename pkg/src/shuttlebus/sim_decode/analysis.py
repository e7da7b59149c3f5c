"""Logical error rates, confidence-targeted sampling and threshold crossings."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from ..circuit_gen import Circuit
from .dem import derive_detector_model
from .decoder import UnionFindDecoder
from .frame import DEFAULT_BATCH, Program, ShotBatch, sample_shots

DEFAULT_SHOT_CAP = 10_000_000
DEFAULT_TARGET_FAILURES = 100


def per_round(p_shot: float, rounds: int) -> float:
    """Per-round flip probability whose r-fold composition gives ``p_shot``."""
    if rounds < 1:
        raise ValueError("rounds must be positive")
    if p_shot >= 0.5:
        return 0.5
    return (1 - (1 - 2 * p_shot) ** (1 / rounds)) / 2


def logical_error_rate(batch: ShotBatch, predictions: np.ndarray, rounds: int) -> tuple[float, float]:
    """(p_shot, p_round) from sampled observables and decoder predictions."""
    actual = _obs_masks(batch)
    fails = int(np.count_nonzero(actual != np.asarray(predictions)[: batch.n_shots]))
    p_shot = fails / batch.n_shots
    return p_shot, per_round(p_shot, rounds)


def _obs_masks(batch: ShotBatch) -> np.ndarray:
    bits = batch.observable_bits()
    return (bits.astype(np.int64) << np.arange(bits.shape[1], dtype=np.int64)).sum(axis=1)


def wilson(k: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n == 0:
        return 0.0, 1.0
    ph = k / n
    den = 1 + z * z / n
    mid = (ph + z * z / (2 * n)) / den
    half = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / den
    return max(0.0, mid - half), min(1.0, mid + half)


@dataclass(frozen=True)
class SimResult:
    shots: int
    failures: int
    rounds: int
    p_shot: float
    p_round: float
    p_round_lo: float
    p_round_hi: float
    seed: int

    def row(self) -> dict:
        return asdict(self)


def run_memory(circuit: Circuit, seed: int = 0, max_shots: int = DEFAULT_SHOT_CAP,
               target_failures: int = DEFAULT_TARGET_FAILURES, batch_size: int = DEFAULT_BATCH,
               decoder: UnionFindDecoder | None = None, min_shots: int = 0) -> SimResult:
    """Sample and decode batches until ``target_failures`` logical failures or ``max_shots``.

    At least ``min_shots`` shots are taken (capped by ``max_shots``) even when
    the failure target is reached sooner.

    The stopping point depends only on the data, so a rerun with the same
    seed stops at the same batch and reports identical numbers.
    """
    rounds = circuit.rounds
    prog = Program(circuit)
    if decoder is None:
        decoder = UnionFindDecoder(derive_detector_model(circuit))
    shots = fails = 0
    b = 0
    while shots < max_shots and (fails < target_failures or shots < min_shots):
        n = min(batch_size, max_shots - shots)
        batch = sample_shots(prog, n, seed, batch_size, first_batch=b)
        pred = decoder.decode_packed(batch.detectors, n)
        fails += int(np.count_nonzero(_obs_masks(batch) != pred))
        shots += n
        b += 1
    p_shot = fails / shots
    lo, hi = wilson(fails, shots)
    return SimResult(shots, fails, rounds, p_shot, per_round(p_shot, rounds),
                     per_round(lo, rounds), per_round(hi, rounds), seed)


# -- thresholds ---------------------------------------------------------------

class NoCrossing(Exception):
    pass


@dataclass
class ThresholdEstimate:
    mean: float | None
    std: float | None
    crossings: list[tuple[int, int, float]] = field(default_factory=list)
    no_crossing: list[tuple[int, int]] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.mean is not None

    def to_json(self) -> str:
        return json.dumps({
            "mean": self.mean,
            "std": self.std,
            "crossings": [{"d1": a, "d2": b, "x": x} for a, b, x in self.crossings],
            "no_crossing": [{"d1": a, "d2": b} for a, b in self.no_crossing],
        }, indent=2) + "\n"


def pair_crossing(xs: Sequence[float], ya: Sequence[float], yb: Sequence[float],
                  log_x: bool = True) -> float:
    """First crossing of two curves by linear interpolation of log(rate).

    The parameter axis is logarithmic unless ``log_x`` is false. Points where
    either curve is zero are skipped. Raises :class:`NoCrossing` when the
    difference never changes sign, including identical curves.
    """
    fx, inv = (math.log, math.exp) if log_x else (float, float)
    pts = [(fx(x), math.log(b) - math.log(a))
           for x, a, b in zip(xs, ya, yb) if a > 0 and b > 0 and x > 0]
    pts.sort()
    for (x0, d0), (x1, d1) in zip(pts, pts[1:]):
        if d0 == 0 and d1 == 0:
            continue
        if d0 * d1 < 0 or (d1 == 0 and d0 != 0):
            return inv(x0 + (x1 - x0) * d0 / (d0 - d1))
    raise NoCrossing


def pseudo_threshold(curves: Mapping[int, Sequence[tuple[float, float]]],
                     log_x: bool = True) -> ThresholdEstimate:
    """Mean and spread of the crossings of every pair of distance curves."""
    if len(curves) < 2:
        raise ValueError("need at least two distances")
    ds = sorted(curves)
    est = ThresholdEstimate(None, None)
    for i, a in enumerate(ds):
        for b in ds[i + 1:]:
            pa = dict(curves[a])
            pb = dict(curves[b])
            xs = sorted(set(pa) & set(pb))
            try:
                x = pair_crossing(xs, [pa[x] for x in xs], [pb[x] for x in xs], log_x)
            except NoCrossing:
                est.no_crossing.append((a, b))
                continue
            est.crossings.append((a, b, x))
    if est.crossings:
        vals = np.array([c[2] for c in est.crossings])
        est.mean = float(vals.mean())
        est.std = float(vals.std())
    return est


def fit_suppression(distances: Sequence[int], rates: Sequence[float]) -> tuple[float, float]:
    """Least-squares fit of p_round = A / Lambda**((d+1)/2); returns (Lambda, A)."""
    d = np.asarray(distances, dtype=float)
    y = np.log(np.asarray(rates, dtype=float))
    slope, icpt = np.polyfit((d + 1) / 2, y, 1)
    return float(math.exp(-slope)), float(math.exp(icpt))


def extrapolate(lam: float, amp: float, d: int) -> float:
    return amp / lam ** ((d + 1) / 2)


# -- shot export --------------------------------------------------------------

def write_shots(path: str | Path, batch: ShotBatch, meta: Mapping | None = None) -> None:
    """Dense bit-packed shots plus a text header next to them (``<path>.json``).

    One record per shot, detectors then observables, bits packed little-endian
    within each byte, records padded to whole bytes.
    """
    bits = np.concatenate([batch.detector_bits(), batch.observable_bits()], axis=1)
    packed = np.packbits(bits, axis=1, bitorder="little")
    Path(path).write_bytes(packed.tobytes())
    head = {
        "format": "row-major bit-packed, little-endian, detectors then observables",
        "num_shots": batch.n_shots,
        "num_detectors": int(batch.detectors.shape[0]),
        "num_observables": int(batch.observables.shape[0]),
        "bytes_per_shot": int(packed.shape[1]),
        "seed": batch.seed,
        **dict(meta or {}),
    }
    Path(str(path) + ".json").write_text(json.dumps(head, indent=2, sort_keys=True) + "\n")


def read_shots(path: str | Path) -> tuple[np.ndarray, np.ndarray, dict]:
    head = json.loads(Path(str(path) + ".json").read_text())
    raw = np.frombuffer(Path(path).read_bytes(), dtype=np.uint8)
    rows = raw.reshape(head["num_shots"], head["bytes_per_shot"])
    bits = np.unpackbits(rows, axis=1, bitorder="little").astype(bool)
    nd, no = head["num_detectors"], head["num_observables"]
    return bits[:, :nd], bits[:, nd:nd + no], head


__all__ = [
    "NoCrossing",
    "SimResult",
    "ThresholdEstimate",
    "extrapolate",
    "fit_suppression",
    "logical_error_rate",
    "pair_crossing",
    "per_round",
    "pseudo_threshold",
    "read_shots",
    "run_memory",
    "wilson",
    "write_shots",
]
