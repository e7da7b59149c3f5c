"""Pauli-frame sampling, detector error models, union-find decoding and thresholds."""

from .analysis import (
    NoCrossing,
    SimResult,
    ThresholdEstimate,
    extrapolate,
    fit_suppression,
    logical_error_rate,
    pair_crossing,
    per_round,
    pseudo_threshold,
    read_shots,
    run_memory,
    wilson,
    write_shots,
)
from .decoder import MatchingGraph, UnionFindDecoder, decode_union_find
from .dem import DetectorErrorModel, Fault, NonGraphlikeModel, derive_detector_model, xor_prob
from .frame import Program, ShotBatch, sample_shots

__all__ = [
    "DetectorErrorModel",
    "Fault",
    "MatchingGraph",
    "NoCrossing",
    "NonGraphlikeModel",
    "Program",
    "ShotBatch",
    "SimResult",
    "ThresholdEstimate",
    "UnionFindDecoder",
    "decode_union_find",
    "derive_detector_model",
    "extrapolate",
    "fit_suppression",
    "logical_error_rate",
    "pair_crossing",
    "per_round",
    "pseudo_threshold",
    "read_shots",
    "run_memory",
    "sample_shots",
    "wilson",
    "write_shots",
    "xor_prob",
]
