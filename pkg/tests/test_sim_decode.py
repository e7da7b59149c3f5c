import math

import numpy as np
import pymatching
import pytest
import stim

from shuttlebus.circuit_gen import Circuit, circuit_for, emit_circuit_text, memory_experiment, build_memory_circuit
from shuttlebus.noise_model import NoiseParams
from shuttlebus.sim_decode import (
    NoCrossing,
    Program,
    UnionFindDecoder,
    derive_detector_model,
    extrapolate,
    fit_suppression,
    logical_error_rate,
    pair_crossing,
    per_round,
    pseudo_threshold,
    read_shots,
    run_memory,
    sample_shots,
    wilson,
    write_shots,
    xor_prob,
)
from shuttlebus.sim_decode.dem import NonCliffordInstruction
from shuttlebus.sim_decode.decoder import MatchingGraph
from shuttlebus.sim_decode.dem import DetectorErrorModel, Fault, NonGraphlikeModel

ALL_ON = NoiseParams(p_gate=1e-3, T2_qd=100e-6, T2_bus=10e-6)


def _stim_faults(text):
    out = {}
    for ins in stim.Circuit(text).detector_error_model(decompose_errors=False, flatten_loops=True):
        if ins.type != "error":
            continue
        ts = ins.targets_copy()
        key = (tuple(sorted(t.val for t in ts if t.is_relative_detector_id())),
               sum(1 << t.val for t in ts if t.is_logical_observable_id()))
        out[key] = xor_prob(out.get(key, 0.0), ins.args_copy()[0])
    return out


@pytest.mark.parametrize("basis", ["Z", "X"])
@pytest.mark.parametrize("d", [3, 5])
def test_detector_model_matches_stim(d, basis):
    circ = circuit_for(d, basis=basis, rounds=2, noise=ALL_ON)
    ours = {(tuple(sorted(f.detectors)), f.observables): f.probability
            for f in derive_detector_model(circ, decompose=False).faults}
    ref = _stim_faults(emit_circuit_text(circ))
    assert set(ours) == set(ref)
    for k, p in ref.items():
        # stim reads probabilities rounded to nine significant digits
        assert ours[k] == pytest.approx(p, rel=1e-8)


def test_xor_prob():
    assert xor_prob(0.1, 0.1) == pytest.approx(0.18, abs=1e-15)
    assert xor_prob(0.0, 0.3) == 0.3


def test_zero_probability_excluded():
    c = Circuit()
    c.append("RX", (0,))
    c.append("Z_ERROR", (0,), (0.0,))
    c.append("MX", (0,))
    c.append("DETECTOR", (-1,))
    assert len(derive_detector_model(c)) == 0
    c.instructions[1] = c.instructions[1]._replace(args=(0.1,))
    (f,) = derive_detector_model(c).faults
    assert f.detectors == (0,) and f.probability == pytest.approx(0.1)


def test_non_clifford_rejected():
    c = Circuit()
    c.append("R", (0,))
    c.append("T", (0,))
    with pytest.raises(NonCliffordInstruction):
        derive_detector_model(c)


def _mid_round_z(d=3, q_index=4, p=1.0):
    """X-basis memory with one Z error on a data qubit between rounds 1 and 2."""
    exp = memory_experiment(d, basis="X", rounds=2)
    circ = build_memory_circuit(exp)
    dq = exp.code.data_qubits[q_index]
    first_det = next(i for i, ins in enumerate(circ.instructions) if ins.name == "DETECTOR")
    k = first_det
    while circ.instructions[k].name == "DETECTOR":
        k += 1
    circ.instructions.insert(k, circ.instructions[0]._replace(name="Z_ERROR", targets=(exp.layout.bus_position(dq),),
                                                              args=(p,)))
    # expected: round-2 detectors of the X checks that contain dq
    coords = exp.code.coords
    want_coords = {coords[c.ancilla] for c in exp.code.checks if c.basis == "X" and dq in c.support}
    dets = [ins for ins in circ.instructions if ins.name == "DETECTOR"]
    want = tuple(i for i, ins in enumerate(dets) if ins.args[2] == 1 and (ins.args[1], ins.args[0]) in want_coords)
    return circ, want


@pytest.mark.parametrize("q_index", [0, 1, 4])
def test_single_z_signature(q_index):
    circ, want = _mid_round_z(q_index=q_index, p=0.2)
    assert len(want) in (1, 2)
    (f,) = derive_detector_model(circ).faults
    assert tuple(sorted(f.detectors)) == want


def test_forced_event_every_shot():
    circ, want = _mid_round_z(p=1.0)
    bits = sample_shots(circ, 1000, seed=4).detector_bits()
    expect = np.zeros(bits.shape[1], dtype=bool)
    expect[list(want)] = True
    assert (bits == expect).all()


def test_noiseless_zero_events():
    b = sample_shots(circuit_for(3), 10_000, seed=9)
    assert not b.detector_bits().any() and not b.observable_bits().any()


def test_sampler_determinism_and_partition():
    prog = Program(circuit_for(3, rounds=3, noise=ALL_ON))
    a = sample_shots(prog, 3 * 1024, seed=11, batch_size=1024)
    b = sample_shots(prog, 3 * 1024, seed=11, batch_size=1024)
    assert (a.detectors == b.detectors).all() and (a.observables == b.observables).all()
    parts = [sample_shots(prog, 1024, seed=11, batch_size=1024, first_batch=k) for k in range(3)]
    joined = np.concatenate([p.detector_bits() for p in parts])
    assert (joined == a.detector_bits()).all()
    c = sample_shots(prog, 3 * 1024, seed=12, batch_size=1024)
    assert (c.detectors != a.detectors).any()
    with pytest.raises(ValueError):
        sample_shots(prog, 0)


def test_sampler_marginals_match_model():
    circ = circuit_for(3, rounds=1, noise=NoiseParams(p_gate=0.01, T2_qd=20e-6, T2_bus=2e-6))
    dem = derive_detector_model(circ, decompose=False)
    n = 100_000
    b = sample_shots(circ, n, seed=21)
    emp = np.concatenate([b.detector_bits(), b.observable_bits()], axis=1).mean(axis=0)
    # exact marginal of each detector and the observable under independent faults
    keep = np.ones(dem.num_detectors + dem.num_observables)
    for f in dem.faults:
        for k in f.detectors:
            keep[k] *= 1 - 2 * f.probability
        for k in range(dem.num_observables):
            if f.observables >> k & 1:
                keep[dem.num_detectors + k] *= 1 - 2 * f.probability
    pred = (1 - keep) / 2
    sigma = np.sqrt(pred * (1 - pred) / n)
    assert (np.abs(emp - pred) <= 3 * sigma).all()


def test_decoder_zero_syndrome():
    dec = UnionFindDecoder(derive_detector_model(circuit_for(3, noise=ALL_ON)))
    assert dec.decode(np.zeros(dec.graph.num_detectors, dtype=bool)) == 0
    with pytest.raises(ValueError):
        dec.decode_packed(np.zeros((3, 1), dtype=np.uint64), 1)


@pytest.mark.parametrize("basis", ["Z", "X"])
@pytest.mark.parametrize("d", [3, 5])
def test_all_single_faults_corrected(d, basis):
    dem = derive_detector_model(circuit_for(d, basis=basis, noise=ALL_ON))
    dec = UnionFindDecoder(dem)
    n = len(dem.faults)
    packed = np.zeros((dem.num_detectors, -(-n // 64)), dtype=np.uint64)
    for i, f in enumerate(dem.faults):
        for k in f.detectors:
            packed[k, i // 64] ^= np.uint64(1) << np.uint64(i % 64)
    pred = dec.decode_packed(packed, n)
    assert (pred == np.array([f.observables for f in dem.faults])).all()


def test_non_graphlike_rejected():
    dem = DetectorErrorModel([Fault(0.1, (0, 1, 2), 0)], 3, 1)
    with pytest.raises(NonGraphlikeModel):
        MatchingGraph(dem)


@pytest.mark.parametrize("d", [3, 5])
def test_union_find_close_to_matching(d):
    circ = circuit_for(d, noise=NoiseParams(p_gate=0.005))
    b = sample_shots(circ, 20_000, seed=3)
    obs = b.observable_bits()[:, 0]
    uf = UnionFindDecoder(derive_detector_model(circ)).decode_packed(b.detectors, b.n_shots)
    dem = stim.Circuit(emit_circuit_text(circ)).detector_error_model(decompose_errors=True)
    mw = pymatching.Matching.from_detector_error_model(dem).decode_batch(b.detector_bits())[:, 0]
    n_uf, n_mw = int((uf != obs).sum()), int((mw != obs).sum())
    assert n_uf <= 1.25 * n_mw + 20


def test_per_round():
    assert per_round(0.0, 5) == 0.0
    assert per_round(0.5, 5) == 0.5
    assert per_round(0.123, 1) == pytest.approx(0.123)
    # composing the per-round channel r times gives back p_shot
    p = per_round(0.2, 9)
    assert (1 - (1 - 2 * p) ** 9) / 2 == pytest.approx(0.2)
    with pytest.raises(ValueError):
        per_round(0.1, 0)


def test_logical_error_rate():
    circ = circuit_for(3, rounds=3)
    b = sample_shots(circ, 128, seed=0)
    assert logical_error_rate(b, np.zeros(128, dtype=np.int64), 3) == (0.0, 0.0)
    p_shot, p_round = logical_error_rate(b, np.ones(128, dtype=np.int64), 3)
    assert p_shot == 1.0 and p_round == 0.5


def test_wilson():
    lo, hi = wilson(50, 100)
    assert lo < 0.5 < hi
    assert wilson(0, 0) == (0.0, 1.0)
    assert wilson(0, 100)[0] == 0.0


def test_synthetic_threshold():
    ps = np.geomspace(1e-3, 1e-1, 15)
    curves = {d: [(p, 0.03 * (p / 0.01) ** ((d + 1) / 2)) for p in ps] for d in (3, 5, 7)}
    est = pseudo_threshold(curves)
    assert est.mean == pytest.approx(0.01, rel=1e-9)
    assert est.std < 1e-12
    assert len(est.crossings) == 3 and not est.no_crossing


def test_linear_axis_crossing():
    xs = np.linspace(1e-6, 1e-4, 12)
    th = 4.2e-5
    ya = [0.01 * (th / x) for x in xs]
    yb = [0.01 * (th / x) ** 2 for x in xs]
    assert pair_crossing(xs, ya, yb, log_x=False) == pytest.approx(th, rel=0.05)


def test_no_crossing():
    ys = [0.1, 0.2, 0.3]
    with pytest.raises(NoCrossing):
        pair_crossing([1, 2, 3], ys, ys)
    with pytest.raises(NoCrossing):
        pair_crossing([1, 2, 3], ys, [2 * y for y in ys])
    est = pseudo_threshold({3: list(zip([1, 2, 3], ys)), 5: list(zip([1, 2, 3], ys))})
    assert not est.found and est.no_crossing == [(3, 5)]
    with pytest.raises(ValueError):
        pseudo_threshold({3: []})


def test_suppression_fit():
    ds = [3, 5, 7, 9]
    rates = [extrapolate(4.0, 0.1, d) for d in ds]
    lam, amp = fit_suppression(ds, rates)
    assert lam == pytest.approx(4.0) and amp == pytest.approx(0.1)
    assert extrapolate(lam, amp, 21) == pytest.approx(0.1 / 4.0 ** 11)


def test_shot_export_roundtrip(tmp_path):
    circ = circuit_for(3, rounds=2, noise=ALL_ON)
    b = sample_shots(circ, 1000, seed=5)
    path = tmp_path / "shots.b8"
    write_shots(path, b, {"d": 3})
    dets, obs, head = read_shots(path)
    assert (dets == b.detector_bits()).all() and (obs == b.observable_bits()).all()
    assert head["d"] == 3 and head["num_shots"] == 1000
    assert head["bytes_per_shot"] == math.ceil((b.detectors.shape[0] + 1) / 8)


def test_run_memory_deterministic():
    circ = circuit_for(3, noise=NoiseParams(p_gate=0.01))
    a = run_memory(circ, seed=2, target_failures=50)
    assert a == run_memory(circ, seed=2, target_failures=50)
    assert a.failures >= 50 and a.p_round_lo <= a.p_round <= a.p_round_hi


@pytest.mark.slow
def test_monotone_around_threshold():
    def rate(d, p):
        return run_memory(circuit_for(d, noise=NoiseParams(p_gate=p)), seed=1,
                          max_shots=100_000, target_failures=10 ** 9)

    lo3, lo5 = rate(3, 0.002), rate(5, 0.002)
    assert lo5.p_round_hi < lo3.p_round_lo
    hi3, hi5 = rate(3, 0.03), rate(5, 0.03)
    assert hi5.p_round_lo > hi3.p_round_hi
