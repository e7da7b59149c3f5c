import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shuttlebus.metrics import ArchParams
from shuttlebus.noise_model import (
    DEPOLARIZE1,
    DEPOLARIZE2,
    PAULI_Z,
    NoiseEvent,
    NoiseParams,
    build_noise_timeline,
    dephasing_prob,
    dump_config,
    layout_cycle_time,
    load_config,
    shuttle_dephasing_prob,
    shuttle_t2,
    timeline_duration,
)
from shuttlebus.synthesis import insert_idle_dots, zigzag

INF = math.inf
ARCH = ArchParams()
times = st.floats(0, 1e-3, allow_nan=False)
t2s = st.floats(1e-9, 1e-1, allow_nan=False)


def _mp_prob(t, T2):
    mpmath.mp.dps = 40
    return (1 - mpmath.exp(-mpmath.mpf(t) / (2 * mpmath.mpf(T2)))) / 2


def test_dephasing_examples():
    assert dephasing_prob(0.0, 1e-6) == 0.0
    assert dephasing_prob(1.0, INF) == 0.0
    assert dephasing_prob(2 * 1e-6 * math.log(2), 1e-6) == pytest.approx(0.25, abs=1e-15)
    with pytest.raises(ValueError):
        dephasing_prob(-1e-9, 1e-6)


@settings(max_examples=1000, deadline=None, derandomize=True)
@given(times, t2s)
def test_dephasing_matches_high_precision(t, T2):
    assert abs(dephasing_prob(t, T2) - float(_mp_prob(t, T2))) <= 1e-12
    assert 0.0 <= dephasing_prob(t, T2) <= 0.5  # saturates to 0.5 in floating point


@settings(max_examples=1000, deadline=None, derandomize=True)
@given(times, times, t2s)
def test_composition_identity(t1, t2, T2):
    lhs = 1 - 2 * dephasing_prob(t1 + t2, T2)
    rhs = (1 - 2 * dephasing_prob(t1, T2)) * (1 - 2 * dephasing_prob(t2, T2))
    assert abs(lhs - rhs) <= 1e-12


@settings(max_examples=300, deadline=None, derandomize=True)
@given(times, times, t2s)
def test_dephasing_monotone(t1, t2, T2):
    lo, hi = sorted((t1, t2))
    assert dephasing_prob(lo, T2) <= dephasing_prob(hi, T2)
    assert dephasing_prob(hi, T2) >= dephasing_prob(hi, 2 * T2)


def test_shuttle_t2_examples():
    assert shuttle_t2(10e-6, 0.0, 13e-9) == 10e-6
    assert shuttle_t2(10e-6, 39e-9, 13e-9) == pytest.approx(20e-6, rel=1e-15)
    assert shuttle_t2(10e-6, 100e-9, 13e-9) == pytest.approx(29.48e-6, abs=0.005e-6)
    with pytest.raises(ValueError):
        shuttle_t2(10e-6, -1e-9, 13e-9)


@settings(max_examples=1000, deadline=None, derandomize=True)
@given(t2s, st.floats(0, 1e-5), st.floats(1e-10, 1e-7))
def test_shuttle_t2_high_precision(T2, d_sh, l_c):
    mpmath.mp.dps = 40
    ref = mpmath.mpf(T2) * mpmath.sqrt((mpmath.mpf(d_sh) + mpmath.mpf(l_c)) / mpmath.mpf(l_c))
    got = shuttle_t2(T2, d_sh, l_c)
    assert abs(got - float(ref)) <= 1e-12 * float(ref)
    assert got >= T2


def test_shuttle_prob_composition():
    noise = NoiseParams(T2_bus=10e-6)
    mpmath.mp.dps = 40
    d = mpmath.mpf("100e-9")
    t2 = mpmath.mpf("10e-6") * mpmath.sqrt((d + mpmath.mpf("13e-9")) / mpmath.mpf("13e-9"))
    ref = (1 - mpmath.exp(-(d / mpmath.mpf("2.8")) / (2 * t2))) / 2
    assert abs(shuttle_dephasing_prob(100e-9, ARCH, noise) - float(ref)) < 1e-15
    assert shuttle_dephasing_prob(0.0, ARCH, noise) == 0.0
    assert shuttle_dephasing_prob(1e-6, ARCH, NoiseParams()) == 0.0


def test_params_validation():
    for kw in ({"p_gate": 1.5}, {"p_gate": -0.1}, {"T2_qd": 0.0}, {"T2_bus": float("nan")}, {"l_c": INF}):
        with pytest.raises(ValueError):
            NoiseParams(**kw)
    assert NoiseParams().lossless
    assert not NoiseParams(T2_qd=1e-3).lossless
    with pytest.raises(ValueError):
        NoiseEvent(PAULI_Z, (), 0.6, "idle")
    with pytest.raises(ValueError):
        NoiseEvent("Y", (), 0.1, "idle")


@pytest.fixture(scope="module")
def zz3(d3):
    code, chains, dag = d3
    return code, chains, insert_idle_dots(zigzag(code, dag), chains)


TABLE = NoiseParams(p_gate=1e-3, T2_qd=100e-6, T2_bus=10e-6)


def test_timeline_duration_matches_cycle(zz3):
    code, chains, layout = zz3
    segs = build_noise_timeline(layout, chains, ARCH, TABLE, code)
    assert timeline_duration(segs) == pytest.approx(layout_cycle_time(layout, ARCH), rel=1e-14)
    assert len(segs) == 1 + 2 * 4 + 3


def test_one_depolarize2_per_cnot(zz3):
    code, chains, layout = zz3
    segs = build_noise_timeline(layout, chains, ARCH, TABLE, code)
    ev = [e for s in segs for e in s.events]
    assert sum(e.kind == DEPOLARIZE2 for e in ev) == 24
    cx = [g for s in segs for name, g in s.gates if name == "CX"]
    assert sum(len(g) for g in cx) // 2 == 24
    assert sum(e.kind == DEPOLARIZE1 for e in ev) == 2 * 4


def test_lossless_events_zero(zz3):
    code, chains, layout = zz3
    segs = build_noise_timeline(layout, chains, ARCH, NoiseParams(), code)
    assert all(e.probability == 0.0 for s in segs for e in s.events)


def test_idle_through_slice(zz3):
    code, chains, layout = zz3
    segs = build_noise_timeline(layout, chains, ARCH, TABLE, code)
    meas = segs[-1]
    dq = code.data_qubits[0]
    (ev,) = [e for e in meas.events if e.targets == (dq,)]
    assert ev.kind == PAULI_Z and ev.provenance == "idle"
    assert ev.probability == dephasing_prob(meas.duration, TABLE.T2_qd)


def test_shuttle_events_only_on_data(zz3):
    code, chains, layout = zz3
    segs = build_noise_timeline(layout, chains, ARCH, TABLE, code)
    for s in segs:
        for e in s.events:
            if e.provenance == "shuttle":
                assert e.targets[0].is_data
                assert e.probability == shuttle_dephasing_prob(e.amount, ARCH, TABLE)


def test_config_roundtrip(tmp_path):
    arch, noise = ArchParams(v_sh=10.0), NoiseParams(p_gate=1e-3, T2_qd=INF)
    p = tmp_path / "c.ini"
    p.write_text(dump_config(arch, noise))
    assert load_config(p) == (arch, noise)
    p.write_text("[noise]\nT2_bus = 2e-6\n")
    a2, n2 = load_config(p)
    assert a2 == ArchParams() and n2.T2_bus == 2e-6
    p.write_text("[noise]\nT2 = 1\n")
    with pytest.raises(ValueError):
        load_config(p)
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "missing.ini")
