import numpy as np
import pytest

from shuttlebus.chain_graph import Chain, build_chain_dag, chains_for
from shuttlebus.code_model import Kind, QubitId, code_for, data
from shuttlebus.metrics import (
    SCALING_COLUMNS,
    ArchParams,
    cycle_time,
    hop_lengths,
    report,
    rows_to_csv,
    scaling_sweep,
    slice_times,
    total_shuttle_distance,
)
from shuttlebus.synthesis import naive_topological, zigzag

A = QubitId(Kind.ANCILLA_X, 1)
B = QubitId(Kind.ANCILLA_X, 2)
ARCH = ArchParams()


def _layouts(d):
    code = code_for(d)
    chains = chains_for(code)
    dag = build_chain_dag(chains)
    return chains, naive_topological(dag), zigzag(code, dag)


def test_single_chain():
    c = Chain(data(1), (A, None, None, None))
    assert total_shuttle_distance({data(1): 0, A: 1}, [c]) == 2
    c2 = Chain(data(1), (A, B, None, None))
    assert slice_times({data(1): 0, A: 1, B: 2}, [c2]) == (1, 1, 0, 0, 2)


@pytest.mark.parametrize("d", [3, 5, 7])
def test_hops_telescope(d):
    chains, naive, zz = _layouts(d)
    for pos in (naive, zz):
        # every hop moves rightward except the return, which cancels them
        total = sum(abs(k) for c in chains for _, k in hop_lengths(pos, c))
        assert total == total_shuttle_distance(pos, chains)
        assert sum(slice_times(pos, chains)) <= total


@pytest.mark.parametrize("d", range(3, 16, 2))
def test_zigzag_beats_naive(d):
    chains, naive, zz = _layouts(d)
    assert total_shuttle_distance(zz, chains) <= total_shuttle_distance(naive, chains)
    assert sum(slice_times(zz, chains)) < sum(slice_times(naive, chains))


def test_t5_is_max_span(d3):
    _, chains, dag = d3
    pos = naive_topological(dag)
    assert slice_times(pos, chains)[4] == max(pos[c.last] - pos[c.data] for c in chains)


def test_zero_shuttle_cycle():
    assert cycle_time((0, 0, 0, 0, 0), ARCH) == pytest.approx(900e-9, abs=1e-15)
    with pytest.raises(ValueError):
        cycle_time((0, 0, 0), ARCH)


def test_cycle_time_hand_timeline(d3):
    code, chains, dag = d3
    t = slice_times(zigzag(code, dag), chains)
    step = ARCH.d_qu / ARCH.v_sh
    steps = [ARCH.t_1q]
    for i in range(4):
        steps += [t[i] * step, ARCH.t_2q]
    steps += [t[4] * step, ARCH.t_1q, ARCH.t_meas]
    assert cycle_time(t, ARCH) == pytest.approx(sum(steps), rel=1e-14)


def test_cycle_time_monotone():
    t = (1, 7, 2, 5, 9)
    fast = ArchParams(v_sh=5.6)
    assert cycle_time(t, fast) < cycle_time(t, ARCH)
    assert cycle_time(t, ArchParams(d_qu=200e-9)) > cycle_time(t, ARCH)
    assert cycle_time((0,) * 5, fast) == cycle_time((0,) * 5, ARCH)


def test_arch_validation():
    for bad in (0.0, -1.0, float("inf"), float("nan")):
        with pytest.raises(ValueError):
            ArchParams(v_sh=bad)


def test_report(d3):
    code, chains, dag = d3
    rep = report(zigzag(code, dag), chains, ARCH)
    assert rep.total_distance_m == pytest.approx(rep.total_distance_dots * ARCH.d_qu)
    assert rep.cycle_time_s >= rep.shuttle_time_s
    assert rep.sum_t == 24 and rep.total_distance_dots == 124
    assert sum(rep.per_data_distance.values()) == 124


def _quad_fit(rows):
    d = np.array([r["d"] for r in rows], float)
    y = np.array([r["sum_t"] for r in rows], float)
    a, b, c = np.polyfit(d, y, 2)
    return a, b


def test_scaling_sweep_shapes():
    ds = list(range(3, 16, 2))
    zz = scaling_sweep(ds, "zigzag")
    nv = scaling_sweep(ds, "naive")
    assert [r["extra_dots"] for r in zz] == [2] * len(ds)
    assert nv[0]["extra_dots"] == 5
    a, b = _quad_fit(zz)
    assert abs(a) * 15 ** 2 < 0.05 * abs(b) * 15
    a, b = _quad_fit(nv)
    assert a * 15 ** 2 > abs(b) * 15
    assert scaling_sweep(ds, "zigzag") == zz


def test_csv():
    rows = scaling_sweep([3], "zigzag")
    text = rows_to_csv(rows, SCALING_COLUMNS, header="strategy = zigzag")
    lines = text.splitlines()
    assert lines[0] == "# strategy = zigzag"
    assert lines[1].split(",") == list(SCALING_COLUMNS)
    assert lines[2].startswith("3,zigzag,Heuristic,24,1,7,2,5,9,124,2,")
