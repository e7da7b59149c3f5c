import itertools

import numba
import numpy as np
import pytest

from shuttlebus.chain_graph import Chain, build_chain_dag, chains_for, chains_from_sequences
from shuttlebus.code_model import Kind, QubitId, build_steane_code, code_for, data
from shuttlebus.metrics import slice_times, total_shuttle_distance
from shuttlebus.synthesis import (
    BudgetExceeded,
    ObjectiveWeights,
    check_occupancy,
    dump_placement,
    evaluate,
    insert_idle_dots,
    load_placement,
    naive_topological,
    optimal,
    synthesize,
    verify_placement,
    zigzag,
)
from shuttlebus.synthesis.bounds import CapFilter
from shuttlebus.synthesis.exact import BranchAndBound
from shuttlebus.synthesis.idle_dots import bus_slice_times, bus_tracks
from shuttlebus.synthesis.placement import place_in_data_order, zigzag_data_order

A = QubitId(Kind.ANCILLA_X, 1)
B = QubitId(Kind.ANCILLA_X, 2)


def test_naive_d3(d3):
    _, chains, dag = d3
    pos = naive_topological(dag)
    assert sorted(pos.values()) == list(range(17))
    assert {q for q, p in pos.items() if p < 9} == {data(i) for i in range(1, 10)}
    assert verify_placement(pos, chains) == []


def test_naive_path():
    dag = build_chain_dag([Chain(data(1), (A, B, None, None))])
    assert naive_topological(dag) == {data(1): 0, A: 1, B: 2}


@pytest.mark.parametrize("d", [3, 5, 7, 9])
def test_placements_valid(d):
    code = code_for(d)
    chains = chains_for(code)
    dag = build_chain_dag(chains)
    for pos in (naive_topological(dag), zigzag(code, dag)):
        assert verify_placement(pos, chains) == []


def test_zigzag_starts_top_left(d3):
    code, _, dag = d3
    pos = zigzag(code, dag)
    assert min(pos, key=pos.get) == data(1)
    assert zigzag_data_order(3)[:3] == [data(1), data(2), data(4)]


def test_zigzag_requires_surface_code():
    code = build_steane_code()
    with pytest.raises(ValueError):
        zigzag(code, build_chain_dag(chains_for(code)))


def test_boustrophedon_orders_are_worse(d3):
    # row and column traversals of the grid miss the optimum that the
    # anti-diagonal traversal reaches
    code, chains, dag = d3
    row = [data(r * 3 + (c if r % 2 == 0 else 2 - c) + 1) for r in range(3) for c in range(3)]
    col = [data((r if c % 2 == 0 else 2 - r) * 3 + c + 1) for c in range(3) for r in range(3)]
    best = sum(slice_times(zigzag(code, dag), chains))
    for order in (row, col):
        assert sum(slice_times(place_in_data_order(dag, order), chains)) > best


def test_verify_detects_swap(d3):
    code, chains, dag = d3
    pos = zigzag(code, dag)
    c = next(c for c in chains if len(c.ancillas) == 4)
    u, v = c.sequence[1], c.sequence[2]
    bad = dict(pos)
    bad[u], bad[v] = pos[v], pos[u]
    assert verify_placement(bad, chains)
    assert verify_placement({}, []) == []


def test_objective_weights():
    with pytest.raises(ValueError):
        ObjectiveWeights(0, 0)
    with pytest.raises(ValueError):
        ObjectiveWeights(-1, 1)
    w = ObjectiveWeights(1000, 1)
    assert w.value(24, 124) == 24124
    assert w.key(24, 124) == (24, 124)


def test_result_objective_recomputes(d3):
    code, chains, dag = d3
    res = evaluate(zigzag(code, dag), chains)
    assert res.objective == 1000 * sum(res.slice_times) + res.total_distance
    assert res.slice_times == slice_times(res.placement, chains)
    assert res.total_distance == total_shuttle_distance(res.placement, chains)


def test_exact_d3_matches_zigzag():
    opt = synthesize(3, "optimal", budget=120)
    zz = synthesize(3, "zigzag")
    assert opt.optimality == "Certified"
    assert (opt.sum_t, opt.total_distance) == (zz.sum_t, zz.total_distance) == (24, 124)
    assert verify_placement(opt.placement, opt.chains) == []


def test_exact_steane():
    res = synthesize("steane", "optimal", budget=120)
    assert res.optimality == "Certified"
    assert verify_placement(res.placement, res.chains) == []
    naive = synthesize("steane", "naive")
    assert (res.sum_t, res.total_distance) <= (naive.sum_t, naive.total_distance)


def test_two_disjoint_chains_distance_only():
    chains = chains_from_sequences([[data(1), A], [data(2), B]])
    res = optimal(chains, ObjectiveWeights(0, 1, lexicographic=False))
    assert res.optimality == "Certified"
    assert res.total_distance == 4
    # brute force over all orderings
    qs = [data(1), A, data(2), B]
    best = min(total_shuttle_distance(dict(zip(p, range(4))), chains)
               for p in itertools.permutations(qs) if not verify_placement(dict(zip(p, range(4))), chains))
    assert best == 4


def test_weighted_objective_steane():
    chains = chains_for(build_steane_code())
    lex = optimal(chains, ObjectiveWeights(1000, 1))
    wtd = optimal(chains, ObjectiveWeights(1000, 1, lexicographic=False))
    assert wtd.optimality == "Certified"
    assert wtd.objective == lex.objective


def test_budget_exceeded_carries_incumbent():
    with pytest.raises(BudgetExceeded) as exc:
        synthesize(9, "optimal", budget=0.5, strict=True)
    inc = exc.value.incumbent
    assert inc.optimality == "Heuristic"
    assert verify_placement(inc.placement, inc.chains) == []
    # without strict the heuristic is reported above the exact limit
    assert synthesize(9, "optimal").optimality == "Heuristic"


def test_unknown_strategy():
    with pytest.raises(ValueError):
        synthesize(3, "random")


# -- exhaustive oracle for d=3 -------------------------------------------------

@numba.njit(cache=True)
def _enumerate_best(n, pred_mask, lu, lv, ls, span_d, span_l):
    """Lexicographic (sum t, distance) minimum over every linear extension."""
    pos = -np.ones(n, np.int64)
    order = np.zeros(n, np.int64)
    nxt = np.zeros(n + 1, np.int64)
    best_t = 1 << 40
    best_d = 1 << 40
    count = 0
    k = 0
    placed = 0
    nxt[0] = 0
    while k >= 0:
        if k == n:
            count += 1
            t = np.zeros(5, np.int64)
            for i in range(len(lu)):
                g = pos[lv[i]] - pos[lu[i]]
                if g > t[ls[i]]:
                    t[ls[i]] = g
            st = t.sum()
            dist = 0
            for i in range(len(span_d)):
                dist += 2 * (pos[span_l[i]] - pos[span_d[i]])
            if st < best_t or (st == best_t and dist < best_d):
                best_t = st
                best_d = dist
            k -= 1
            v = order[k]
            placed &= ~(1 << v)
            pos[v] = -1
            continue
        found = False
        v = nxt[k]
        while v < n:
            if not (placed >> v) & 1 and (pred_mask[v] & placed) == pred_mask[v]:
                found = True
                break
            v += 1
        if found:
            order[k] = v
            pos[v] = k
            placed |= 1 << v
            nxt[k] = v + 1
            k += 1
            nxt[k] = 0
        else:
            k -= 1
            if k >= 0:
                u = order[k]
                placed &= ~(1 << u)
                pos[u] = -1
    return best_t, best_d, count


def test_exhaustive_enumeration_d3(d3):
    _, chains, _ = d3
    bb = BranchAndBound(chains)
    lags = np.array(bb.lags, dtype=np.int64)
    spans = np.array(bb.spans, dtype=np.int64)
    best_t, best_d, count = _enumerate_best(bb.n, np.array(bb.pred_mask, dtype=np.int64), lags[:, 0], lags[:, 1],
                                            lags[:, 2], spans[:, 0], spans[:, 1])
    assert count == 16934400
    res = synthesize(3, "optimal", budget=120)
    assert (best_t, best_d) == (res.sum_t, res.total_distance)


# -- cap filter ---------------------------------------------------------------

@pytest.mark.parametrize("d", [3, 5])
def test_cap_filter_keeps_feasible_vectors(d):
    res = synthesize(d, "zigzag")
    filt = CapFilter(BranchAndBound(res.chains))
    caps = res.slice_times
    assert not filt.refutes(caps)
    assert filt.distance_bound(caps) <= res.total_distance
    loose = tuple(c + 3 for c in caps)
    assert not filt.refutes(loose)


def test_cap_filter_monotone(d3):
    _, chains, _ = d3
    filt = CapFilter(BranchAndBound(chains))
    rng = np.random.default_rng(5)
    for _ in range(200):
        c = rng.integers(1, 12, size=5)
        hi = c + rng.integers(0, 3, size=5)
        if filt.refutes(hi):
            assert filt.refutes(c)


def test_cap_filter_refutes_smaller_totals(d3):
    _, chains, _ = d3
    filt = CapFilter(BranchAndBound(chains))
    assert list(filt.vectors(23)) == [] or filt.survivors(23) == []
    assert (1, 7, 2, 5, 9) in [v for v, _ in filt.survivors(24)]


# -- idle dots ------------------------------------------------------------------

def test_extra_dots_d3(d3):
    code, chains, dag = d3
    assert len(insert_idle_dots(naive_topological(dag), chains).idle_dots) == 5
    assert len(insert_idle_dots(zigzag(code, dag), chains).idle_dots) == 2


@pytest.mark.parametrize("d", [3, 5, 7, 9, 11, 13, 15])
def test_zigzag_two_extra_dots(d):
    code = code_for(d)
    chains = chains_for(code)
    layout = insert_idle_dots(zigzag(code, build_chain_dag(chains)), chains)
    assert len(layout.idle_dots) == 2
    assert check_occupancy(layout, chains) == []


@pytest.mark.parametrize("d", [3, 5, 7])
def test_naive_occupancy(d):
    chains = chains_for(code_for(d))
    layout = insert_idle_dots(naive_topological(build_chain_dag(chains)), chains)
    assert check_occupancy(layout, chains) == []


def test_tracks_move_rightward(d3):
    code, chains, dag = d3
    layout = insert_idle_dots(zigzag(code, dag), chains)
    for q, tr in bus_tracks(layout).items():
        assert list(tr) == sorted(tr)
    assert bus_slice_times(layout) == (1, 7, 2, 5, 9)


def test_placement_roundtrip(tmp_path, d3):
    code, _, dag = d3
    pos = zigzag(code, dag)
    p = tmp_path / "layout.json"
    p.write_text(dump_placement(pos, {"d": 3}))
    again, meta = load_placement(p)
    assert again == pos and meta == {"d": 3}
    with pytest.raises(ValueError):
        load_placement('{"placement": {"D1": 0, "D2": 2}}')
