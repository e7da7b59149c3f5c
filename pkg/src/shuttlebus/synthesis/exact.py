"""Certified minimiser of the time/distance placement objective.

Depth-first branch-and-bound that fills bus positions left to right, always
choosing a qubit whose DAG predecessors are already placed. At each node:

* lower bounds: every open hop (source placed, target not) is at least as long
  as the target's earliest free position allows; per-chain spans likewise;
* the incumbent turns the time budget into per-shuttle caps, which give each
  unplaced qubit a latest admissible position; a Hall-type count over those
  deadlines rejects infeasible nodes early and forces urgent qubits;
* states with the same placed set, shuttle maxima and open-hop sources are
  merged, keeping the one with the smaller accumulated distance.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

from ..chain_graph import Chain, build_chain_dag, kahn_toposort
from ..code_model import QubitId
from ..metrics import NUM_SHUTTLES
from .bounds import CapFilter

INF = 1 << 30


@dataclass(frozen=True)
class ObjectiveWeights:
    T: float = 1000.0
    D: float = 1.0
    # minimise sum(t) first, then distance; T and D only scale the reported value
    lexicographic: bool = True

    def __post_init__(self):
        if self.T < 0 or self.D < 0 or (self.T == 0 and self.D == 0):
            raise ValueError("weights must be nonnegative and not both zero")

    def value(self, sum_t: int, dist: int) -> float:
        return self.T * sum_t + self.D * dist

    def key(self, sum_t: int, dist: int):
        if self.lexicographic:
            return (sum_t, dist)
        return (self.value(sum_t, dist),)


class _Timeout(Exception):
    pass


@dataclass
class SearchStats:
    nodes: int = 0
    pruned_bound: int = 0
    pruned_deadline: int = 0
    pruned_memo: int = 0
    improvements: int = 0
    caps_checked: int = 0
    elapsed: float = 0.0
    timed_out: bool = False


def _popcount(x: int) -> int:
    return bin(x).count("1")


class BranchAndBound:
    def __init__(self, chains: Sequence[Chain], weights: ObjectiveWeights | None = None,
                 budget: float | None = None, memo_limit: int = 2_000_000):
        self.chains = list(chains)
        self.weights = weights or ObjectiveWeights()
        self.budget = budget
        self.memo_limit = memo_limit
        dag = build_chain_dag(self.chains)
        order = kahn_toposort(dag)
        self.nodes: list[QubitId] = order  # index = topological rank
        ix = self.ix = {q: i for i, q in enumerate(order)}
        n = self.n = len(order)

        self.pred_mask = [0] * n
        self.succ = [[] for _ in range(n)]
        for u in order:
            for v in dag.succ[u]:
                self.pred_mask[ix[v]] |= 1 << ix[u]
                self.succ[ix[u]].append(ix[v])
        self.anc = [0] * n
        for i in range(n):
            m = 0
            for j in range(i):
                if self.pred_mask[i] >> j & 1:
                    m |= (1 << j) | self.anc[j]
            self.anc[i] = m
        self.desc = [0] * n
        for i in reversed(range(n)):
            m = 0
            for j in self.succ[i]:
                m |= (1 << j) | self.desc[j]
            self.desc[i] = m

        lags = set()
        self.spans = []  # (data, last) per chain
        for c in self.chains:
            prev = ix[c.data]
            for s, a in c.active_slices():
                lags.add((prev, ix[a], s - 1))
                prev = ix[a]
            lags.add((ix[c.data], ix[c.last], NUM_SHUTTLES - 1))
            self.spans.append((ix[c.data], ix[c.last]))
        self.lags = sorted(lags)
        self.in_lags = [[] for _ in range(n)]
        self.out_lags = [[] for _ in range(n)]
        for u, v, s in self.lags:
            self.in_lags[v].append((u, s))
            self.out_lags[u].append((v, s))
        self.between = {(u, v): self.desc[u] & self.anc[v] for u, v, _ in self.lags}
        self.between.update({(u, v): self.desc[u] & self.anc[v] for u in range(n) for v in self.succ[u]})
        # accumulated distance contribution of a qubit placed at p is coef * p
        self.coef = [0] * n
        for d, last in self.spans:
            self.coef[last] += 2
            self.coef[d] -= 2
        self.is_data = [q.is_data for q in order]
        self.fixed_caps: list[int] | None = None
        self.time_floor = 0  # proven lower bound on sum(t)

    # -- evaluation -----------------------------------------------------------
    def evaluate(self, pos: Sequence[int]) -> tuple[list[int], int]:
        t = [0] * NUM_SHUTTLES
        for u, v, s in self.lags:
            t[s] = max(t[s], pos[v] - pos[u])
        dist = sum(2 * (pos[last] - pos[d]) for d, last in self.spans)
        return t, dist

    def _key(self, sum_t, dist):
        return self.weights.key(sum_t, dist)

    def _time_budget(self, best_key, dist_lb) -> float:
        w = self.weights
        if best_key is None:
            return INF
        if w.lexicographic:
            return best_key[0]
        if w.T == 0:
            return INF
        return (best_key[0] - w.D * dist_lb) / w.T

    def _caps(self, sum_lb, t_lb, dist_lb):
        if self.fixed_caps is not None:
            return self.fixed_caps
        budget = self._time_budget(self.best_key, dist_lb)
        if budget >= INF:
            return None
        return [budget - (sum_lb - t_lb[s]) for s in range(NUM_SHUTTLES)]

    # -- search ---------------------------------------------------------------
    def solve(self, incumbents: Sequence[dict] = ()) -> tuple[dict, bool, SearchStats]:
        """Return (placement, certified, stats)."""
        self.stats = SearchStats()
        self.best_pos = None
        self.best_key = None
        for inc in incumbents:
            p = [inc[q] for q in self.nodes]
            t, dist = self.evaluate(p)
            k = self._key(sum(t), dist)
            if self.best_key is None or k < self.best_key or (k == self.best_key and p < self.best_pos):
                self.best_key, self.best_pos = k, p
        self.start = time.monotonic()
        try:
            if self.weights.lexicographic and self.best_key is not None:
                self._solve_by_caps()
            else:
                self._search()
            certified = True
        except _Timeout:
            certified = False
            self.stats.timed_out = True
        self.stats.elapsed = time.monotonic() - self.start
        if self.best_pos is None:
            raise RuntimeError("no feasible placement found")
        return {q: self.best_pos[i] for i, q in enumerate(self.nodes)}, certified, self.stats

    def _search(self, caps=None) -> None:
        self.fixed_caps = None if caps is None else list(caps)
        self.memo = {}
        self.pos = [-1] * self.n
        self.t_cur = [0] * NUM_SHUTTLES
        self._dfs(0, 0, 0)

    def _solve_by_caps(self) -> None:
        """Lexicographic solve: settle sum(t) by refuting cap vectors, then minimise distance.

        Every cap vector of total ``best - 1`` that the filter cannot refute is
        searched exhaustively; if none admits a placement the incumbent's
        sum(t) is optimal. The distance is then minimised separately under
        each unrefuted vector of that total.
        """
        filt = CapFilter(self)
        deadline = None if self.budget is None else self.start + self.budget
        try:
            while True:
                target = self.best_key[0]
                if target == 0:
                    break
                for caps, _ in filt.survivors(target - 1, deadline):
                    self._search(caps)
                if self.best_key[0] == target:
                    break
            self.time_floor = self.best_key[0]
            for caps, dist_lb in filt.survivors(self.time_floor, deadline):
                if (self.time_floor, dist_lb) < self.best_key:
                    self._search(caps)
        except TimeoutError as exc:
            raise _Timeout from exc
        finally:
            self.stats.caps_checked = filt.checked
            self.fixed_caps = None

    def _dfs(self, k: int, placed: int, acc: int) -> None:
        st = self.stats
        st.nodes += 1
        if self.budget is not None and st.nodes % 512 == 0:
            if time.monotonic() - self.start > self.budget:
                raise _Timeout
        n = self.n
        pos = self.pos
        if k == n:
            t, dist = self.evaluate(pos)
            key = self._key(sum(t), dist)
            if self.best_key is None or key < self.best_key:
                self.best_key, self.best_pos = key, list(pos)
                st.improvements += 1
            return

        unplaced = ((1 << n) - 1) & ~placed
        release = [0] * n
        for v in range(n):
            if unplaced >> v & 1:
                release[v] = k + _popcount(self.anc[v] & unplaced)

        t_lb = list(self.t_cur)
        open_src = []
        for u, v, s in self.lags:
            if not unplaced >> v & 1:
                continue
            if pos[u] >= 0:
                lb = release[v] - pos[u]
                open_src.append(u)
            else:
                lb = 1 + _popcount(self.between[(u, v)])
            if lb > t_lb[s]:
                t_lb[s] = lb
        dist_lb = 0
        for d, last in self.spans:
            if pos[last] >= 0:
                dist_lb += 2 * (pos[last] - pos[d])
            elif pos[d] >= 0:
                dist_lb += 2 * (release[last] - pos[d])
            else:
                dist_lb += 2 * (1 + _popcount(self.between.get((d, last), 0) or (self.desc[d] & self.anc[last])))
        sum_lb = sum(t_lb)
        if self.best_key is not None and self._key(max(sum_lb, self.time_floor), dist_lb) >= self.best_key:
            st.pruned_bound += 1
            return

        # memo on (placed set, shuttle maxima, open-hop sources)
        sig = (placed, tuple(self.t_cur), tuple(sorted((u, pos[u]) for u in set(open_src))))
        prev = self.memo.get(sig)
        if prev is not None and prev <= acc:
            st.pruned_memo += 1
            return
        if len(self.memo) < self.memo_limit or prev is not None:
            self.memo[sig] = acc

        # deadlines implied by the shuttle caps
        caps = self._caps(sum_lb, t_lb, dist_lb)
        dl = [n - 1] * n
        if caps is not None:
            for v in range(n):  # topological order
                if not unplaced >> v & 1:
                    continue
                best = dl[v]
                for u, s in self.in_lags[v]:
                    src = pos[u] if pos[u] >= 0 else dl[u]
                    c = src + caps[s]
                    if c < best:
                        best = c
                dl[v] = int(best) if best < n - 1 else n - 1
            for u in reversed(range(n)):
                if not unplaced >> u & 1:
                    continue
                for v in self.succ[u]:
                    c = dl[v] - 1 - _popcount(self.between[(u, v)] & unplaced)
                    if c < dl[u]:
                        dl[u] = c
            for v in range(n):
                if unplaced >> v & 1 and dl[v] < release[v]:
                    st.pruned_deadline += 1
                    return
            ds = sorted(dl[v] for v in range(n) if unplaced >> v & 1)
            for i, dv in enumerate(ds):
                if k + i > dv:
                    st.pruned_deadline += 1
                    return

        ready = [v for v in range(n) if unplaced >> v & 1 and self.pred_mask[v] & placed == self.pred_mask[v]]
        urgent = [v for v in ready if dl[v] <= k]
        if urgent:
            ready = urgent
        # earliest deadline first, ancillas before data on ties
        ready.sort(key=lambda v: (dl[v], self.is_data[v], v))
        saved = list(self.t_cur)
        for v in ready:
            pos[v] = k
            for u, s in self.in_lags[v]:
                gap = k - pos[u]
                if gap > self.t_cur[s]:
                    self.t_cur[s] = gap
            self._dfs(k + 1, placed | (1 << v), acc + self.coef[v] * k)
            pos[v] = -1
            self.t_cur[:] = saved
