"""Refutation of shuttle-time cap vectors.

A cap vector c = (c1..c5) asks for a placement whose slice-s hops are all at
most c_s. Two necessary conditions are checked, both monotone in c (shrinking
a cap can only make them fail harder):

* the difference constraints pos[v] - pos[u] <= c_s for every hop, together
  with the precedence gaps forced by the DAG and the bus ends, must have no
  negative cycle;
* around every qubit x, the qubits whose offset from x is confined to a window
  of w positions must number at most w.

Refuting every vector of total T - 1 proves that no placement has
sum(t) < T, since any smaller vector is dominated by one of them.
"""

from __future__ import annotations

import time
from typing import Iterator

import numba
import numpy as np

from ..metrics import NUM_SHUTTLES

UNREACHED = 1 << 40


def _popcount(x: int) -> int:
    return bin(x).count("1")


@numba.njit(cache=True)
def _closure(base, lu, lv, ls, caps):
    n1 = base.shape[0]
    w = base.copy()
    for i in range(len(lu)):
        c = caps[ls[i]]
        if c < w[lu[i], lv[i]]:
            w[lu[i], lv[i]] = c
    for k in range(n1):
        for i in range(n1):
            wik = w[i, k]
            if wik >= UNREACHED:
                continue
            for j in range(n1):
                x = wik + w[k, j]
                if x < w[i, j]:
                    w[i, j] = x
        if w[k, k] < 0:
            return w, False
    for i in range(n1):
        if w[i, i] < 0:
            return w, False
    return w, True


@numba.njit(cache=True)
def _crowded(w, n):
    """True when some window around a qubit (or the bus start) must hold too many qubits."""
    for x in range(n + 1):
        a = np.empty(n, np.int64)
        b = np.empty(n, np.int64)
        m = 0
        for z in range(n):
            if z != x:
                a[m] = w[z, x]  # pos[x] - pos[z] <= a
                b[m] = w[x, z]  # pos[z] - pos[x] <= b
                m += 1
        order = np.argsort(a[:m])
        for ii in range(m):
            lo = a[order[ii]]
            if ii + 1 < m and a[order[ii + 1]] == lo:
                continue
            bs = np.sort(b[order[:ii + 1]])
            for k in range(ii + 1):
                inside = 1 if (x < n and lo >= 0 and bs[k] >= 0) else 0
                if k + 1 + inside > lo + bs[k] + 1:
                    return True
    return False


class CapFilter:
    def __init__(self, bb):
        """``bb`` is a :class:`BranchAndBound`, whose index tables are reused."""
        n = self.n = bb.n
        base = np.full((n + 1, n + 1), UNREACHED, dtype=np.int64)
        np.fill_diagonal(base, 0)
        start = n  # pseudo-node pinned at position 0
        for v in range(n):
            for u in range(n):
                if bb.anc[v] >> u & 1:
                    base[v, u] = -(1 + _popcount(bb.desc[u] & bb.anc[v]))
            base[start, v] = n - 1 - _popcount(bb.desc[v])
            base[v, start] = -_popcount(bb.anc[v])
        self.base = base
        self.lu = np.array([u for u, _, _ in bb.lags], dtype=np.int64)
        self.lv = np.array([v for _, v, _ in bb.lags], dtype=np.int64)
        self.ls = np.array([s for _, _, s in bb.lags], dtype=np.int64)
        self.spans = bb.spans
        self.active = [s in set(self.ls.tolist()) for s in range(NUM_SHUTTLES)]
        self.checked = 0

    def _close(self, caps):
        self.checked += 1
        w, ok = _closure(self.base, self.lu, self.lv, self.ls, np.asarray(caps, dtype=np.int64))
        if not ok or _crowded(w, self.n):
            return None
        return w

    def refutes(self, caps) -> bool:
        return self._close(caps) is None

    def distance_bound(self, caps) -> int | None:
        """Lower bound on the total distance under ``caps``; None when refuted."""
        w = self._close(caps)
        if w is None:
            return None
        return sum(2 * max(1, -int(w[last, d])) for d, last in self.spans)

    def domains(self, total: int) -> list[range] | None:
        """Per-slice cap ranges that can occur in an unrefuted vector of sum ``total``."""
        lo = [1 if a else 0 for a in self.active]
        hi = [total if a else 0 for a in self.active]
        changed = True
        while changed:
            changed = False
            if sum(lo) > total:
                return None
            for s in range(NUM_SHUTTLES):
                if not self.active[s]:
                    continue
                hi[s] = min(hi[s], total - (sum(lo) - lo[s]))
                while lo[s] <= hi[s] and self.refutes(self._relaxed(s, lo[s], lo, hi, total)):
                    lo[s] += 1
                    changed = True
                while hi[s] >= lo[s] and self.refutes(self._relaxed(s, hi[s], lo, hi, total)):
                    hi[s] -= 1
                    changed = True
                if lo[s] > hi[s]:
                    return None
        return [range(a, b + 1) for a, b in zip(lo, hi)]

    @staticmethod
    def _relaxed(s, c, lo, hi, total):
        # the largest value every other slice can take in a vector with c at slice s
        spare = total - c - (sum(lo) - lo[s])
        return [c if j == s else min(hi[j], lo[j] + spare) for j in range(NUM_SHUTTLES)]

    def vectors(self, total: int) -> Iterator[tuple[int, ...]]:
        """Cap vectors of sum ``total`` within the reduced domains."""
        dom = self.domains(total)
        if dom is None:
            return
        mins = [r.start for r in dom]
        maxs = [r.stop - 1 for r in dom]

        def rec(s, left, acc):
            if s == NUM_SHUTTLES - 1:
                if mins[s] <= left <= maxs[s]:
                    yield tuple(acc + [left])
                return
            rest_lo = sum(mins[s + 1:])
            rest_hi = sum(maxs[s + 1:])
            for c in dom[s]:
                if rest_lo <= left - c <= rest_hi:
                    yield from rec(s + 1, left - c, acc + [c])

        yield from rec(0, total, [])

    def survivors(self, total: int, deadline: float | None = None) -> list[tuple[tuple[int, ...], int]]:
        """Unrefuted vectors of sum ``total`` with their distance bounds."""
        out = []
        for i, caps in enumerate(self.vectors(total)):
            if deadline is not None and i % 64 == 0 and time.monotonic() > deadline:
                raise TimeoutError
            lb = self.distance_bound(caps)
            if lb is not None:
                out.append((caps, lb))
        return out
