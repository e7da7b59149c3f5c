"""Weighted union-find decoder on the graphlike matching graph of a DEM.

Clusters grow from the syndrome defects along weighted edges until every
cluster has even parity or touches the boundary; a spanning forest of the
grown edges is then peeled from its leaves to produce the correction. The
kernel is compiled with numba and works directly on bit-packed shots.
"""

from __future__ import annotations

import math

import numba
import numpy as np

from .dem import DetectorErrorModel, NonGraphlikeModel, xor_prob

WEIGHT_SCALE = 16  # log-likelihood weights are rounded to multiples of 1/16


class MatchingGraph:
    """Edges between detectors; the extra node ``num_detectors`` is the boundary."""

    def __init__(self, dem: DetectorErrorModel):
        if dem.num_observables > 63:
            raise ValueError("at most 63 observables supported")
        self.num_detectors = dem.num_detectors
        self.boundary = dem.num_detectors
        edges: dict[tuple[int, int], list] = {}
        for f in dem.faults:
            for dets, obs in f.components or ((f.detectors, f.observables),):
                if len(dets) == 0:
                    continue
                if len(dets) > 2:
                    raise NonGraphlikeModel(f"fault on detectors {dets} is not graphlike")
                key = (dets[0], dets[1]) if len(dets) == 2 else (dets[0], self.boundary)
                cur = edges.get(key)
                if cur is None:
                    edges[key] = [f.probability, obs]
                elif cur[1] == obs:
                    cur[0] = xor_prob(cur[0], f.probability)
                elif f.probability > cur[0]:
                    # parallel edges with different logical effect: keep the likelier one
                    edges[key] = [f.probability, obs]
        keys = sorted(edges)
        self.u = np.array([k[0] for k in keys], dtype=np.int64)
        self.v = np.array([k[1] for k in keys], dtype=np.int64)
        self.p = np.array([edges[k][0] for k in keys], dtype=np.float64)
        self.obs = np.array([edges[k][1] for k in keys], dtype=np.int64)
        self.w = np.array([_weight(p) for p in self.p], dtype=np.int64)
        n = self.num_detectors + 1
        deg = np.bincount(np.concatenate([self.u, self.v]), minlength=n)
        self.adj_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(deg, out=self.adj_ptr[1:])
        fill = self.adj_ptr[:-1].copy()
        self.adj = np.zeros(2 * len(keys), dtype=np.int64)
        for e, (a, b) in enumerate(keys):
            self.adj[fill[a]] = e
            fill[a] += 1
            self.adj[fill[b]] = e
            fill[b] += 1

    @property
    def num_edges(self) -> int:
        return len(self.u)


def _weight(p: float) -> int:
    if p >= 0.5:
        return 1
    return max(1, int(round(WEIGHT_SCALE * math.log((1 - p) / p))))


class UnionFindDecoder:
    def __init__(self, dem: DetectorErrorModel):
        self.dem = dem
        self.graph = MatchingGraph(dem)

    def decode(self, detectors) -> int:
        """Predicted observable bitmask for one shot given its detector bits."""
        bits = np.asarray(detectors, dtype=bool)
        words = np.zeros((self.graph.num_detectors, 1), dtype=np.uint64)
        words[bits, 0] = 1
        return int(self.decode_packed(words, 1)[0])

    def decode_packed(self, packed: np.ndarray, n_shots: int) -> np.ndarray:
        """Observable bitmask per shot for ``(num_detectors, W)`` bit-packed detectors."""
        g = self.graph
        if packed.shape[0] != g.num_detectors:
            raise ValueError("detector count does not match the model")
        return _decode_batch(np.ascontiguousarray(packed, dtype=np.uint64), n_shots, g.num_detectors,
                             g.u, g.v, g.w, g.obs, g.adj_ptr, g.adj)


def decode_union_find(dem: DetectorErrorModel, detectors) -> int:
    return UnionFindDecoder(dem).decode(detectors)


@numba.njit(cache=True)
def _find(parent, x):
    r = x
    while parent[r] != r:
        r = parent[r]
    while parent[x] != r:
        nxt = parent[x]
        parent[x] = r
        x = nxt
    return r


@numba.njit(cache=True)
def _decode_batch(packed, n_shots, n_det, eu, ev, ew, eobs, adj_ptr, adj):
    n = n_det + 1
    B = n_det
    m = len(eu)
    parent = np.arange(n)
    size = np.ones(n, dtype=np.int64)
    parity = np.zeros(n, dtype=np.uint8)
    bnd = np.zeros(n, dtype=np.uint8)
    bnd[B] = 1
    head = np.arange(n)
    tail = np.arange(n)
    nxt = -np.ones(n, dtype=np.int64)
    defect = np.zeros(n, dtype=np.uint8)
    touched_flag = np.zeros(n, dtype=np.uint8)
    touched = np.zeros(n, dtype=np.int64)
    growth = np.zeros(m, dtype=np.int64)
    grown_flag = np.zeros(m, dtype=np.uint8)
    grown = np.zeros(m, dtype=np.int64)
    stamp = -np.ones(m, dtype=np.int64)
    rate = np.zeros(m, dtype=np.int64)
    elist = np.zeros(m, dtype=np.int64)
    tree = np.zeros(n, dtype=np.int64)
    deg = np.zeros(n, dtype=np.int64)
    incx = np.zeros(n, dtype=np.int64)
    roots = np.zeros(n, dtype=np.int64)
    stack = np.zeros(n, dtype=np.int64)
    out = np.zeros(n_shots, dtype=np.int64)
    clock = 0

    for s in range(n_shots):
        word = s >> 6
        bit = np.uint64(1) << np.uint64(s & 63)
        nt = 0
        nroots = 0
        for k in range(n_det):
            if packed[k, word] & bit:
                defect[k] = 1
                parity[k] = 1
                touched_flag[k] = 1
                touched[nt] = k
                nt += 1
                roots[nroots] = k
                nroots += 1
        if nroots == 0:
            continue
        ng = 0
        ntree = 0
        while True:
            # active clusters: odd parity and not on the boundary
            na = 0
            for i in range(nroots):
                r = _find(parent, roots[i])
                if parity[r] == 1 and bnd[r] == 0:
                    dup = False
                    for j in range(na):
                        if roots[j] == r:
                            dup = True
                            break
                    if not dup:
                        roots[na] = r
                        na += 1
            nroots = na
            if na == 0:
                break
            clock += 1
            ne = 0
            for i in range(na):
                r = roots[i]
                x = head[r]
                while x != -1:
                    for a in range(adj_ptr[x], adj_ptr[x + 1]):
                        e = adj[a]
                        if growth[e] >= ew[e]:
                            continue
                        y = eu[e] if ev[e] == x else ev[e]
                        if _find(parent, y) == r:
                            continue
                        if stamp[e] != clock:
                            stamp[e] = clock
                            rate[e] = 0
                            elist[ne] = e
                            ne += 1
                        rate[e] += 1
                    x = nxt[x]
            if ne == 0:
                break  # isolated defect with no incident edges
            delta = 1 << 62
            for i in range(ne):
                e = elist[i]
                need = (ew[e] - growth[e] + rate[e] - 1) // rate[e]
                if need < delta:
                    delta = need
            for i in range(ne):
                e = elist[i]
                if grown_flag[e] == 0:
                    grown_flag[e] = 1
                    grown[ng] = e
                    ng += 1
                growth[e] += delta * rate[e]
                if growth[e] >= ew[e]:
                    a = _find(parent, eu[e])
                    b = _find(parent, ev[e])
                    if a == b:
                        continue
                    for y in (eu[e], ev[e]):
                        if touched_flag[y] == 0:
                            touched_flag[y] = 1
                            touched[nt] = y
                            nt += 1
                    if size[a] < size[b]:
                        a, b = b, a
                    parent[b] = a
                    size[a] += size[b]
                    parity[a] ^= parity[b]
                    bnd[a] |= bnd[b]
                    nxt[tail[a]] = head[b]
                    tail[a] = tail[b]
                    tree[ntree] = e
                    ntree += 1

        # peel the spanning forest from its leaves
        for i in range(ntree):
            e = tree[i]
            deg[eu[e]] += 1
            deg[ev[e]] += 1
            incx[eu[e]] ^= e
            incx[ev[e]] ^= e
        top = 0
        for i in range(nt):
            x = touched[i]
            if deg[x] == 1 and x != B:
                stack[top] = x
                top += 1
        corr = 0
        while top > 0:
            top -= 1
            x = stack[top]
            if deg[x] != 1:
                continue
            e = incx[x]
            y = eu[e] if ev[e] == x else ev[e]
            if defect[x]:
                corr ^= eobs[e]
                defect[x] = 0
                defect[y] ^= 1
            deg[x] = 0
            incx[x] = 0
            deg[y] -= 1
            incx[y] ^= e
            if deg[y] == 1 and y != B:
                stack[top] = y
                top += 1
        out[s] = corr

        for i in range(nt):
            x = touched[i]
            parent[x] = x
            size[x] = 1
            parity[x] = 0
            bnd[x] = 0
            head[x] = x
            tail[x] = x
            nxt[x] = -1
            defect[x] = 0
            touched_flag[x] = 0
            deg[x] = 0
            incx[x] = 0
        bnd[B] = 1
        for i in range(ng):
            e = grown[i]
            growth[e] = 0
            grown_flag[e] = 0
    return out
