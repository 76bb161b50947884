"""Algebraic enumeration of short cycles in lifted Tanner graphs.

A cycle of length k in the binary matrix projects onto a closed walk of k
circulants in the block matrix that alternately shares a block row and a block
column and never reuses a circulant on two consecutive steps.  Such a walk
lifts to cycles only if the accumulated circulant shift returns to zero, and
each lifted copy is a cycle only if no lifted node repeats.

Walks are found by a compiled depth-first search.  The search supports a
second voltage taken modulo a small integer; :mod:`mdsc.md_coupler` uses it to
count cycles of the three-chain multi-dimensional code without building it.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numba import njit

from .qc_core import BlockMatrix, ValidationError

_INIT_CAP = 1024


def default_workers() -> int:
    env = os.environ.get("MDSC_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


class _Graph:
    """Adjacency of the block (protograph) Tanner graph of a BlockMatrix."""

    def __init__(self, bm: BlockMatrix, volt2=None):
        rows, cols, pows = bm.arrays()
        self.bm = bm
        self.n_rows, self.n_cols = bm.shape
        self.e_row = rows
        self.e_col = cols
        self.e_v1 = pows
        self.e_v2 = np.zeros_like(pows) if volt2 is None else np.asarray(volt2, np.int64)
        order_c = np.lexsort((rows, cols))
        self.col_edges = order_c.astype(np.int64)
        self.col_ptr = np.concatenate(([0], np.cumsum(np.bincount(cols, minlength=self.n_cols))))
        self.row_edges = np.arange(rows.size, dtype=np.int64)  # entries are row-major already
        self.row_ptr = np.concatenate(([0], np.cumsum(np.bincount(rows, minlength=self.n_rows))))

    def run(self, k, mod1, mod2, check_simple, seeds, marked=None):
        if marked is None:
            marked = np.ones(self.e_row.size, dtype=np.bool_)
        return _closed_walks(
            k, self.n_cols, self.col_ptr, self.col_edges, self.row_ptr, self.row_edges,
            self.e_row, self.e_col, self.e_v1 % mod1, self.e_v2 % mod2, mod1, mod2,
            check_simple, np.asarray(seeds, dtype=np.int64), marked)


@njit(cache=True, nogil=True)
def _closed_walks(k, n_cols, col_ptr, col_edges, row_ptr, row_edges, e_row, e_col,
                  e_v1, e_v2, mod1, mod2, check_simple, seeds, marked):
    """Closed non-backtracking block walks of length k starting at a seed column.

    Only walks whose start column is the smallest column they visit are
    reported, so every rotation/reflection class shows up at least once.  When
    ``check_simple`` is set, both voltages must close and no lifted node may
    repeat; otherwise only the voltages must close.
    """
    cap = 1024
    out = np.empty((cap, k), dtype=np.int64)
    n_out = 0
    edges = np.empty(k, dtype=np.int64)
    node = np.empty(k + 1, dtype=np.int64)
    s1 = np.zeros(k + 1, dtype=np.int64)
    s2 = np.zeros(k + 1, dtype=np.int64)
    cursor = np.zeros(k + 1, dtype=np.int64)
    for si in range(seeds.size):
        c0 = seeds[si]
        node[0] = c0
        s1[0] = 0
        s2[0] = 0
        t = 0
        cursor[0] = col_ptr[c0]
        while t >= 0:
            # node[t] is a VN (column) when t is even, a CN (row) when odd
            if t % 2 == 0:
                cur = node[t]
                lo = cursor[t]
                hi = col_ptr[cur + 1]
            else:
                cur = node[t] - n_cols
                lo = cursor[t]
                hi = row_ptr[cur + 1]
            advanced = False
            while lo < hi:
                if t % 2 == 0:
                    e = col_edges[lo]
                else:
                    e = row_edges[lo]
                lo += 1
                if t > 0 and e == edges[t - 1]:
                    continue
                if t % 2 == 0:
                    nxt = n_cols + e_row[e]
                    a1 = (s1[t] - e_v1[e]) % mod1
                    a2 = (s2[t] - e_v2[e]) % mod2
                else:
                    nxt = e_col[e]
                    a1 = (s1[t] + e_v1[e]) % mod1
                    a2 = (s2[t] + e_v2[e]) % mod2
                    if nxt < c0:
                        continue
                if t + 1 == k:
                    if nxt != c0 or a1 != 0 or a2 != 0 or e == edges[0]:
                        continue
                    edges[t] = e
                    any_marked = False
                    for u in range(k):
                        if marked[edges[u]]:
                            any_marked = True
                            break
                    if not any_marked:
                        continue
                    if n_out == cap:
                        bigger = np.empty((cap * 2, k), dtype=np.int64)
                        bigger[:cap] = out
                        out = bigger
                        cap *= 2
                    out[n_out] = edges
                    n_out += 1
                    continue
                if check_simple:
                    clash = False
                    for u in range(t + 1):
                        if node[u] == nxt and s1[u] == a1 and s2[u] == a2:
                            clash = True
                            break
                    if clash:
                        continue
                edges[t] = e
                cursor[t] = lo
                t += 1
                node[t] = nxt
                s1[t] = a1
                s2[t] = a2
                if t % 2 == 0:
                    cursor[t] = col_ptr[nxt]
                else:
                    cursor[t] = row_ptr[nxt - n_cols]
                advanced = True
                break
            if not advanced:
                t -= 1
    return out[:n_out].copy()


@njit(cache=True)
def _canonicalize(walks):
    """Canonical representative and period of each walk.

    The class of a walk is generated by rotations by an even number of steps
    and by reversal (read from the same start column).  The representative is
    the lexicographically smallest member; the period is the number of times
    the smallest repeating unit occurs.
    """
    n, k = walks.shape
    canon = np.empty((n, k), dtype=np.int64)
    period = np.empty(n, dtype=np.int64)
    cand = np.empty(k, dtype=np.int64)
    for w in range(n):
        best = walks[w].copy()
        reps = 0
        for direction in range(2):
            for rot in range(0, k, 2):
                for u in range(k):
                    if direction == 0:
                        cand[u] = walks[w, (rot + u) % k]
                    else:
                        cand[u] = walks[w, (rot - 1 - u) % k]
                if direction == 0:
                    same = True
                    for u in range(k):
                        if cand[u] != walks[w, u]:
                            same = False
                            break
                    if same:
                        reps += 1
                smaller = False
                for u in range(k):
                    if cand[u] != best[u]:
                        smaller = cand[u] < best[u]
                        break
                if smaller:
                    best[:] = cand
        canon[w] = best
        period[w] = reps
    return canon, period


def _enumerate(graph: _Graph, k: int, mod1: int, mod2: int, check_simple: bool,
               seeds=None, marked=None, workers: int | None = None):
    """Unique walk classes as (canonical edge sequences, repetition factors)."""
    if k % 2 or k < 4:
        raise ValidationError(f"cycle length must be even and >= 4, got {k}")
    if seeds is None:
        seeds = np.arange(graph.n_cols, dtype=np.int64)
    seeds = np.asarray(seeds, dtype=np.int64)
    workers = workers or default_workers()
    if workers <= 1 or seeds.size < 2:
        raw = graph.run(k, mod1, mod2, check_simple, seeds, marked)
    else:
        # interleaved chunks balance the banded workload; merge order is fixed
        chunks = [seeds[w::workers] for w in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(
                lambda s: graph.run(k, mod1, mod2, check_simple, s, marked), chunks))
        raw = np.concatenate([p for p in parts] or [np.empty((0, k), np.int64)])
    if raw.shape[0] == 0:
        return np.empty((0, k), np.int64), np.empty(0, np.int64)
    canon, period = _canonicalize(raw)
    canon, idx = np.unique(canon, axis=0, return_index=True)
    return canon, period[idx]


# ------------------------------------------------------------------- cycles

@dataclass(frozen=True)
class BlockCycle:
    """A closed alternating walk over circulant positions.

    ``seq[0]`` and ``seq[1]`` share a block row, ``seq[1]`` and ``seq[2]`` a
    block column, and so on cyclically.
    """

    seq: tuple[tuple[int, int], ...]

    @property
    def k(self) -> int:
        return len(self.seq)

    @property
    def multiplicity(self) -> dict[tuple[int, int], int]:
        out: dict[tuple[int, int], int] = {}
        for pos in self.seq:
            out[pos] = out.get(pos, 0) + 1
        return out

    @property
    def canonical_key(self) -> tuple[tuple[int, int], ...]:
        return canonical_key(self.seq)

    def distance(self, u: int, v: int) -> int:
        """Distance between sequence positions u and v (1-based)."""
        return abs(v - u)


def canonical_key(seq) -> tuple:
    k = len(seq)
    seq = list(seq)
    variants = []
    for rot in range(0, k, 2):
        variants.append(tuple(seq[(rot + u) % k] for u in range(k)))
        variants.append(tuple(seq[(rot - 1 - u) % k] for u in range(k)))
    return min(variants)


def lifted_count(bm: BlockMatrix, bc: BlockCycle) -> int:
    """Number of distinct simple cycles of length k lifted from ``bc``.

    Zero unless the alternating power sum vanishes modulo z.  Otherwise each
    of the z lifted closed walks is either simple or not (all alike by the
    cyclic symmetry); a walk that is a t-fold repetition of a shorter pattern
    yields z/t distinct cycles.
    """
    z = bm.z
    seq = bc.seq
    k = len(seq)
    shift = 0
    seen = set()
    for u, pos in enumerate(seq):
        i, j = pos
        # positions u (0-based even) enter a row from column j
        node = ("c", j) if u % 2 == 0 else ("r", i)
        if (node, shift) in seen:
            return 0
        seen.add((node, shift))
        f = bm[pos]
        shift = (shift - f) % z if u % 2 == 0 else (shift + f) % z
    if shift != 0:
        return 0
    reps = sum(1 for rot in range(0, k, 2) if tuple(seq[rot:] + seq[:rot]) == tuple(seq))
    return z // reps


@dataclass
class CycleCensus:
    """Cycles of one length found in a block matrix.

    ``walks`` holds the canonical edge-index sequences (indices into
    ``bm.arrays()``) and ``weights`` the number of lifted cycles per walk.
    """

    bm: BlockMatrix
    k: int
    walks: np.ndarray
    weights: np.ndarray
    active: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.active is None:
            self.active = np.ones(len(self.weights), dtype=bool)

    @property
    def total(self) -> int:
        return int(self.weights.sum())

    def __len__(self):
        return len(self.weights)

    @cached_property
    def positions(self) -> np.ndarray:
        """``(n, k, 2)`` array of (row_group, col_group) along each walk."""
        rows, cols, _ = self.bm.arrays()
        return np.stack([rows[self.walks], cols[self.walks]], axis=-1)

    @property
    def block_cycles(self) -> list[BlockCycle]:
        return [BlockCycle(tuple(map(tuple, p.tolist()))) for p in self.positions]

    def participation(self, fold=None, selected=None) -> dict:
        """Appearance tally of each position over the selected cycles.

        A position visited r times by a cycle adds r times the cycle's lifted
        multiplicity.  ``fold`` maps a position to the key to tally under.
        """
        sel = self.active if selected is None else selected
        tally: dict = {}
        for walk_pos, w in zip(self.positions[sel], self.weights[sel]):
            for pos in map(tuple, walk_pos.tolist()):
                key = fold(*pos) if fold else pos
                tally[key] = tally.get(key, 0) + int(w)
        return tally

    def subset(self, mask) -> "CycleCensus":
        return CycleCensus(self.bm, self.k, self.walks[mask], self.weights[mask],
                           self.active[mask])

    def to_dict(self, with_cycles=False) -> dict:
        out = {"k": self.k, "total": self.total, "block_cycles": len(self)}
        if with_cycles:
            out["cycles"] = [{"seq": p.tolist(), "lifted": int(w)}
                             for p, w in zip(self.positions, self.weights)]
        return out


def enumerate_block_cycles(bm: BlockMatrix, k: int, workers=None) -> list[BlockCycle]:
    """All closed non-backtracking alternating walks of length k, one per class.

    Circulant powers are ignored; the same circulant may be visited more
    than once as long as it is not reused on two consecutive steps.
    """
    canon, _ = _enumerate(_Graph(bm), k, 1, 1, False, workers=workers)
    rows, cols, _ = bm.arrays()
    return [BlockCycle(tuple(zip(rows[w].tolist(), cols[w].tolist()))) for w in canon]


def count_cycles(bm: BlockMatrix, k: int, workers=None, seeds=None) -> CycleCensus:
    """Census of simple length-k cycles in the lifted graph of ``bm``."""
    walks, reps = _enumerate(_Graph(bm), k, bm.z, 1, True, seeds=seeds, workers=workers)
    return CycleCensus(bm, k, walks, bm.z // reps)


def count_lifted(bm: BlockMatrix, k: int, volt2=None, mod2: int = 1, workers=None,
                 seeds=None) -> int:
    """Cycle count of the ``z * mod2``-fold lift with a second voltage per block.

    ``volt2`` gives each nonzero block (in ``bm.arrays()`` order) an extra
    voltage modulo ``mod2``.  With ``mod2 = 1`` this equals
    ``count_cycles(bm, k).total``.
    """
    g = _Graph(bm, volt2)
    walks, reps = _enumerate(g, k, bm.z, mod2, True, seeds=seeds, workers=workers)
    return int(((bm.z * mod2) // reps).sum()) if walks.size else 0


def girth(bm: BlockMatrix, k_max: int = 12, workers=None) -> int | None:
    """Smallest cycle length up to ``k_max``, or None when there is none."""
    if k_max % 2:
        raise ValidationError("k_max must be even")
    for k in range(4, k_max + 1, 2):
        if count_cycles(bm, k, workers=workers).total:
            return k
    return None


def cycles_through_replica(sc, k: int, d: int, workers=None) -> CycleCensus:
    """Cycles of H_SC that visit at least two circulants inside replica R_d."""
    cols_d = sc.replica_columns(d)
    # a walk through R_d has its smallest column at or before R_d's last column
    seeds = np.arange(0, cols_d.stop, dtype=np.int64)
    census = count_cycles(sc.h_sc, k, workers=workers, seeds=seeds)
    if len(census) == 0:
        return census
    _, cols, _ = sc.h_sc.arrays()
    walk_cols = cols[census.walks]
    inside = ((walk_cols >= cols_d.start) & (walk_cols < cols_d.stop)).sum(axis=1)
    return census.subset(inside >= 2)

