"""Multi-dimensional coupling of three SC chains by circulant relocation.

Each circulant of the underlying code is either kept (mapping 0) or moved,
in every replica, to the same position of an auxiliary matrix P (mapping 1)
or Q (mapping 2).  The coupled matrix is::

    [H' Q P]
    [P H' Q]
    [Q P H']

A closed block walk of H_SC survives in the coupled code exactly when the
alternating sum of the mapping values along it vanishes modulo 3; otherwise
its three copies merge into one walk three times as long.  Seen this way the
coupled code is a 3-fold voltage lift of H_SC, which is how it is counted.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cycle_engine import (BlockCycle, _enumerate, _Graph, count_cycles, count_lifted,
                           cycles_through_replica, girth)
from .qc_core import BlockMatrix, ValidationError, expand, stack_blocks
from .sc_builder import ScCode, code_stats, format_grid, parse_grid

log = logging.getLogger(__name__)

KEEP, TO_P, TO_Q = 0, 1, 2


class ConsistencyError(RuntimeError):
    """Two independent counting routes disagree."""


@dataclass(frozen=True, eq=False)
class MdMapping:
    """Relocation decision per underlying circulant plus optional new powers."""

    grid: np.ndarray
    power_overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=np.int64)
        if grid.ndim != 2:
            raise ValidationError("mapping grid must be 2-D")
        if grid.size and (grid.min() < 0 or grid.max() > 2):
            raise ValidationError("mapping entries must be 0, 1 or 2")
        overrides = {}
        for pos, f in self.power_overrides.items():
            i, j = map(int, pos)
            if not (0 <= i < grid.shape[0] and 0 <= j < grid.shape[1]):
                raise ValidationError(f"override position ({i}, {j}) outside the grid")
            if grid[i, j] == KEEP:
                raise ValidationError(f"power override on kept circulant ({i}, {j})")
            overrides[(i, j)] = int(f)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "power_overrides", overrides)

    @classmethod
    def zeros(cls, gamma: int, kappa: int) -> "MdMapping":
        return cls(np.zeros((gamma, kappa), dtype=np.int64))

    @property
    def n_relocated(self) -> int:
        return int(np.count_nonzero(self.grid))

    def relocated(self) -> list[tuple[int, int]]:
        return [tuple(p) for p in np.argwhere(self.grid > 0).tolist()]

    def swapped(self) -> "MdMapping":
        """Same mapping with the roles of P and Q exchanged."""
        g = self.grid.copy()
        g[self.grid == TO_P] = TO_Q
        g[self.grid == TO_Q] = TO_P
        return MdMapping(g, dict(self.power_overrides))

    def with_value(self, pos, value: int) -> "MdMapping":
        g = self.grid.copy()
        g[pos] = value
        overrides = {p: f for p, f in self.power_overrides.items() if g[p] != KEEP}
        return MdMapping(g, overrides)

    def __eq__(self, other):
        if not isinstance(other, MdMapping):
            return NotImplemented
        return (np.array_equal(self.grid, other.grid)
                and self.power_overrides == other.power_overrides)

    def to_text(self) -> str:
        text = format_grid(self.grid)
        text += "".join(f"{i} {j} {f}\n" for (i, j), f in sorted(self.power_overrides.items()))
        return text

    @classmethod
    def from_text(cls, text: str) -> "MdMapping":
        grid, rest = parse_grid(text)
        overrides = {}
        for fields in rest:
            if len(fields) != 3:
                raise ValidationError(f"override lines need 'i j new_power', got {fields}")
            overrides[(fields[0], fields[1])] = fields[2]
        return cls(grid, overrides)

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path) -> "MdMapping":
        return cls.from_text(Path(path).read_text())


@dataclass(frozen=True)
class RelocationOutcome:
    delta: int

    @property
    def preserved(self) -> bool:
        return self.delta == 0


@dataclass(frozen=True)
class VoteTally:
    to_p: int = 0
    to_q: int = 0
    keep: int = 0

    def __add__(self, other):
        return VoteTally(self.to_p + other.to_p, self.to_q + other.to_q,
                         self.keep + other.keep)


@dataclass(frozen=True, eq=False)
class MdCode:
    base: ScCode
    mapping: MdMapping
    h_prime: BlockMatrix
    p: BlockMatrix
    q: BlockMatrix
    h_md: BlockMatrix

    @property
    def h_sc_eff(self) -> BlockMatrix:
        """H_SC with relocated powers replaced by their overrides."""
        entries = dict(self.h_prime.entries)
        entries.update(self.p.entries)
        entries.update(self.q.entries)
        return BlockMatrix(*self.base.h_sc.shape, self.base.h_sc.z, entries)

    def block_mapping(self) -> np.ndarray:
        """Mapping value of every nonzero H_SC block, in ``arrays()`` order."""
        return self.mapping.grid.ravel()[self.base.base_index_array()]

    @property
    def length(self) -> int:
        return 3 * code_stats(self.base)[0]

    @property
    def rate(self) -> float:
        return code_stats(self.base)[1]

    def to_dict(self) -> dict:
        return {"code": self.base.to_dict(), "mapping": self.mapping.grid.tolist(),
                "power_overrides": [[i, j, f] for (i, j), f in
                                    sorted(self.mapping.power_overrides.items())]}

    @classmethod
    def from_dict(cls, d: dict) -> "MdCode":
        try:
            sc = ScCode.from_dict(d["code"])
            overrides = {(i, j): f for i, j, f in d.get("power_overrides", [])}
            return assemble_md(sc, MdMapping(d["mapping"], overrides))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed MD code descriptor: {exc}") from None


# ------------------------------------------------------------ relocation algebra

def _signs(k: int) -> np.ndarray:
    return np.where(np.arange(k) % 2 == 0, 1, -1)


def relocation_effect(bc: BlockCycle, mapping: MdMapping, sc: ScCode | None = None
                      ) -> RelocationOutcome:
    """Net multi-dimensional shift of a block cycle under ``mapping``.

    Positions are folded to the underlying grid through ``sc`` when given,
    otherwise they are taken to be underlying positions already.
    """
    vals = []
    for i, j in bc.seq:
        if sc is not None:
            i, j = sc.base_position(i, j)
        vals.append(int(mapping.grid[i, j]))
    delta = int(np.dot(_signs(len(vals)), vals)) % 3
    return RelocationOutcome(delta)


def _deltas(base_seq: np.ndarray, grid_flat: np.ndarray) -> np.ndarray:
    return (grid_flat[base_seq] * _signs(base_seq.shape[1])).sum(axis=1) % 3


def _votes(base_seq, weights, grid_flat, target) -> tuple[VoteTally, np.ndarray]:
    """Weighted votes of the cycles that visit ``target`` (flat index)."""
    k = base_seq.shape[1]
    hits = base_seq == target
    rows = hits.any(axis=1)
    seq, w = base_seq[rows], weights[rows]
    signs = _signs(k)
    coef = (hits[rows] * signs).sum(axis=1)
    others = grid_flat[seq] * signs * ~hits[rows]
    rest = others.sum(axis=1)
    counts = []
    for action in (TO_P, TO_Q, KEEP):
        removed = (rest + coef * action) % 3 != 0
        counts.append(int(w[removed].sum()))
    return VoteTally(*counts), rows


def collect_votes(target, cycles, mapping: MdMapping, sc: ScCode | None = None,
                  weights=None) -> VoteTally:
    """Votes of ``cycles`` on relocating the underlying circulant ``target``.

    A cycle votes for every action under which it would be removed from the
    coupled code, every appearance of the target moving together.
    """
    if mapping.grid[tuple(target)] != KEEP:
        raise ValidationError(f"target {tuple(target)} is already relocated")
    kappa = mapping.grid.shape[1]
    cycles = [c for c in cycles if len(c.seq)]
    if not cycles:
        return VoteTally()
    fold = (lambda i, j: sc.base_position(i, j)) if sc is not None else (lambda i, j: (i, j))
    base_seq = np.array([[a * kappa + b for a, b in (fold(*p) for p in c.seq)] for c in cycles])
    w = np.ones(len(cycles), dtype=np.int64) if weights is None else np.asarray(weights)
    t = target[0] * kappa + target[1]
    tally, _ = _votes(base_seq, w, mapping.grid.ravel(), t)
    return tally


# -------------------------------------------------------- majority voting

@dataclass
class RelocationStep:
    target: tuple[int, int]
    participation: int
    votes: VoteTally
    action: int
    active_cycles: int


def majority_vote_relocate(sc: ScCode, k: int, t_max: int, workers=None,
                           trace: list | None = None) -> MdMapping:
    """Sequential majority-voting relocation of the most problematic circulants.

    Cycles of length ``k`` through the middle replica are ranked; the
    unrelocated circulant appearing most often in still-active cycles is
    targeted and every cycle visiting it votes.  The loop stops when keeping
    wins, no active cycle is left, or ``t_max`` circulants were moved.
    """
    gamma, kappa = sc.params.gamma, sc.params.kappa
    if t_max > gamma * kappa:
        warnings.warn(f"t_max={t_max} exceeds the {gamma * kappa} circulants; clamping")
        t_max = gamma * kappa
    grid = np.zeros(gamma * kappa, dtype=np.int64)
    census = cycles_through_replica(sc, k, sc.middle_replica, workers=workers)
    base_seq = sc.base_index_array()[census.walks]
    weights = census.weights.astype(np.int64)
    active = np.ones(len(weights), dtype=bool)
    n_reloc = 0
    while n_reloc < t_max and active.any():
        tally = np.bincount(base_seq[active].ravel(),
                            weights=np.repeat(weights[active], k),
                            minlength=gamma * kappa).astype(np.int64)
        tally[grid != KEEP] = -1
        target = int(np.argmax(tally))
        if tally[target] <= 0:
            break
        votes, touched = _votes(base_seq, weights, grid, target)
        pos = divmod(target, kappa)
        if votes.keep > max(votes.to_p, votes.to_q):
            action = KEEP
        else:
            action = TO_P if votes.to_p >= votes.to_q else TO_Q
        if trace is not None:
            trace.append(RelocationStep(pos, int(tally[target]), votes, action,
                                        int(weights[active].sum())))
        if action == KEEP:
            log.info("keep wins for %s (votes %s); stopping", pos, votes)
            break
        grid[target] = action
        n_reloc += 1
        active[touched] = _deltas(base_seq[touched], grid) == 0
        log.debug("relocated %s -> %s; %d active", pos, "PQ"[action - 1],
                  int(weights[active].sum()))
    return MdMapping(grid.reshape(gamma, kappa))


# --------------------------------------------------------------- assembly

def assemble_md(sc: ScCode, mapping: MdMapping) -> MdCode:
    """Split H_SC into H' + P + Q by ``mapping`` and couple three chains."""
    gamma, kappa = sc.params.gamma, sc.params.kappa
    if mapping.grid.shape != (gamma, kappa):
        raise ValidationError(
            f"mapping is {mapping.grid.shape}, code needs {(gamma, kappa)}")
    for pos, f in mapping.power_overrides.items():
        if not 0 <= f < sc.params.z:
            raise ValidationError(f"override power {f} at {pos} not in [0, {sc.params.z})")
    parts = [{}, {}, {}]
    for c in sc.h_sc:
        base = sc.base_position(c.row_group, c.col_group)
        m = int(mapping.grid[base])
        f = mapping.power_overrides.get(base, c.power) if m else c.power
        parts[m][(c.row_group, c.col_group)] = f
    shape = sc.h_sc.shape
    h_prime, p, q = (BlockMatrix(*shape, sc.params.z, e) for e in parts)
    h_md = stack_blocks([[h_prime, q, p], [p, h_prime, q], [q, p, h_prime]], sc.params.z)
    return MdCode(sc, mapping, h_prime, p, q, h_md)


# ---------------------------------------------------------------- counting

def md_cycle_count_fast(mdc: MdCode, k: int, workers=None) -> int:
    """Cycles of length k in the coupled code, counted on H_SC alone."""
    return count_lifted(mdc.h_sc_eff, k, volt2=mdc.block_mapping(), mod2=3, workers=workers)


def md_cycle_count(mdc: MdCode, k: int, workers=None, direct: bool = True) -> int:
    """Cycles of length k in the coupled code.

    The count over H_SC with mapping voltages is cross-checked against a
    direct enumeration on the full coupled matrix unless ``direct`` is off.
    """
    fast = md_cycle_count_fast(mdc, k, workers=workers)
    if direct:
        slow = count_cycles(mdc.h_md, k, workers=workers).total
        if slow != fast:
            raise ConsistencyError(f"cycles-{k}: voltage count {fast} != direct count {slow}")
    return fast


# ------------------------------------------------------------------ PP CPO

class _WalkTable:
    """Closed walks of one length that survive the coupling and touch a relocated block.

    Their alternating power sums are tracked as a constant part plus one
    coefficient per relocated underlying position, so trying a new power
    for one position is a vectorized update.
    """

    def __init__(self, mdc: MdCode, length: int, relocated_flat, workers=None):
        sc = mdc.base
        h = mdc.h_sc_eff
        base_idx = sc.base_index_array()
        marked = mdc.block_mapping() != KEEP
        graph = _Graph(h, mdc.block_mapping())
        walks, reps = _enumerate(graph, length, 1, 3, False, marked=marked, workers=workers)
        _, _, pows = h.arrays()
        signs = -_signs(length)  # column-to-row steps subtract the power
        self.weights = (3 * sc.params.z) // reps
        self.z = sc.params.z
        base_seq = base_idx[walks]
        self.coef = np.stack([((base_seq == r) * signs).sum(axis=1) for r in relocated_flat],
                             axis=1) if len(walks) else np.zeros((0, len(relocated_flat)), int)
        self.sums = (pows[walks] * signs).sum(axis=1) % self.z if len(walks) else np.zeros(0, int)

    def closed(self) -> np.ndarray:
        return self.sums == 0

    def trial(self, col: int, delta_range: np.ndarray) -> np.ndarray:
        """Closed-walk weight for each trial power change of column ``col``."""
        c = self.coef[:, col]
        rows = c != 0
        base = int(self.weights[~rows][self.sums[~rows] == 0].sum())
        s = (self.sums[rows, None] + c[rows, None] * delta_range[None, :]) % self.z
        return base + ((s == 0) * self.weights[rows, None]).sum(axis=0)

    def apply(self, col: int, delta: int):
        self.sums = (self.sums + self.coef[:, col] * delta) % self.z


def pp_cpo(mdc: MdCode, k: int, max_passes: int = 10, workers=None) -> MdMapping:
    """Greedy re-selection of relocated circulant powers.

    Each relocated circulant, most involved first, takes the power that
    minimizes the number of length-k cycles of the coupled code while
    leaving no shorter cycle.  Passes repeat until nothing changes.
    """
    mapping = mdc.mapping
    relocated = mapping.relocated()
    if not relocated:
        return mapping
    for ell in range(4, k, 2):
        if md_cycle_count_fast(mdc, ell, workers=workers):
            raise ValidationError(f"coupled code already has cycles of length {ell} < {k}")
    kappa, z = mdc.base.params.kappa, mdc.base.params.z
    flat = [i * kappa + j for i, j in relocated]
    short = [_WalkTable(mdc, ell, flat, workers) for ell in range(4, k, 2)]
    main = _WalkTable(mdc, k, flat, workers)

    eff = mdc.h_sc_eff
    powers = {}
    for c in mdc.base.h_sc:
        pos = mdc.base.base_position(c.row_group, c.col_group)
        if pos in relocated:
            powers[pos] = eff[(c.row_group, c.col_group)]
    involvement = np.abs(main.coef[main.closed()]).T @ main.weights[main.closed()]
    order = sorted(range(len(relocated)), key=lambda r: (-involvement[r], relocated[r]))

    current = int(main.weights[main.closed()].sum())
    for n_pass in range(max_passes):
        changed = False
        for r in order:
            pos = relocated[r]
            deltas = (np.arange(z) - powers[pos]) % z
            counts = main.trial(r, deltas)
            ok = np.ones(z, dtype=bool)
            for tab in short:
                ok &= tab.trial(r, deltas) == 0
            counts = np.where(ok, counts, np.iinfo(np.int64).max)
            best = int(np.argmin(counts))
            if counts[best] < current:
                d = int(deltas[best])
                main.apply(r, d)
                for tab in short:
                    tab.apply(r, d)
                log.debug("pass %d: %s power %d -> %d, cycles-%d %d -> %d", n_pass, pos,
                          powers[pos], best, k, current, counts[best])
                powers[pos] = best
                current = int(counts[best])
                changed = True
        if not changed:
            break
    original = {pos: int(mdc.base.cm[pos]) for pos in relocated}
    overrides = {pos: f for pos, f in powers.items() if f != original[pos]}
    return MdMapping(mapping.grid, overrides)


# ----------------------------------------------------------- girth checks

def _md_walk_is_cycle(mdc: MdCode, seq, H) -> bool:
    """Follow ``seq`` three times through the binary coupled matrix.

    Returns True when the traversal closes only after the third round and
    visits no node twice, i.e. it is a cycle of length ``3 len(seq)``.
    """
    z = mdc.base.params.z
    n_rows, n_cols = mdc.base.h_sc.shape
    eff = mdc.h_sc_eff
    k = len(seq)
    chain, lift = 0, 0
    col = seq[0][1]
    start = ("v", chain, col, lift)
    seen = {start}
    node = start
    for step in range(3 * k):
        i, j = seq[step % k]
        m = int(mdc.mapping.grid[mdc.base.base_position(i, j)])
        f = eff[(i, j)]
        if step % 2 == 0:
            row_chain = (chain + m) % 3
            r = (lift - f) % z
            if H[row_chain * n_rows * z + i * z + r, chain * n_cols * z + j * z + lift] != 1:
                return False
            node = ("c", row_chain, i, r)
            chain, lift = row_chain, r
        else:
            col_chain = (chain - m) % 3
            x = (lift + f) % z
            if H[chain * n_rows * z + i * z + lift, col_chain * n_cols * z + j * z + x] != 1:
                return False
            node = ("v", col_chain, j, x)
            chain, lift = col_chain, x
        if step == 3 * k - 1:
            return node == start
        if node in seen:
            return False
        seen.add(node)
    return False


def girth_bound_check(mdc: MdCode, k_max: int = 10, workers=None) -> dict:
    """Check that coupling did not shorten the girth and spot-check a merged cycle.

    One length-k cycle of H_SC that the mapping removes is traced through
    the binary coupled matrix, where it must close as a cycle of length 3k.
    """
    g_sc = girth(mdc.h_sc_eff, k_max, workers=workers)
    g_md = girth(mdc.h_md, k_max, workers=workers)
    report = {"girth_sc": g_sc, "girth_md": g_md}
    report["girth_ok"] = g_sc is None or (g_md is None or g_md >= g_sc)
    report["merged_cycle_checked"] = None
    if g_sc is not None:
        census = count_cycles(mdc.h_sc_eff, g_sc, workers=workers)
        deltas = _deltas(mdc.base.base_index_array()[census.walks],
                         mdc.mapping.grid.ravel()) if len(census) else np.zeros(0)
        removed = np.flatnonzero(deltas != 0)
        if removed.size:
            seq = census.block_cycles[int(removed[0])].seq
            H = expand(mdc.h_md).tolil()
            report["merged_cycle_checked"] = _md_walk_is_cycle(mdc, seq, H)
    report["ok"] = bool(report["girth_ok"] and report["merged_cycle_checked"] is not False)
    return report
