"""Circulant-based block matrices and their binary expansion.

A :class:`BlockMatrix` stores a grid of optional circulant powers.  Block
``(i, j)`` with power ``f`` expands to the ``z x z`` permutation matrix with
a one at ``(r, (r + f) mod z)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp


class ValidationError(ValueError):
    """Raised on malformed codes, matrices or files."""


@dataclass(frozen=True)
class CodeParams:
    """Parameters of a circulant-based SC code.

    gamma and kappa are the column and row weights of the underlying block
    code, z the circulant size, m the memory and L the coupling length.
    """

    gamma: int
    kappa: int
    z: int
    m: int
    L: int

    def __post_init__(self):
        if self.gamma < 2:
            raise ValidationError(f"gamma must be >= 2, got {self.gamma}")
        if self.kappa <= self.gamma:
            raise ValidationError("kappa must exceed gamma")
        if self.z < 2:
            raise ValidationError(f"z must be >= 2, got {self.z}")
        if self.m < 0:
            raise ValidationError(f"m must be >= 0, got {self.m}")
        if self.L < 1:
            raise ValidationError(f"L must be >= 1, got {self.L}")


@dataclass(frozen=True)
class Circulant:
    row_group: int
    col_group: int
    power: int


class BlockMatrix:
    """Sparse grid of circulant powers.

    Parameters
    ----------
    n_block_rows, n_block_cols : int
        Grid dimensions.
    z : int
        Circulant size.
    entries : mapping
        ``(row_group, col_group) -> power``.  Absent positions are zero blocks.
    """

    __slots__ = ("n_block_rows", "n_block_cols", "z", "_entries", "_arrays")

    def __init__(self, n_block_rows: int, n_block_cols: int, z: int,
                 entries: Mapping[tuple[int, int], int] | None = None):
        if n_block_rows < 0 or n_block_cols < 0:
            raise ValidationError("block dimensions must be non-negative")
        if z < 1:
            raise ValidationError(f"circulant size must be positive, got {z}")
        clean = {}
        for (i, j), f in (entries or {}).items():
            i, j, f = int(i), int(j), int(f)
            if not (0 <= i < n_block_rows and 0 <= j < n_block_cols):
                raise ValidationError(f"block ({i}, {j}) outside {n_block_rows}x{n_block_cols} grid")
            if not 0 <= f < z:
                raise ValidationError(f"power {f} at ({i}, {j}) not in [0, {z})")
            clean[(i, j)] = f
        self.n_block_rows = int(n_block_rows)
        self.n_block_cols = int(n_block_cols)
        self.z = int(z)
        self._entries = dict(sorted(clean.items()))
        self._arrays = None

    @classmethod
    def from_dense(cls, powers, z: int) -> "BlockMatrix":
        """Build from a 2-D array of powers where ``-1`` marks a zero block."""
        powers = np.asarray(powers, dtype=np.int64)
        if powers.ndim != 2:
            raise ValidationError("power grid must be 2-D")
        if np.any(powers < -1):
            raise ValidationError("power grid entries must be >= -1")
        rows, cols = np.nonzero(powers >= 0)
        entries = {(int(i), int(j)): int(powers[i, j]) for i, j in zip(rows, cols)}
        return cls(powers.shape[0], powers.shape[1], z, entries)

    @property
    def entries(self) -> dict[tuple[int, int], int]:
        return dict(self._entries)

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_block_rows, self.n_block_cols

    @property
    def binary_shape(self) -> tuple[int, int]:
        return self.n_block_rows * self.z, self.n_block_cols * self.z

    def __len__(self):
        return len(self._entries)

    def __iter__(self):
        return (Circulant(i, j, f) for (i, j), f in self._entries.items())

    def __contains__(self, pos):
        return tuple(pos) in self._entries

    def __getitem__(self, pos) -> int:
        return self._entries[tuple(pos)]

    def get(self, pos, default=None):
        return self._entries.get(tuple(pos), default)

    def __eq__(self, other):
        if not isinstance(other, BlockMatrix):
            return NotImplemented
        return (self.shape == other.shape and self.z == other.z
                and self._entries == other._entries)

    def __hash__(self):
        return hash((self.shape, self.z, tuple(self._entries.items())))

    def __repr__(self):
        return (f"BlockMatrix({self.n_block_rows}x{self.n_block_cols}, z={self.z}, "
                f"nnz={len(self._entries)})")

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Row, column and power arrays of the nonzero blocks in sorted order."""
        if self._arrays is None:
            n = len(self._entries)
            rows = np.fromiter((p[0] for p in self._entries), np.int64, n)
            cols = np.fromiter((p[1] for p in self._entries), np.int64, n)
            pows = np.fromiter(self._entries.values(), np.int64, n)
            self._arrays = (rows, cols, pows)
        return self._arrays

    def to_dense(self) -> np.ndarray:
        """Power grid with ``-1`` for zero blocks."""
        out = np.full(self.shape, -1, dtype=np.int64)
        rows, cols, pows = self.arrays()
        out[rows, cols] = pows
        return out

    def with_entries(self, updates: Mapping[tuple[int, int], int | None]) -> "BlockMatrix":
        """Copy with some blocks replaced; a ``None`` value removes the block."""
        entries = self.entries
        for pos, f in updates.items():
            if f is None:
                entries.pop(tuple(pos), None)
            else:
                entries[tuple(pos)] = f
        return BlockMatrix(self.n_block_rows, self.n_block_cols, self.z, entries)


def expand(bm: BlockMatrix) -> sp.csr_matrix:
    """Binary parity-check matrix of ``bm`` as a CSR matrix of uint8."""
    z = bm.z
    rows, cols, pows = bm.arrays()
    r = np.arange(z)
    rr = (rows[:, None] * z + r[None, :]).ravel()
    cc = (cols[:, None] * z + (r[None, :] + pows[:, None]) % z).ravel()
    data = np.ones(rr.size, dtype=np.uint8)
    return sp.csr_matrix((data, (rr, cc)), shape=bm.binary_shape, dtype=np.uint8)


def block_degrees(bm: BlockMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Number of nonzero blocks in each block row and each block column."""
    rows, cols, _ = bm.arrays()
    return (np.bincount(rows, minlength=bm.n_block_rows),
            np.bincount(cols, minlength=bm.n_block_cols))


def stack_blocks(grid: Iterable[Iterable[BlockMatrix | None]], z: int) -> BlockMatrix:
    """Assemble a block matrix from a 2-D grid of equally-sized block matrices.

    ``None`` stands for an all-zero tile; every row of tiles must contain at
    least one real tile to fix the row height (and likewise for columns).
    """
    grid = [list(row) for row in grid]
    heights = [next(t.n_block_rows for t in row if t is not None) for row in grid]
    widths = [next(row[c].n_block_cols for row in grid if row[c] is not None)
              for c in range(len(grid[0]))]
    entries = {}
    r0 = 0
    for a, row in enumerate(grid):
        c0 = 0
        for b, tile in enumerate(row):
            if tile is not None:
                if tile.z != z:
                    raise ValidationError("tiles must share the circulant size")
                for (i, j), f in tile._entries.items():
                    entries[(r0 + i, c0 + j)] = f
            c0 += widths[b]
        r0 += heights[a]
    return BlockMatrix(sum(heights), sum(widths), z, entries)


# ---------------------------------------------------------------- file formats

def format_block_matrix(bm: BlockMatrix) -> str:
    lines = [f"{bm.n_block_rows} {bm.n_block_cols} {bm.z}"]
    lines += [f"{i} {j} {f}" for (i, j), f in bm._entries.items()]
    return "\n".join(lines) + "\n"


def parse_block_matrix(text: str) -> BlockMatrix:
    rows = [line.split() for line in text.splitlines()
            if line.strip() and not line.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 3:
        raise ValidationError("block-matrix header must be 'n_block_rows n_block_cols z'")
    try:
        nr, nc, z = map(int, rows[0])
        entries = {}
        for fields in rows[1:]:
            if len(fields) != 3:
                raise ValidationError(f"bad block line: {' '.join(fields)!r}")
            i, j, f = map(int, fields)
            if (i, j) in entries:
                raise ValidationError(f"duplicate block ({i}, {j})")
            entries[(i, j)] = f
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"non-integer field in block-matrix file: {exc}") from None
    return BlockMatrix(nr, nc, z, entries)


def save_block_matrix(bm: BlockMatrix, path) -> None:
    Path(path).write_text(format_block_matrix(bm))


def load_block_matrix(path) -> BlockMatrix:
    return parse_block_matrix(Path(path).read_text())


def write_alist(H, path) -> None:
    """Write a binary matrix in alist format (1-based, zero padded)."""
    H = sp.csc_matrix(H)
    H.eliminate_zeros()
    m, n = H.shape
    Hr = H.tocsr()
    col_deg = np.diff(H.indptr)
    row_deg = np.diff(Hr.indptr)
    max_c = int(col_deg.max(initial=0))
    max_r = int(row_deg.max(initial=0))
    out = [f"{n} {m}", f"{max_c} {max_r}",
           " ".join(map(str, col_deg)), " ".join(map(str, row_deg))]
    for j in range(n):
        idx = np.sort(H.indices[H.indptr[j]:H.indptr[j + 1]]) + 1
        out.append(" ".join(map(str, list(idx) + [0] * (max_c - idx.size))))
    for i in range(m):
        idx = np.sort(Hr.indices[Hr.indptr[i]:Hr.indptr[i + 1]]) + 1
        out.append(" ".join(map(str, list(idx) + [0] * (max_r - idx.size))))
    Path(path).write_text("\n".join(out) + "\n")


def read_alist(path) -> sp.csr_matrix:
    lines = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    try:
        n, m = map(int, lines[0])
        rows, cols = [], []
        for j, fields in enumerate(lines[4:4 + n]):
            for v in map(int, fields):
                if v > 0:
                    rows.append(v - 1)
                    cols.append(j)
    except (ValueError, IndexError):
        raise ValidationError(f"malformed alist file {path}") from None
    data = np.ones(len(rows), dtype=np.uint8)
    return sp.csr_matrix((data, (rows, cols)), shape=(m, n), dtype=np.uint8)
