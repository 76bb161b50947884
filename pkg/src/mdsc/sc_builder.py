"""Partitioning of a circulant-based block code and 1D spatial coupling."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .qc_core import BlockMatrix, CodeParams, ValidationError


def _as_grid(values, params: CodeParams, name: str) -> np.ndarray:
    grid = np.asarray(values, dtype=np.int64)
    if grid.shape != (params.gamma, params.kappa):
        raise ValidationError(
            f"{name} must be {params.gamma}x{params.kappa}, got {grid.shape}")
    return grid


def check_partitioning(pm, params: CodeParams) -> np.ndarray:
    pm = _as_grid(pm, params, "partitioning matrix")
    if pm.min() < 0 or pm.max() > params.m:
        raise ValidationError(f"partitioning entries must lie in [0, {params.m}]")
    return pm


def check_powers(cm, params: CodeParams) -> np.ndarray:
    cm = _as_grid(cm, params, "power matrix")
    if cm.min() < 0 or cm.max() >= params.z:
        raise ValidationError(f"power entries must lie in [0, {params.z})")
    return cm


def partition(cm, pm, params: CodeParams) -> list[BlockMatrix]:
    """Split the underlying code into the m+1 component matrices H_0..H_m.

    Block ``(i, j)`` of the underlying code goes to component ``pm[i, j]``
    with power ``cm[i, j]``.
    """
    cm = check_powers(cm, params)
    pm = check_partitioning(pm, params)
    comps = [{} for _ in range(params.m + 1)]
    for i in range(params.gamma):
        for j in range(params.kappa):
            comps[pm[i, j]][(i, j)] = int(cm[i, j])
    return [BlockMatrix(params.gamma, params.kappa, params.z, c) for c in comps]


@dataclass(frozen=True, eq=False)
class ScCode:
    """A 1D spatially-coupled code built from L replicas of [H_0; ...; H_m]."""

    params: CodeParams
    pm: np.ndarray
    cm: np.ndarray
    h_sc: BlockMatrix
    replica_of: np.ndarray  # column group -> replica index d (1-based)

    @property
    def middle_replica(self) -> int:
        return math.ceil(self.params.L / 2)

    def replica_columns(self, d: int) -> range:
        if not 1 <= d <= self.params.L:
            raise ValidationError(f"replica index {d} outside [1, {self.params.L}]")
        kappa = self.params.kappa
        return range((d - 1) * kappa, d * kappa)

    def base_position(self, i: int, j: int) -> tuple[int, int]:
        """Fold an H_SC block position back to its underlying (i', j')."""
        g, k = self.params.gamma, self.params.kappa
        rho = j // k
        return (i - rho * g) % g, j % k

    def base_index_array(self) -> np.ndarray:
        """Underlying flat index ``i' * kappa + j'`` of every nonzero H_SC block."""
        rows, cols, _ = self.h_sc.arrays()
        g, k = self.params.gamma, self.params.kappa
        return ((rows - (cols // k) * g) % g) * k + cols % k

    def to_dict(self) -> dict:
        p = self.params
        return {"gamma": p.gamma, "kappa": p.kappa, "z": p.z, "m": p.m, "L": p.L,
                "pm": self.pm.tolist(), "cm": self.cm.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "ScCode":
        try:
            params = CodeParams(int(d["gamma"]), int(d["kappa"]), int(d["z"]),
                                int(d["m"]), int(d["L"]))
            return build_sc(d["cm"], d["pm"], params)
        except KeyError as exc:
            raise ValidationError(f"code descriptor missing field {exc}") from None


def assemble_sc(components: list[BlockMatrix], L: int) -> ScCode:
    """Chain L replicas of the stacked components into H_SC.

    Replica ``d`` (1-based) occupies column groups ``(d-1)kappa .. d kappa - 1``
    and stacks H_0..H_m starting at block row ``(d-1)gamma``.
    """
    if L < 1:
        raise ValidationError(f"L must be >= 1, got {L}")
    if not components:
        raise ValidationError("need at least one component matrix")
    gamma, kappa = components[0].shape
    z = components[0].z
    m = len(components) - 1
    pm = np.full((gamma, kappa), -1, dtype=np.int64)
    cm = np.zeros((gamma, kappa), dtype=np.int64)
    for l, comp in enumerate(components):
        if comp.shape != (gamma, kappa) or comp.z != z:
            raise ValidationError("component matrices must share shape and z")
        for c in comp:
            if pm[c.row_group, c.col_group] >= 0:
                raise ValidationError(
                    f"block ({c.row_group}, {c.col_group}) appears in two components")
            pm[c.row_group, c.col_group] = l
            cm[c.row_group, c.col_group] = c.power
    if np.any(pm < 0):
        raise ValidationError("components must cover every block of the underlying code")
    params = CodeParams(gamma, kappa, z, m, L)
    entries = {}
    for d in range(L):
        for l, comp in enumerate(components):
            for c in comp:
                entries[((d + l) * gamma + c.row_group, d * kappa + c.col_group)] = c.power
    h_sc = BlockMatrix((L + m) * gamma, L * kappa, z, entries)
    replica_of = np.repeat(np.arange(1, L + 1), kappa)
    return ScCode(params, pm, cm, h_sc, replica_of)


def build_sc(cm, pm, params: CodeParams) -> ScCode:
    return assemble_sc(partition(cm, pm, params), params.L)


def code_stats(sc: ScCode) -> tuple[int, float]:
    """Code length in bits and design rate ``1 - (L+m)gamma / (L kappa)``."""
    p = sc.params
    length = p.L * p.kappa * p.z
    rate = 1.0 - (p.L + p.m) * p.gamma / (p.L * p.kappa)
    return length, rate


# ---------------------------------------------------------------- file formats

def format_grid(grid) -> str:
    grid = np.asarray(grid, dtype=np.int64)
    lines = [f"{grid.shape[0]} {grid.shape[1]}"]
    lines += [" ".join(str(v) for v in row) for row in grid]
    return "\n".join(lines) + "\n"


def parse_grid(text: str) -> tuple[np.ndarray, list[list[int]]]:
    """Parse a ``gamma kappa`` header plus gamma rows.

    Returns the grid and any trailing lines (used by mapping files for
    power overrides).
    """
    rows = [line.split() for line in text.splitlines()
            if line.strip() and not line.lstrip().startswith("#")]
    try:
        if not rows or len(rows[0]) != 2:
            raise ValidationError("grid header must be 'gamma kappa'")
        g, k = map(int, rows[0])
        if len(rows) < 1 + g:
            raise ValidationError(f"expected {g} grid rows, found {len(rows) - 1}")
        body = [[int(v) for v in r] for r in rows[1:1 + g]]
        if any(len(r) != k for r in body):
            raise ValidationError(f"every grid row must have {k} entries")
        rest = [[int(v) for v in r] for r in rows[1 + g:]]
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"non-integer entry in grid file: {exc}") from None
    return np.array(body, dtype=np.int64).reshape(g, k), rest


def load_grid(path) -> np.ndarray:
    grid, rest = parse_grid(Path(path).read_text())
    if rest:
        raise ValidationError(f"unexpected trailing lines in {path}")
    return grid


def save_code(sc: ScCode, path) -> None:
    Path(path).write_text(json.dumps(sc.to_dict(), indent=1) + "\n")


def load_code(path) -> ScCode:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not a JSON code descriptor ({exc})") from None
    return ScCode.from_dict(data)
