"""Reference codes shipped with the package.

Partitioning and power matrices of the two constituent SC code families,
the two MD mapping matrices and the post-optimized power matrix, each
stored verbatim as a grid file under ``mdsc/data``.
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

import numpy as np

from .md_coupler import MdCode, MdMapping, assemble_md
from .qc_core import CodeParams, ValidationError
from .sc_builder import ScCode, build_sc, parse_grid


def data_text(filename: str) -> str:
    return resources.files("mdsc").joinpath("data", filename).read_text()


def load_data_grid(filename: str) -> np.ndarray:
    grid, _ = parse_grid(data_text(filename))
    return grid


@dataclass(frozen=True)
class Fixture:
    name: str
    params: CodeParams
    pm_file: str
    cm_file: str
    mapping_file: str | None = None
    override_file: str | None = None
    base: str | None = None
    k: int = 6  # length of the cycles of interest


_SC1 = CodeParams(gamma=4, kappa=17, z=17, m=1, L=10)
_SC2 = CodeParams(gamma=3, kappa=19, z=23, m=2, L=10)

FIXTURES = {
    "SC-Code-1": Fixture("SC-Code-1", _SC1, "pm1.txt", "cm1.txt", k=6),
    "SC-Code-2": Fixture("SC-Code-2", _SC2, "pm2.txt", "cm2.txt", k=8),
    "SC-Code-3": Fixture("SC-Code-3", CodeParams(4, 17, 17, 1, 30), "pm1.txt", "cm1.txt", k=6),
    "SC-Code-4": Fixture("SC-Code-4", CodeParams(3, 19, 23, 2, 30), "pm2.txt", "cm2.txt", k=8),
    "MD-SC-Code-1": Fixture("MD-SC-Code-1", _SC1, "pm1.txt", "cm1.txt", "m1.txt",
                            base="SC-Code-1", k=6),
    "MD-SC-Code-2": Fixture("MD-SC-Code-2", _SC2, "pm2.txt", "cm2.txt", "m2.txt",
                            base="SC-Code-2", k=8),
    "MD-SC-Code-3": Fixture("MD-SC-Code-3", _SC2, "pm2.txt", "cm2.txt", "m2.txt",
                            override_file="cm3.txt", base="SC-Code-2", k=8),
}

# (fixture, cycle length, reference count)
TABLE1 = [
    ("SC-Code-3", 6, 91_494),
    ("MD-SC-Code-1", 6, 14_331),
    ("SC-Code-4", 8, 1_034_609),
    ("MD-SC-Code-2", 8, 280_968),
    ("MD-SC-Code-3", 8, 253_851),
]


def sc_code(name: str) -> ScCode:
    fx = FIXTURES[name]
    if fx.base is not None:
        fx = FIXTURES[fx.base]
    return build_sc(load_data_grid(fx.cm_file), load_data_grid(fx.pm_file), fx.params)


def overrides_from_powers(mapping: MdMapping, powers) -> dict:
    """Power overrides for every relocated position taken from a full power matrix."""
    powers = np.asarray(powers)
    if powers.shape != mapping.grid.shape:
        raise ValidationError(
            f"power matrix is {powers.shape} but the mapping is {mapping.grid.shape}")
    return {pos: int(powers[pos]) for pos in mapping.relocated()}


def md_code(name: str) -> MdCode:
    fx = FIXTURES[name]
    if fx.mapping_file is None:
        raise ValidationError(f"{name} is not a multi-dimensional fixture")
    sc = sc_code(name)
    mapping = MdMapping(load_data_grid(fx.mapping_file))
    if fx.override_file:
        mapping = MdMapping(mapping.grid,
                            overrides_from_powers(mapping, load_data_grid(fx.override_file)))
    return assemble_md(sc, mapping)
