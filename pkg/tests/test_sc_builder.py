import numpy as np
import pytest

from conftest import TOY_CM, TOY_PARAMS, TOY_PM
from mdsc import fixtures
from mdsc.qc_core import BlockMatrix, CodeParams, ValidationError, expand
from mdsc.sc_builder import (ScCode, assemble_sc, build_sc, code_stats, format_grid,
                             parse_grid, partition)


def test_toy_partition():
    h0, h1 = partition(TOY_CM, TOY_PM, TOY_PARAMS)
    assert set(h0.entries) == {(0, 0), (0, 2), (1, 1)}
    assert set(h1.entries) == {(0, 1), (1, 0), (1, 2)}


def test_zero_pm_puts_everything_in_h0():
    comps = partition(TOY_CM, np.zeros((2, 3), int), TOY_PARAMS)
    assert len(comps[0]) == 6 and len(comps[1]) == 0


def test_pm_entry_above_memory():
    with pytest.raises(ValidationError):
        partition(TOY_CM, np.full((2, 3), 2), TOY_PARAMS)


def test_toy_shape(toy):
    assert toy.h_sc.shape == (8, 9)


def test_band_structure(toy):
    p = TOY_PARAMS
    for c in toy.h_sc:
        d = c.col_group // p.kappa + 1
        i0, j0 = toy.base_position(c.row_group, c.col_group)
        assert c.row_group == (d - 1 + TOY_PM[i0, j0]) * p.gamma + i0
        assert c.power == TOY_CM[i0, j0]
    for d in range(1, p.L + 1):
        cols = toy.replica_columns(d)
        pos = {toy.base_position(c.row_group, c.col_group)
               for c in toy.h_sc if c.col_group in cols}
        assert len(pos) == p.gamma * p.kappa


def test_sc1_size(sc1):
    assert expand(sc1.h_sc).shape == (748, 2890)
    assert fixtures.load_data_grid("pm1.txt")[0, 0] == 0
    assert sc1.pm[0, 0] == 0


@pytest.mark.parametrize("name,length,rate", [
    ("SC-Code-1", 2890, 0.74), ("SC-Code-2", 4370, 0.81),
    ("SC-Code-3", 8670, 0.76), ("SC-Code-4", 13110, 0.83)])
def test_code_stats(name, length, rate):
    n, r = code_stats(fixtures.sc_code(name))
    assert n == length and abs(r - rate) < 0.005


def test_exact_rates():
    assert round(code_stats(fixtures.sc_code("SC-Code-2"))[1], 4) == 0.8105
    assert round(code_stats(fixtures.sc_code("SC-Code-3"))[1], 4) == 0.7569


def test_l1_is_vertical_stack():
    params = CodeParams(2, 3, 3, 1, 1)
    sc = build_sc(TOY_CM, TOY_PM, params)
    h0, h1 = partition(TOY_CM, TOY_PM, params)
    expect = {**h0.entries, **{(i + 2, j): f for (i, j), f in h1.entries.items()}}
    assert sc.h_sc.shape == (4, 3) and sc.h_sc.entries == expect


def test_rate_limit():
    r = [code_stats(build_sc(TOY_CM, TOY_PM, CodeParams(2, 3, 3, 1, L)))[1]
         for L in (10, 100, 10000)]
    assert r[0] < r[1] < r[2] < 1 - 2 / 3 and abs(r[2] - 1 / 3) < 1e-3


def test_assemble_rejects_overlap():
    a = BlockMatrix(2, 3, 3, {(0, 0): 0})
    with pytest.raises(ValidationError):
        assemble_sc([a, a], 2)


def test_middle_replica(sc1):
    assert sc1.middle_replica == 5
    with pytest.raises(ValidationError):
        sc1.replica_columns(11)


def test_descriptor_roundtrip(sc2):
    back = ScCode.from_dict(sc2.to_dict())
    assert back.h_sc == sc2.h_sc and back.params == sc2.params


def test_grid_roundtrip_and_errors():
    g, rest = parse_grid(format_grid(TOY_PM))
    assert np.array_equal(g, TOY_PM) and rest == []
    for bad in ["2\n", "2 3\n1 2 3\n", "1 3\n1 2\n", "1 2\na b\n"]:
        with pytest.raises(ValidationError):
            parse_grid(bad)


def test_fixture_files_byte_match():
    # shapes and relocation counts of the shipped matrices
    m1 = fixtures.load_data_grid("m1.txt")
    m2 = fixtures.load_data_grid("m2.txt")
    assert m1.shape == (4, 17) and m2.shape == (3, 19)
    assert int((m1 != 0).sum()) == 15 and int((m2 != 0).sum()) == 12
    cm1, cm3 = fixtures.load_data_grid("cm1.txt"), fixtures.load_data_grid("cm3.txt")
    assert cm3.shape == cm1.shape
    assert set(zip(*np.nonzero(cm3 != cm1))) <= set(zip(*np.nonzero(m1)))
