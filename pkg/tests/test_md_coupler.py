import numpy as np
import pytest

from conftest import TOY_CM, TOY_PARAMS, TOY_PM
from oracles import trace_block_walk
from mdsc import fixtures
from mdsc.cycle_engine import BlockCycle, count_cycles, cycles_through_replica
from mdsc.md_coupler import (ConsistencyError, MdCode, MdMapping, VoteTally, assemble_md,
                             collect_votes, girth_bound_check, majority_vote_relocate,
                             md_cycle_count, md_cycle_count_fast, pp_cpo, relocation_effect)
from mdsc.qc_core import CodeParams, ValidationError, expand
from mdsc.sc_builder import build_sc

# a 12-walk over a 6x6 grid so distances up to 11 are available
SEQ12 = tuple((u // 2, (u + 1) // 2 % 6) for u in range(12))


def mapping_on(seq, values, shape=(6, 6)):
    grid = np.zeros(shape, dtype=int)
    for u, v in values.items():
        grid[seq[u]] = v
    return MdMapping(grid)


def effect(values):
    return relocation_effect(BlockCycle(SEQ12), mapping_on(SEQ12, values))


def test_seq12_is_alternating():
    for u in range(12):
        a, b = SEQ12[u], SEQ12[(u + 1) % 12]
        assert a[u % 2] == b[u % 2]
    assert len(set(SEQ12)) == 12


def test_zero_mapping_preserves():
    assert effect({}).preserved


@pytest.mark.parametrize("u,v", [(0, 1), (0, 2)])
def test_single_relocation_removes(u, v):
    assert not effect({u: 1}).preserved
    assert not effect({u: 2}).preserved


def test_adjacent_pair_to_p_preserves():
    assert effect({3: 1, 4: 1}).preserved
    assert effect({0: 2, 11: 2}).preserved


@pytest.mark.parametrize("n", range(1, 7))
def test_even_distances(n):
    values = {2 * a: 1 for a in range(n)}
    assert effect(values).preserved == (n % 3 == 0)


@pytest.mark.parametrize("n", [2, 4, 6])
def test_consecutive_odd_distances(n):
    assert effect({u: 1 for u in range(n)}).preserved


def test_delta_values():
    assert effect({0: 1}).delta == 1
    assert effect({1: 1}).delta == 2
    assert effect({0: 2, 2: 2}).delta == 1


# ------------------------------------------------------------------ votes

def test_scenario_1_fresh_cycle():
    tally = collect_votes(SEQ12[0], [BlockCycle(SEQ12)], MdMapping(np.zeros((6, 6), int)))
    assert tally == VoteTally(to_p=1, to_q=1, keep=0)


def test_scenario_2_triple_appearance():
    seq = list(SEQ12)
    seq[4] = seq[8] = seq[0]
    tally = collect_votes(seq[0], [BlockCycle(tuple(seq))], MdMapping(np.zeros((6, 6), int)))
    assert tally == VoteTally(0, 0, 0)


def test_scenario_3_prior_relocation():
    mapping = mapping_on(SEQ12, {2: 1})
    tally = collect_votes(SEQ12[0], [BlockCycle(SEQ12)], mapping)
    assert tally == VoteTally(to_p=1, to_q=0, keep=1)


def test_votes_ignore_cycles_without_target_and_sum():
    other = BlockCycle(tuple((i + 6, j) for i, j in SEQ12))
    m = MdMapping(np.zeros((12, 6), int))
    assert collect_votes(SEQ12[0], [BlockCycle(SEQ12), other], m) == VoteTally(1, 1, 0)
    assert VoteTally(1, 2, 3) + VoteTally(1, 1, 1) == VoteTally(2, 3, 4)


def test_votes_on_relocated_target_rejected():
    with pytest.raises(ValidationError):
        collect_votes(SEQ12[0], [BlockCycle(SEQ12)], mapping_on(SEQ12, {0: 1}))


def test_each_cycle_votes_at_most_twice():
    rng = np.random.default_rng(0)
    for _ in range(100):
        grid = rng.integers(0, 3, (6, 6))
        grid[SEQ12[0]] = 0
        t = collect_votes(SEQ12[0], [BlockCycle(SEQ12)], MdMapping(grid))
        assert t.to_p + t.to_q + t.keep == 2


# --------------------------------------------------------------- assembly

def test_toy_single_relocation(toy):
    grid = np.zeros((2, 3), int)
    grid[1, 0] = 1
    mdc = assemble_md(toy, MdMapping(grid))
    expected = {((d + TOY_PM[1, 0]) * 2 + 1, d * 3): int(TOY_CM[1, 0]) for d in range(3)}
    assert mdc.p.entries == expected
    assert len(mdc.q) == 0
    assert set(mdc.h_prime.entries).isdisjoint(expected)
    assert len(mdc.h_prime) + len(mdc.p) == len(toy.h_sc)
    nr, nc = toy.h_sc.shape
    for (i, j), f in expected.items():
        # P sits below-left of the diagonal: tiles (1,0), (2,1), (0,2)
        for a, b in ((1, 0), (2, 1), (0, 2)):
            assert mdc.h_md[(a * nr + i, b * nc + j)] == f


def test_zero_mapping_block_diagonal(sc1):
    mdc = assemble_md(sc1, MdMapping.zeros(4, 17))
    assert len(mdc.p) == len(mdc.q) == 0
    nr, nc = sc1.h_sc.shape
    expect = {(a * nr + i, a * nc + j): f for a in range(3)
              for (i, j), f in sc1.h_sc.entries.items()}
    assert mdc.h_md.entries == expect


def test_md1_dimensions(md1):
    assert md1.length == 8670 and abs(md1.rate - 0.74) < 0.005
    assert md1.h_md.shape == (3 * 11 * 4, 3 * 10 * 17)
    supports = [set(m.entries) for m in (md1.h_prime, md1.p, md1.q)]
    assert sum(map(len, supports)) == len(set().union(*supports)) == len(md1.base.h_sc)


def test_override_rules(sc1, md1):
    pos = md1.mapping.relocated()[0]
    with pytest.raises(ValidationError):
        MdMapping(md1.mapping.grid, {(0, 0) if md1.mapping.grid[0, 0] == 0 else (0, 1): 3})
    with pytest.raises(ValidationError):
        assemble_md(sc1, MdMapping(md1.mapping.grid, {pos: 17}))
    new = (int(sc1.cm[pos]) + 1) % 17
    mdc = assemble_md(sc1, MdMapping(md1.mapping.grid, {pos: new}))
    moved = [f for (i, j), f in {**mdc.p.entries, **mdc.q.entries}.items()
             if sc1.base_position(i, j) == pos]
    assert moved and set(moved) == {new}
    assert mdc.h_prime == md1.h_prime


def test_mapping_validation_and_text_roundtrip(tmp_path, md1):
    with pytest.raises(ValidationError):
        MdMapping(np.array([[0, 3]]))
    m = MdMapping(md1.mapping.grid, {md1.mapping.relocated()[0]: 5})
    m.save(tmp_path / "m.txt")
    assert MdMapping.load(tmp_path / "m.txt") == m
    with pytest.raises(ValidationError):
        assemble_md(fixtures.sc_code("SC-Code-2"), m)


def test_descriptor_roundtrip(md1):
    back = MdCode.from_dict(md1.to_dict())
    assert back.h_md == md1.h_md


# ------------------------------------------- mod-3 rule against the matrix

def small_sc_codes():
    rng = np.random.default_rng(1)
    out = []
    while len(out) < 4:
        g = int(rng.integers(2, 4))
        kappa = int(rng.integers(g + 1, 6))
        z = int(rng.integers(2, 5))
        m = int(rng.integers(1, 3))
        L = int(rng.integers(2, 4))
        if (L + m) * g * z > 60:
            continue
        sc = build_sc(rng.integers(0, z, (g, kappa)), rng.integers(0, m + 1, (g, kappa)),
                      CodeParams(g, kappa, z, m, L))
        if count_cycles(sc.h_sc, 6).total and count_cycles(sc.h_sc, 8).total:
            out.append(sc)
    return out


def test_relocation_effect_matches_assembled_matrix():
    rng = np.random.default_rng(2)
    n_mappings = 0
    for sc in small_sc_codes():
        censuses = [count_cycles(sc.h_sc, k) for k in (4, 6, 8)]
        nr, nc = sc.h_sc.shape
        for _ in range(60):
            mapping = MdMapping(rng.integers(0, 3, (sc.params.gamma, sc.params.kappa)))
            mdc = assemble_md(sc, mapping)
            H = expand(mdc.h_md)
            for census in censuses:
                for bc in census.block_cycles:
                    nodes = trace_block_walk(H, sc.params.z, nr, nc, bc.seq)
                    closes = nodes[-1] == nodes[0]
                    assert closes == relocation_effect(bc, mapping, sc).preserved
                    if not closes:
                        # the three copies merge into one walk of length 3k
                        long = trace_block_walk(H, sc.params.z, nr, nc, bc.seq, rounds=3)
                        assert long[-1] == long[0]
                        assert len(set(long[:-1])) == 3 * bc.k
            n_mappings += 1
    assert n_mappings >= 200


def test_md_counts_on_small_codes():
    rng = np.random.default_rng(4)
    for sc in small_sc_codes():
        for _ in range(10):
            mapping = MdMapping(rng.integers(0, 3, (sc.params.gamma, sc.params.kappa)))
            mdc = assemble_md(sc, mapping)
            for k in (4, 6, 8):
                census = count_cycles(sc.h_sc, k)
                kept = sum(int(w) for bc, w in zip(census.block_cycles, census.weights)
                           if relocation_effect(bc, mapping, sc).preserved)
                n = md_cycle_count(mdc, k)
                assert n % 3 == 0
                # each preserved cycle lifts to three; with shorter cycles in H_SC,
                # non-simple walks of H_SC can also become cycles of the coupled code
                assert n >= 3 * kept
                if all(count_cycles(sc.h_sc, s).total == 0 for s in range(4, k, 2)):
                    assert n == 3 * kept
                assert md_cycle_count(assemble_md(sc, mapping.swapped()), k) == n


# ------------------------------------------------- coupling invariants

def test_zero_mapping_triples_count(sc1):
    mdc = assemble_md(sc1, MdMapping.zeros(4, 17))
    assert md_cycle_count(mdc, 6) == 3 * count_cycles(sc1.h_sc, 6).total


def test_swap_symmetry_fixture(sc1, md1):
    swapped = assemble_md(sc1, md1.mapping.swapped())
    for k in (4, 6):
        assert md_cycle_count(swapped, k) == md_cycle_count(md1, k)


def test_fast_equals_direct_md1(md1):
    assert md_cycle_count_fast(md1, 6) == count_cycles(md1.h_md, 6).total == 14331


def test_md1_count_is_three_per_preserved_cycle(md1, sc1):
    census = count_cycles(sc1.h_sc, 6)
    kept = sum(int(w) for bc, w in zip(census.block_cycles, census.weights)
               if relocation_effect(bc, md1.mapping, sc1).preserved)
    assert 3 * kept == 14331


def test_consistency_trap(md1, monkeypatch):
    import mdsc.md_coupler as mc
    monkeypatch.setattr(mc, "md_cycle_count_fast", lambda mdc, k, workers=None: 1)
    with pytest.raises(ConsistencyError):
        mc.md_cycle_count(md1, 6)


# ---------------------------------------------------------- majority voting

def test_zero_budget_is_identity(sc1):
    assert majority_vote_relocate(sc1, 6, 0).n_relocated == 0


def test_budget_clamped(toy):
    with pytest.warns(UserWarning):
        majority_vote_relocate(toy, 6, 100)


def test_incremental_bookkeeping_matches_recount(sc1):
    trace = []
    mapping = majority_vote_relocate(sc1, 6, 15, trace=trace)
    assert 0 < mapping.n_relocated <= 15
    census = cycles_through_replica(sc1, 6, sc1.middle_replica)
    grid = np.zeros((4, 17), int)
    for step, nxt in zip(trace, trace[1:]):
        grid[step.target] = step.action
        m = MdMapping(grid)
        active = sum(int(w) for bc, w in zip(census.block_cycles, census.weights)
                     if relocation_effect(bc, m, sc1).preserved)
        assert active == nxt.active_cycles
    relocated = [s for s in trace if s.action]
    assert sorted(s.target for s in relocated) == mapping.relocated()
    parts = [s.participation for s in trace]
    assert parts[0] == max(parts)


# ------------------------------------------------------------------ PP CPO

def test_pp_cpo_no_relocations(sc1):
    mdc = assemble_md(sc1, MdMapping.zeros(4, 17))
    assert pp_cpo(mdc, 6) == mdc.mapping


def test_pp_cpo_md1(md1, sc1):
    before = md_cycle_count(md1, 6)
    mapping = pp_cpo(md1, 6)
    assert set(mapping.power_overrides) <= set(md1.mapping.relocated())
    assert np.array_equal(mapping.grid, md1.mapping.grid)
    opt = assemble_md(sc1, mapping)
    assert md_cycle_count(opt, 4) == 0
    assert md_cycle_count(opt, 6) <= before


def test_pp_cpo_requires_no_short_cycles():
    sc = next(c for c in small_sc_codes() if count_cycles(c.h_sc, 4).total)
    grid = np.zeros((sc.params.gamma, sc.params.kappa), int)
    grid[0, 0] = 1
    mdc = assemble_md(sc, MdMapping(grid))
    assert md_cycle_count(mdc, 4) > 0
    with pytest.raises(ValidationError):
        pp_cpo(mdc, 8)


# ------------------------------------------------------------ girth check

def test_girth_bound_md1(md1):
    report = girth_bound_check(md1, 8)
    assert report["ok"] and report["girth_md"] >= 6 and report["merged_cycle_checked"]


def test_girth_bound_small_instance():
    for sc in small_sc_codes():
        g = next(k for k in (4, 6, 8) if count_cycles(sc.h_sc, k).total)
        rng = np.random.default_rng(8)
        for _ in range(5):
            mdc = assemble_md(sc, MdMapping(rng.integers(0, 3, (sc.params.gamma,
                                                                 sc.params.kappa))))
            report = girth_bound_check(mdc, 8)
            assert report["girth_ok"]
            assert report["merged_cycle_checked"] in (True, None)
            if report["merged_cycle_checked"]:
                assert report["girth_sc"] == g
