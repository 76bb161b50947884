# Coupling three SC chains by relocating circulants to P and Q.
#
# Mapping values: 0 keeps a circulant, 1 moves it to P, 2 to Q. A cycle
# survives iff the alternating sum of mapping values along it is 0 mod 3.

import numpy as np

from mdsc import (BlockCycle, MdMapping, assemble_md, collect_votes, count_cycles, fixtures,
                  majority_vote_relocate, md_cycle_count, relocation_effect)

# %% the relocation rule on a single 6-cycle
seq = ((0, 0), (0, 1), (1, 1), (1, 2), (2, 2), (2, 0))
bc = BlockCycle(seq)

def grid_with(values):
    g = np.zeros((3, 3), dtype=int)
    for u, v in values.items():
        g[seq[u]] = v
    return MdMapping(g)

print(relocation_effect(bc, grid_with({})).preserved)           # True
print(relocation_effect(bc, grid_with({0: 1})).preserved)       # False, merges into an 18-cycle
print(relocation_effect(bc, grid_with({0: 1, 1: 1})).preserved) # True, signs cancel
print(relocation_effect(bc, grid_with({0: 1, 2: 1, 4: 1})).preserved)  # True, 3 = 0 mod 3

# votes of this cycle on moving (0, 0)
print(collect_votes((0, 0), [bc], grid_with({})))

# %% the shipped mapping for the first code
sc1 = fixtures.sc_code("SC-Code-1")
md1 = fixtures.md_code("MD-SC-Code-1")
print(md1.mapping.grid)
print("relocated:", md1.mapping.n_relocated)
print("H_SC  cycles-6:", count_cycles(sc1.h_sc, 6).total)
print("H_MD  cycles-6:", md_cycle_count(md1, 6))   # checked against the full matrix

# %% our own majority-voting run
trace = []
mapping = majority_vote_relocate(sc1, 6, 15, trace=trace)
for step in trace[:5]:
    print(step.target, "PQ"[step.action - 1] if step.action else "keep", step.votes)
ours = assemble_md(sc1, mapping)
print("ours:", md_cycle_count(ours, 6), "with", mapping.n_relocated, "relocations")
print("length", ours.length, "rate", round(ours.rate, 4))
