# Counting short cycles without building the Tanner graph.
#
# Cycles are found as closed walks over circulants; a walk only lifts to
# cycles when its alternating power sum vanishes mod z.

import time

from mdsc import (BlockMatrix, count_cycles, cycles_through_replica, enumerate_block_cycles,
                  expand, fixtures, girth, lifted_count)

# %% the smallest case: a 2 x 2 grid
bm = BlockMatrix.from_dense([[0, 0], [0, 1]], z=5)
(bc,) = enumerate_block_cycles(bm, 4)
print(bc.seq, "lifts to", lifted_count(bm, bc), "cycles")   # sum is -1, so none

bm = BlockMatrix.from_dense([[0, 0], [0, 0]], z=5)
print("all-zero powers:", count_cycles(bm, 4).total)        # z disjoint 4-cycles

# %% the first shipped code
sc1 = fixtures.sc_code("SC-Code-1")
print("girth", girth(sc1.h_sc, 10))
census = count_cycles(sc1.h_sc, 6)
print(census.total, "cycles-6 in", len(census), "walk classes")

# which underlying circulants take part most often
part = census.participation(fold=sc1.base_position)
worst = sorted(part.items(), key=lambda kv: -kv[1])[:5]
print(worst)

# %% the census around the middle replica is what relocation works on
mid = cycles_through_replica(sc1, 6, sc1.middle_replica)
print("through replica", sc1.middle_replica, ":", mid.total)

# %% larger codes
for name, k in (("SC-Code-3", 6), ("SC-Code-4", 8)):
    t = time.time()
    total = count_cycles(fixtures.sc_code(name).h_sc, k).total
    print(f"{name}: {total:,} cycles-{k} ({time.time() - t:.1f} s)")

print(expand(sc1.h_sc).shape)
