# Circulant-based block matrices and their binary expansion.
#
# A block matrix stores one power per nonzero z x z block. Power f places
# ones at (r, (r + f) mod z).

import numpy as np

from mdsc import BlockMatrix, block_degrees, expand

# %% a 2 x 3 grid of circulants with z = 3
H = BlockMatrix.from_dense([[0, 1, 2],
                            [2, 0, 1]], z=3)
print(H)
print(H.to_dense())

# %% expansion: each block becomes a shifted identity
B = expand(H).toarray()
print(B)
print("row weights", B.sum(axis=1))   # kappa = 3 everywhere
print("col weights", B.sum(axis=0))   # gamma = 2 everywhere

# %% blocks per block row and column
rows, cols = block_degrees(H)
print(rows, cols)

# %% a zero block is written as -1 in the dense view
H2 = BlockMatrix.from_dense([[0, -1], [4, 1]], z=5)
print(expand(H2).nnz, "ones =", 5, "x", len(H2), "blocks")

# the text format is a header then one "i j f" line per block
from mdsc.qc_core import format_block_matrix
print(format_block_matrix(H2))
