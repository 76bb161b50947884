"""Spatially-coupled and multi-dimensional SC LDPC code construction.

Circulant-based SC codes, algebraic short-cycle counting, informed
relocation of circulants across three coupled chains, circulant power
post-optimization, and AWGN BER simulation.
"""
from .qc_core import (BlockMatrix, Circulant, CodeParams, ValidationError, block_degrees,
                      expand, load_block_matrix, read_alist, save_block_matrix, write_alist)
from .sc_builder import ScCode, assemble_sc, build_sc, code_stats, partition
from .cycle_engine import (BlockCycle, CycleCensus, count_cycles, count_lifted,
                           cycles_through_replica, enumerate_block_cycles, girth, lifted_count)
from .md_coupler import (ConsistencyError, MdCode, MdMapping, RelocationOutcome, VoteTally,
                         assemble_md, collect_votes, girth_bound_check,
                         majority_vote_relocate, md_cycle_count, pp_cpo, relocation_effect)
from .ber_sim import BerPoint, ChannelConfig, DecoderConfig, simulate, syndrome_check

__version__ = "0.1.0"
