"""Workbench for conic degeneration bookkeeping and spectral verification.

Exact combinatorics of blown-up corner spaces, polyhomogeneous index-set
arithmetic and heat-calculus composition orders, next to numerical
Sturm-Liouville machinery verifying spectral and heat-kernel convergence of
degenerating warped-product metrics.
"""

from .symbolic import AffineExpr, MU0, N, affine
from .indexsets import (INFINITE_ORDER, IndexSet, IndexTerm, indexset_shift,
                        indexset_sum, indexset_union, leading_order)
from .corners import (BMapError, BMapSpec, BlowupCenter, CornerSpace, Face,
                      Monomial, Representative, parse_monomial)
from .spaces import (SPACE_KINDS, build_space, face_table, corner_table,
                     lift_table_rows, sc_triple_maps, published_sc_triple_maps,
                     heat_half_density_weight)

__version__ = "0.1.0"
