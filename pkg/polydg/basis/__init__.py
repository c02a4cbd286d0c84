from polydg.basis.legendre import EdgeLegendreBasis, eval_edge_basis
from polydg.basis.monomials import (
    ScaledMonomialBasis,
    basis_dimension,
    eval_cell_basis,
    multi_indices,
)
from polydg.basis.quadrature import QuadratureRule, gauss_edge_rule, triangle_rule
