#!/usr/bin/env python3
"""
Randomized block Kaczmarz: M(A_S) = (A_S A_S^T)^+
"""

from denselinalg import gram_pseudoinverse, qr_lstsq, row_space_projector
from errors import ParameterError
from massmatrix import MassMatrix


class RbkMass(MassMatrix):
    """Projection onto the solution set of the sampled block"""

    name = 'rbk'

    def __init__(self, rank_tol=None):
        if rank_tol is not None and not 0.0 < rank_tol < 1.0:
            raise ParameterError('rank_tol must lie in (0, 1)')
        self.rank_tol = rank_tol

    def describe(self):
        return {'mass': self.name, 'rank_tol': self.rank_tol}

    def additive_term(self, a_block, r_block):
        # A_S^T (A_S A_S^T)^+ r_S = A_S^+ r_S
        return qr_lstsq(a_block, r_block, self.rank_tol)

    def matrix(self, a_block):
        return gram_pseudoinverse(a_block, self.rank_tol)

    def projection(self, a_block):
        # built from the SVD of A_S so nearly parallel rows keep their digits
        return row_space_projector(a_block, self.rank_tol)
