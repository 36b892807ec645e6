#!/usr/bin/env python3
"""
Mass matrices M(A_S) of the generalized row-access iteration

    x_{t+1} = x_t + A_S^T M(A_S) (b_S - A_S x_t)
"""

import numpy as np
from errors import DimensionError


class MassMatrix():
    """Generic update logic; subclasses supply the block solve"""

    name = None

    def __str__(self):
        return self.name

    def describe(self):
        """Parameters of the mass matrix, as stored in reports"""
        return {'mass': self.name}

    def apply_update(self, x, block):
        """One iteration on the sampled block"""
        a_block = block.a_block
        if a_block.shape[1] != x.shape[0]:
            raise DimensionError(
                'Block has {} columns but the iterate has length {}'.format(
                    a_block.shape[1], x.shape[0]))
        residual = block.b_block - a_block @ x
        return x + self.additive_term(a_block, residual)

    def additive_term(self, a_block, r_block):
        """A_S^T M(A_S) r_S, implemented by each mass matrix"""
        raise NotImplementedError

    def matrix(self, a_block):
        """Explicit k x k mass matrix, used to form W(S) and P(S)"""
        raise NotImplementedError

    def projection(self, a_block):
        """P(S) = A_S^T M(A_S) A_S"""
        return a_block.T @ self.matrix(a_block) @ a_block

    @staticmethod
    def identity(a_block):
        return np.eye(a_block.shape[0])
