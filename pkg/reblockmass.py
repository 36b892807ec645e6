#!/usr/bin/env python3
"""
Regularized block Kaczmarz (ReBlocK): M(A_S) = (A_S A_S^T + lambda k I)^-1,
the stochastic proximal point step

    x_{t+1} = argmin_x ||A_S x - b_S||^2 + lambda k ||x - x_t||^2
"""

import numpy as np
import scipy.linalg as sla
from denselinalg import cholesky_solve_spd
from errors import NotPositiveDefinite, ParameterError
from massmatrix import MassMatrix

DEFAULT_LAMBDA = 1e-3


class ReblockMass(MassMatrix):

    name = 'reblock'

    def __init__(self, lambda_=DEFAULT_LAMBDA):
        if not lambda_ > 0.0:
            raise ParameterError('lambda must be positive, got {}'.format(
                lambda_))
        self.lambda_ = float(lambda_)

    def describe(self):
        return {'mass': self.name, 'lambda': self.lambda_}

    def regularized_gram(self, a_block):
        k = a_block.shape[0]
        return a_block @ a_block.T + self.lambda_ * k * np.eye(k)

    def additive_term(self, a_block, r_block):
        return a_block.T @ cholesky_solve_spd(
            self.regularized_gram(a_block), r_block)

    def matrix(self, a_block):
        try:
            factor = sla.cho_factor(self.regularized_gram(a_block),
                                    lower=True)
        except np.linalg.LinAlgError as error:
            raise NotPositiveDefinite(
                'Cholesky factorisation failed: {}'.format(error))
        return sla.cho_solve(factor, self.identity(a_block))
