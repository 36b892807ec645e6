#!/usr/bin/env python3
"""
Minibatch SGD with constant step size: M(A_S) = (eta / k) I
"""

from errors import ParameterError
from massmatrix import MassMatrix


class MsgdMass(MassMatrix):

    name = 'msgd'

    def __init__(self, step_size):
        if step_size is None or not step_size > 0.0:
            raise ParameterError(
                'mSGD needs a positive step size (--eta or --tune-eta)')
        self.step_size = float(step_size)

    def describe(self):
        return {'mass': self.name, 'eta': self.step_size}

    def additive_term(self, a_block, r_block):
        return (self.step_size / a_block.shape[0]) * (a_block.T @ r_block)

    def matrix(self, a_block):
        return (self.step_size / a_block.shape[0]) * self.identity(a_block)
