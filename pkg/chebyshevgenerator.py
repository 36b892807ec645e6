#!/usr/bin/env python3
"""
Finite problems from Chebyshev polynomials evaluated on a uniform grid:
A_ij = f_j(v_i) with f_j = sum_l C_jl T_l
"""

import numpy as np
from denselinalg import haar_orthogonal, qr_lstsq
from errors import ParameterError
from generator import ProblemGenerator
from problem import LeastSquaresProblem
from sampler import make_rng

IDENTITY = 'identity'
DECAYING = 'decaying'


class ChebyshevSpec():
    """Parameters of a Chebyshev problem"""

    def __init__(self, n, m, c_kind=IDENTITY, exponent=1.0, noise_std=1e-2,
                 seed=0):
        self.n = int(n)
        self.m = int(m)
        self.c_kind = c_kind
        self.exponent = float(exponent)
        self.noise_std = float(noise_std)
        self.seed = int(seed)
        self.validate()

    def validate(self):
        if self.n < 1:
            raise ParameterError('n must be at least 1')
        if self.m < self.n:
            raise ParameterError('m = {} must be at least n = {}'.format(
                self.m, self.n))
        if self.c_kind not in (IDENTITY, DECAYING):
            raise ParameterError('Unknown coefficient kind "{}"'.format(
                self.c_kind))
        if self.exponent <= 0.0:
            raise ParameterError('Spectral decay exponent must be positive')
        if self.noise_std < 0.0:
            raise ParameterError('noise_std must be nonnegative')


def chebyshev_basis(grid, n):
    """Columns T_1(v), ..., T_n(v) by the three-term recurrence"""
    basis = np.empty((grid.shape[0], n))
    previous = np.ones_like(grid)
    current = grid.copy()
    for column in range(n):
        basis[:, column] = current
        previous, current = current, 2.0 * grid * current - previous
    return basis


def coefficient_matrix(spec, rng):
    if spec.c_kind == IDENTITY:
        return np.eye(spec.n)
    sigma = np.arange(1, spec.n + 1, dtype=np.float64) ** (-spec.exponent)
    left = haar_orthogonal(spec.n, rng)
    right = haar_orthogonal(spec.n, rng)
    return (left * sigma) @ right.T


def gen_chebyshev(spec):
    """Chebyshev problem with b = A y + z and the OLS solution stored"""
    spec.validate()
    rng = make_rng(spec.seed)
    grid = np.linspace(-1.0, 1.0, spec.m)
    c_matrix = coefficient_matrix(spec, rng)
    a = chebyshev_basis(grid, spec.n) @ c_matrix.T
    planted = rng.standard_normal(spec.n)
    b = a @ planted + spec.noise_std * rng.standard_normal(spec.m)
    meta = {
        'm': spec.m,
        'n': spec.n,
        'c_kind': spec.c_kind,
        'exponent': spec.exponent,
        'noise_std': spec.noise_std,
        'planted': [float(value) for value in planted],
    }
    return LeastSquaresProblem(a, b, x_star=qr_lstsq(a, b), meta=meta)


class ChebyshevGenerator(ProblemGenerator):
    """Chebyshev-discretized problem; --decay selects the decaying spectrum"""

    family = 'chebyshev'

    def generate(self):
        decay = self.get_parameter('decay', float, 0.0)
        spec = ChebyshevSpec(
            n=self.get_parameter('n', int),
            m=self.get_parameter('m', int),
            c_kind=DECAYING if decay > 0.0 else IDENTITY,
            exponent=decay if decay > 0.0 else 1.0,
            noise_std=self.get_parameter('noise_std', float, 1e-2),
            seed=self.seed)
        return gen_chebyshev(spec)
