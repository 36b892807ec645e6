#!/usr/bin/env python3
"""
Problems whose inconsistency comes from zero-mean noise: b = A x + z
"""

import numpy as np
from bundle import load_problem
from denselinalg import as_matrix, as_vector, haar_orthogonal, qr_lstsq
from errors import DimensionError, ParameterError
from generator import ProblemGenerator
from problem import LeastSquaresProblem
from sampler import make_rng

NOISE_STREAM = 1


def gen_noisy(a, planted_x, noise_std, seed):
    """
    b = A planted_x + z with z_i ~ N(0, noise_std^2); x_star is recomputed as
    the minimal-norm OLS solution
    """
    a = as_matrix(a, 'A')
    planted_x = as_vector(planted_x, 'planted_x')
    if planted_x.shape[0] != a.shape[1]:
        raise DimensionError(
            'planted_x has length {} but A has {} columns'.format(
                planted_x.shape[0], a.shape[1]))
    if noise_std < 0.0:
        raise ParameterError('noise_std must be nonnegative')
    rng = make_rng(seed, NOISE_STREAM)
    b = a @ planted_x + noise_std * rng.standard_normal(a.shape[0])
    meta = {
        'noise_std': float(noise_std),
        'planted': [float(value) for value in planted_x],
    }
    return LeastSquaresProblem(a, b, x_star=qr_lstsq(a, b), meta=meta)


def gen_gaussian_matrix(m, n, decay, noise_std, seed):
    """
    A = G U with G i.i.d. N(0, 1); U = I when decay is 0, otherwise U has
    singular values i^-decay and Haar singular vectors
    """
    if m < 1 or n < 1:
        raise ParameterError('m and n must be at least 1')
    if decay < 0.0:
        raise ParameterError('decay must be nonnegative')
    rng = make_rng(seed)
    a = rng.standard_normal((m, n))
    if decay > 0.0:
        sigma = np.arange(1, n + 1, dtype=np.float64) ** (-decay)
        mixing = (haar_orthogonal(n, rng) * sigma) @ haar_orthogonal(n, rng).T
        a = a @ mixing
    problem = gen_noisy(a, rng.standard_normal(n), noise_std, seed)
    problem.meta.update({'m': int(m), 'n': int(n), 'decay': float(decay)})
    return problem


class NoisyGenerator(ProblemGenerator):
    """
    Zero-mean-noise problem on a Gaussian matrix, or on the matrix of an
    existing bundle given by --source
    """

    family = 'noisy'

    def generate(self):
        noise_std = self.get_parameter('noise_std', float, 1e-2)
        source = self.get_parameter('source', str, None)
        if source is None:
            return gen_gaussian_matrix(
                self.get_parameter('m', int), self.get_parameter('n', int),
                self.get_parameter('decay', float, 0.0), noise_std, self.seed)
        base = load_problem(source)
        if base.is_streaming:
            raise ParameterError('--source must be a finite problem bundle')
        planted = make_rng(self.seed).standard_normal(base.n)
        problem = gen_noisy(base.a, planted, noise_std, self.seed)
        problem.meta['source'] = source
        return problem
