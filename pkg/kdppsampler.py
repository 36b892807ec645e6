#!/usr/bin/env python3
"""
k-DPP sampling over row subsets with Pr[S] proportional to
det(A_S A_S^T + lambda k I), by exhaustive enumeration (the exact reference
law) or by the two-phase spectral algorithm
"""

import logging
import math
import numpy as np
import scipy.linalg as sla
from denselinalg import svd
from elemsym import elem_sym_table
from errors import NumericError, ParameterError
from sampler import Sampler, enumerate_subsets

ENUMERATE = 'enumerate'
EIGEN = 'eigen'
MAX_EIGEN_ROWS = 5000
CHUNK = 4096


def _check_lambda(lambda_):
    if not lambda_ > 0.0:
        raise ParameterError('lambda must be positive, got {}'.format(lambda_))


class KernelEigen():
    """Eigenpairs (q, U) of the kernel A A^T + lambda k I"""

    def __init__(self, q, u, rank):
        self.q = q
        self.u = u
        self.rank = rank


def kernel_eigen(problem, k, lambda_):
    """q_i = sigma_i^2 + lambda k for i <= rank(A), else lambda k"""
    _check_lambda(lambda_)
    if problem.m > MAX_EIGEN_ROWS:
        raise ParameterError(
            'm = {} exceeds {} rows: the dense m x m eigendecomposition is not '
            'feasible'.format(problem.m, MAX_EIGEN_ROWS))
    result = svd(problem.a)
    rank = result.rank()
    q = np.full(problem.m, lambda_ * k)
    q[:rank] += result.singular_values[:rank] ** 2
    return KernelEigen(q, result.u, rank)


def kdpp_probabilities_enumerate(problem, k, lambda_):
    """Exact k-DPP law as (subsets, probabilities) summing to 1"""
    _check_lambda(lambda_)
    subsets = enumerate_subsets(
        problem.m, k,
        'sample with --kdpp-mode eigen, or use --mode montecarlo --draws N')
    shift = lambda_ * k * np.eye(k)
    log_dets = np.empty(len(subsets))
    for start in range(0, len(subsets), CHUNK):
        index = np.array(subsets[start:start + CHUNK], dtype=np.intp)
        blocks = problem.a[index]
        grams = blocks @ blocks.transpose(0, 2, 1) + shift
        sign, log_det = np.linalg.slogdet(grams)
        if np.any(sign <= 0.0):
            raise NumericError('Non-positive kernel minor during enumeration')
        log_dets[start:start + len(index)] = log_det
    weights = np.exp(log_dets - log_dets.max())
    return subsets, weights / math.fsum(weights)


def select_eigenvectors(q, k, rng):
    """Phase one: choose k eigenvector indices of the elementary DPP"""
    table = elem_sym_table(q / q.max(), k)
    selected = []
    remaining = k
    for i in range(q.shape[0], 0, -1):
        if remaining == 0:
            break
        if i == remaining:
            take = True
        else:
            take = rng.random() < (q[i - 1] / q.max()) * \
                table[remaining - 1, i - 1] / table[remaining, i]
        if take:
            selected.append(i - 1)
            remaining -= 1
    return selected


def sample_projection_dpp(v, rng):
    """Phase two: sequential sampling from the projection kernel V V^T"""
    m = v.shape[0]
    indices = []
    while v.shape[1] > 0:
        weights = np.clip(np.sum(v ** 2, axis=1), 0.0, None)
        index = int(rng.choice(m, p=weights / weights.sum()))
        indices.append(index)
        column = int(np.argmax(np.abs(v[index])))
        pivot = v[:, column]
        v = v - np.outer(pivot / pivot[index], v[index])
        v = np.delete(v, column, axis=1)
        if v.shape[1] > 0:
            v = sla.qr(v, mode='economic')[0]
    return np.sort(np.array(indices, dtype=np.intp))


def kdpp_sample_eigen(problem, k, lambda_, rng, eigen=None):
    """Exact k-DPP draw via the kernel eigendecomposition"""
    if not 1 <= k <= problem.m:
        raise ParameterError('k = {} must lie in [1, m = {}]'.format(
            k, problem.m))
    if eigen is None:
        eigen = kernel_eigen(problem, k, lambda_)
    selected = select_eigenvectors(eigen.q, k, rng)
    return sample_projection_dpp(eigen.u[:, selected], rng)


class KDpp(Sampler):
    """k-DPP(A A^T + lambda k I) over row subsets"""

    name = 'kdpp'

    def __init__(self, k, lambda_=1e-3, mode=EIGEN):
        super().__init__(k)
        _check_lambda(lambda_)
        if mode not in (ENUMERATE, EIGEN):
            raise ParameterError('k-DPP mode must be {} or {}'.format(
                ENUMERATE, EIGEN))
        self.lambda_ = float(lambda_)
        self.mode = mode
        # per-problem precomputation, keyed by identity of the (immutable)
        # problem and holding a reference to it so ids are never reused
        self._cache = {}

    def __str__(self):
        return 'kdpp(k={}, lambda={}, mode={})'.format(
            self.k, self.lambda_, self.mode)

    def describe(self):
        return {'sampler': self.name, 'k': self.k,
                'kdpp_lambda': self.lambda_, 'kdpp_mode': self.mode}

    def _cached(self, problem, build):
        entry = self._cache.get(id(problem))
        if entry is None or entry[0] is not problem:
            logging.debug('Preparing {} for a {}x{} problem'.format(
                self, problem.m, problem.n))
            entry = (problem, build())
            self._cache[id(problem)] = entry
        return entry[1]

    def sample_indices(self, problem, rng):
        if self.mode == ENUMERATE:
            subsets, probabilities = self._cached(
                problem, lambda: kdpp_probabilities_enumerate(
                    problem, self.k, self.lambda_))
            choice = int(rng.choice(len(subsets), p=probabilities))
            return np.array(subsets[choice], dtype=np.intp)
        eigen = self._cached(
            problem, lambda: kernel_eigen(problem, self.k, self.lambda_))
        return kdpp_sample_eigen(problem, self.k, self.lambda_, rng, eigen)

    def law(self, problem):
        self.check_problem(problem)
        return kdpp_probabilities_enumerate(problem, self.k, self.lambda_)
