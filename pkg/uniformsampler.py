#!/usr/bin/env python3
"""
Uniform sampling over all k-subsets of the rows
"""

import numpy as np
from errors import ParameterError
from sampler import Sampler, enumerate_subsets


def sample_uniform_subset(m, k, rng):
    """Sorted k-subset of range(m), each subset with probability 1/C(m, k)"""
    if not 1 <= k <= m:
        raise ParameterError(
            'Cannot sample a {}-subset of {} rows'.format(k, m))
    # Generator.choice without replacement draws by partial shuffle or, for
    # small k relative to m, by Floyd-style rejection into a set
    return np.sort(rng.choice(m, size=k, replace=False))


class UniformSubsets(Sampler):
    """U(m, k): uniform distribution over row subsets of size k"""

    name = 'uniform'

    def sample_indices(self, problem, rng):
        return sample_uniform_subset(problem.m, self.k, rng)

    def law(self, problem):
        self.check_problem(problem)
        subsets = enumerate_subsets(
            problem.m, self.k, 'use --mode montecarlo --draws N')
        probabilities = np.full(len(subsets), 1.0 / len(subsets))
        return subsets, probabilities
