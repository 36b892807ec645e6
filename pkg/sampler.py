#!/usr/bin/env python3
"""
Block sampling: the BlockSample type, the Sampler base class shared by every
sampling distribution, reproducible random streams and the subset
enumeration guard
"""

import itertools
import math
import os
import numpy as np
from os import environ
from errors import EnumerationGuardError, ParameterError

DEFAULT_ENUM_GUARD = 10 ** 6


def get_variable_from_env(variable_name, default):
    """Retrieve a positive integer setting from the environment"""

    variable = environ.get(variable_name)

    if variable is None or len(variable) < 1:
        return default
    try:
        value = int(variable)
    except ValueError:
        raise ParameterError(
            'Invalid value "{}" for {}: expected a positive integer'.format(
                variable, variable_name))
    if value < 1:
        raise ParameterError(
            'Invalid value "{}" for {}: expected a positive integer'.format(
                variable, variable_name))
    return value


def enumeration_guard():
    return get_variable_from_env('ROWSOLVE_ENUM_GUARD', DEFAULT_ENUM_GUARD)


def thread_count():
    return get_variable_from_env('ROWSOLVE_THREADS', os.cpu_count() or 1)


def check_enumerable(m, k, remedy):
    """Raise EnumerationGuardError if C(m, k) exceeds the guard"""
    count = math.comb(m, k)
    guard = enumeration_guard()
    if count > guard:
        raise EnumerationGuardError(
            'C({}, {}) = {} subsets exceeds the enumeration guard of {}: {}'
            .format(m, k, count, guard, remedy))
    return count


def enumerate_subsets(m, k, remedy='reduce m or k'):
    """All k-subsets of range(m) as sorted tuples in lexicographic order"""
    check_enumerable(m, k, remedy)
    return list(itertools.combinations(range(m), k))


def make_rng(seed, stream=0):
    """
    Independent Philox generator for the (seed, stream) pair.

    Every run draws from make_rng(seed, stream) only, so a run is reproducible
    from its seed alone and concurrent runs never share a stream.
    """
    if seed is None or int(seed) < 0 or int(stream) < 0:
        raise ParameterError(
            'seed and stream must be nonnegative integers, got {} and {}'
            .format(seed, stream))
    sequence = np.random.SeedSequence([int(seed), int(stream)])
    return np.random.Generator(np.random.Philox(sequence))


class BlockSample():
    """Sampled row block: indices S (None when streamed), A_S and b_S"""

    def __init__(self, indices, a_block, b_block):
        self.indices = indices
        self.a_block = a_block
        self.b_block = b_block

    @property
    def k(self):
        return self.a_block.shape[0]

    @property
    def is_streaming(self):
        return self.indices is None


class Sampler():
    """Generic logic shared by block-sampling distributions"""

    name = None
    streaming = False

    def __init__(self, k):
        try:
            k = int(k)
        except (TypeError, ValueError):
            raise ParameterError('Block size k must be an integer')
        if k < 1:
            raise ParameterError('Block size k must be at least 1, got {}'
                                 .format(k))
        self.k = k

    def __str__(self):
        return '{}(k={})'.format(self.name, self.k)

    def describe(self):
        """Parameters of the distribution, as stored in reports"""
        return {'sampler': self.name, 'k': self.k}

    def check_problem(self, problem):
        if problem.is_streaming != self.streaming:
            raise ParameterError(
                'Sampler {} cannot draw from a {} problem'.format(
                    self.name,
                    'streaming' if problem.is_streaming else 'finite'))
        if not self.streaming and self.k > problem.m:
            raise ParameterError(
                'Block size k = {} exceeds the number of rows m = {}'.format(
                    self.k, problem.m))

    def draw(self, problem, rng):
        """Draw one block from the problem with rows copied bit-exactly"""
        self.check_problem(problem)
        indices = self.sample_indices(problem, rng)
        a_block, b_block = problem.rows(indices)
        return BlockSample(indices, a_block, b_block)

    def sample_indices(self, problem, rng):
        raise NotImplementedError

    def law(self, problem):
        """
        Exact sampling law as (subsets, probabilities), subsets being sorted
        tuples in lexicographic order
        """
        raise ParameterError(
            'Sampler {} has no enumerable law'.format(self.name))


def next_block(problem, sampler, rng):
    """Draw the next block S_t ~ rho for the iteration"""
    return sampler.draw(problem, rng)
