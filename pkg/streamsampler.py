#!/usr/bin/env python3
"""
Streaming sampler for Gaussian problems: every block is k fresh rows
"""

from gaussiangenerator import sample_gaussian_block
from sampler import Sampler


class GaussianStream(Sampler):

    name = 'gaussian'
    streaming = True

    def draw(self, problem, rng):
        self.check_problem(problem)
        return sample_gaussian_block(problem, self.k, rng)
