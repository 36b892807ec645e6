#!/usr/bin/env python3
"""
Generic logic to build, check, describe and persist a problem family
"""

import logging
from bundle import save_problem
from denselinalg import condition_number
from errors import ParameterError

REQUIRED = object()


class ProblemGenerator():
    """Base class: one subclass per problem family"""

    family = None

    def __init__(self, params, seed, version):
        """Save generator parameters (a plain dict, e.g. parsed CLI options)"""
        self.params = params
        self.seed = seed
        self.version = version

    def run(self, out_dir):
        """Build the problem, write its bundle and print a summary"""
        logging.info('Generating {} problem (seed {})'.format(
            self.family, self.seed))
        problem = self.generate()
        if not problem.is_streaming:
            problem.check_normal_equations()
        problem.meta.update({
            'family': self.family,
            'seed': self.seed,
            'version': self.version,
        })
        save_problem(problem, out_dir)
        for line in self.describe(problem):
            print(line)
        return problem

    def generate(self):
        """Family-specific construction, implemented by each subclass"""
        raise NotImplementedError

    @staticmethod
    def describe(problem):
        """Summary lines: sizes, conditioning and residual norm if known"""
        if problem.is_streaming:
            return [
                'n = {}'.format(problem.n),
                'kappa(L_n) = {:.6e}'.format(condition_number(problem.l_n)),
                'noise_std = {:.6e}'.format(problem.noise_std),
            ]
        lines = [
            'm = {}'.format(problem.m),
            'n = {}'.format(problem.n),
            'kappa(A) = {:.6e}'.format(condition_number(problem.a)),
        ]
        if problem.residual_norm is not None:
            lines.append('||r|| = {:.6e}'.format(problem.residual_norm))
        return lines

    def get_parameter(self, name, cast, default=REQUIRED):
        """Retrieve and convert a generator parameter"""

        value = self.params.get(name)

        if value is None:
            if default is REQUIRED:
                raise ParameterError(
                    'Error generating {} problem: missing value for {}'.format(
                        self.family, name))
            return default
        try:
            return cast(value)
        except (TypeError, ValueError):
            raise ParameterError(
                'Error generating {} problem: invalid value "{}" for {}'
                .format(self.family, value, name))


def parse_vector(text):
    """Comma-separated floats, or a list passed through from JSON"""
    if isinstance(text, (list, tuple)):
        return [float(value) for value in text]
    return [float(value) for value in str(text).split(',') if value.strip()]
