#!/usr/bin/env python3
"""
The isosceles-triangle family: three lines in the plane whose pairwise
intersections are (1+eps, 0), (1-eps, 0) and (1, 1/eps)
"""

import numpy as np
from errors import ParameterError
from generator import ProblemGenerator
from problem import LeastSquaresProblem


def gen_isosceles(epsilon):
    """A = [[0,1],[1,eps^2],[1,-eps^2]], b = (0, 1+eps, 1-eps)"""
    epsilon = float(epsilon)
    if not 0.0 < epsilon <= 1.0:
        raise ParameterError('epsilon must lie in (0, 1], got {}'.format(
            epsilon))
    eps_sq = epsilon ** 2
    a = np.array([[0.0, 1.0], [1.0, eps_sq], [1.0, -eps_sq]])
    b = np.array([0.0, 1.0 + epsilon, 1.0 - epsilon])
    # A^T A = diag(2, 1 + 2 eps^4) and A^T b = (2, 2 eps^3)
    x_star = np.array([1.0, 2.0 * epsilon ** 3 / (1.0 + 2.0 * epsilon ** 4)])
    return LeastSquaresProblem(a, b, x_star=x_star,
                               meta={'epsilon': epsilon})


def centroid(epsilon):
    """Centroid of the triangle, (1, 1/(3 eps))"""
    return np.array([1.0, 1.0 / (3.0 * epsilon)])


class IsoscelesGenerator(ProblemGenerator):

    family = 'isosceles'

    def generate(self):
        return gen_isosceles(self.get_parameter('epsilon', float))
