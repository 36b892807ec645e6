#!/usr/bin/env python3
"""
Name registries for problem families, mass matrices and samplers
"""

from chebyshevgenerator import ChebyshevGenerator
from errors import ParameterError
from gaussiangenerator import GaussianGenerator
from isoscelesgenerator import IsoscelesGenerator
from kdppsampler import KDpp, EIGEN
from loadgenerator import LoadGenerator
from msgdmass import MsgdMass
from noisygenerator import NoisyGenerator
from rbkmass import RbkMass
from reblockmass import DEFAULT_LAMBDA, ReblockMass
from streamsampler import GaussianStream
from uniformsampler import UniformSubsets

GENERATORS = {
    "gaussian": GaussianGenerator,
    "chebyshev": ChebyshevGenerator,
    "isosceles": IsoscelesGenerator,
    "noisy": NoisyGenerator,
    "load": LoadGenerator,
}

MASS_MATRICES = {
    "rbk": RbkMass,
    "reblock": ReblockMass,
    "msgd": MsgdMass,
}

SAMPLERS = {
    "uniform": UniformSubsets,
    "gaussian": GaussianStream,
    "kdpp": KDpp,
}


def names(registry):
    return ', '.join("%s" % (key) for (key, _) in registry.items())


GENERATORS_STR = names(GENERATORS)
MASS_MATRICES_STR = names(MASS_MATRICES)
SAMPLERS_STR = names(SAMPLERS)


def make_generator(family, params, seed, version):
    try:
        generator_class = GENERATORS[family]
    except KeyError:
        raise ParameterError(
            '{} not supported: family must be one of {}'.format(
                family, GENERATORS_STR))
    return generator_class(params, seed, version)


def make_mass(name, lambda_=DEFAULT_LAMBDA, eta=None, rank_tol=None):
    """Mass matrix by name with its own parameter"""
    match name:
        case 'rbk':
            return RbkMass(rank_tol)
        case 'reblock':
            return ReblockMass(lambda_)
        case 'msgd':
            return MsgdMass(eta)
        case _:
            raise ParameterError(
                '{} not supported: solver must be one of {}'.format(
                    name, MASS_MATRICES_STR))


def make_sampler(name, k, problem, lambda_=DEFAULT_LAMBDA, kdpp_mode=EIGEN):
    """
    Sampler by name; without a name, streaming problems get the Gaussian
    stream and finite problems uniform subsets
    """
    if name is None:
        name = 'gaussian' if problem.is_streaming else 'uniform'
    match name:
        case 'uniform':
            return UniformSubsets(k)
        case 'gaussian':
            return GaussianStream(k)
        case 'kdpp':
            return KDpp(k, lambda_, kdpp_mode)
        case _:
            raise ParameterError(
                '{} not supported: sampler must be one of {}'.format(
                    name, SAMPLERS_STR))
