#!/usr/bin/env python3
"""
Statistical least-squares problems with Gaussian rows [a^T b] ~ N(0, L L^T)
"""

import numpy as np
import scipy.linalg as sla
from denselinalg import as_vector, haar_orthogonal
from errors import ParameterError
from generator import ProblemGenerator, parse_vector
from problem import GaussianProblem
from sampler import BlockSample, make_rng


def parse_spectrum(text, n):
    """
    Singular values of L_n from a spectrum description:
    `flat` (all ones), `poly:beta` (sigma_i^2 = i^-beta),
    `exp:gamma` (sigma_i = gamma^(i-1)) or an explicit comma list
    """
    n = int(n)
    if n < 1:
        raise ParameterError('n must be at least 1')
    text = str(text).strip()
    index = np.arange(1, n + 1, dtype=np.float64)
    kind, _, value = text.partition(':')
    try:
        match kind:
            case 'flat':
                return np.ones(n)
            case 'poly':
                return index ** (-float(value) / 2.0)
            case 'exp':
                gamma = float(value)
                if not 0.0 < gamma <= 1.0:
                    raise ParameterError(
                        'exp spectrum rate must lie in (0, 1], got {}'.format(
                            gamma))
                return gamma ** (index - 1.0)
            case _:
                spectrum = np.array(parse_vector(text))
    except ValueError:
        raise ParameterError('Invalid spectrum "{}"'.format(text))
    if spectrum.shape[0] != n:
        raise ParameterError('Spectrum lists {} values but n = {}'.format(
            spectrum.shape[0], n))
    return spectrum


def demmel_condition_squared(spectrum):
    """kappa_dem^2 = sum sigma_i^2 / sigma_n^2"""
    spectrum = np.asarray(spectrum, dtype=np.float64)
    return float(np.sum(spectrum ** 2) / spectrum[-1] ** 2)


def gen_gaussian(n, spectrum, planted_x, noise_std, seed):
    """
    Gaussian problem whose statistical OLS solution is planted_x and whose
    underlying residual has norm noise_std.

    L_n is the lower-triangular factor of U diag(spectrum^2) U^T for a
    Haar-random U, obtained from the QR factorisation of diag(spectrum) U^T so
    that its singular values are the requested ones without forming the Gram
    matrix.
    """
    spectrum = as_vector(spectrum, 'spectrum')
    planted_x = as_vector(planted_x, 'planted_x')
    if spectrum.shape[0] != n or planted_x.shape[0] != n:
        raise ParameterError(
            'spectrum and planted_x must both have length n = {}'.format(n))
    if np.any(spectrum <= 0.0):
        raise ParameterError('Spectrum values must be positive')
    if np.any(np.diff(spectrum) > 0.0):
        raise ParameterError('Spectrum must be non-increasing')
    if noise_std < 0.0:
        raise ParameterError('noise_std must be nonnegative')

    rng = make_rng(seed)
    u = haar_orthogonal(n, rng)
    r_factor = sla.qr(spectrum[:, None] * u.T, mode='r')[0]
    signs = np.sign(np.diag(r_factor))
    signs[signs == 0.0] = 1.0
    l_n = (signs[:, None] * r_factor).T

    l_factor = np.zeros((n + 1, n + 1))
    l_factor[:n, :n] = l_n
    l_factor[n, :n] = l_n.T @ planted_x
    l_factor[n, n] = noise_std
    meta = {
        'n': int(n),
        'spectrum': [float(value) for value in spectrum],
        'noise_std': float(noise_std),
    }
    return GaussianProblem(l_factor, planted_x, noise_std, meta=meta)


def sample_gaussian_block(problem, k, rng):
    """k i.i.d. rows [a^T b] = z^T L^T, z ~ N(0, I_{n+1}); no indices"""
    if k < 1:
        raise ParameterError('Block size k must be at least 1')
    a_block, b_block = problem.sample_rows(k, rng)
    return BlockSample(None, a_block, b_block)


class GaussianGenerator(ProblemGenerator):
    """Streaming problem with a prescribed spectrum for L_n"""

    family = 'gaussian'

    def generate(self):
        n = self.get_parameter('n', int)
        spectrum = parse_spectrum(
            self.get_parameter('spectrum', str, 'flat'), n)
        noise_std = self.get_parameter('noise_std', float, 1e-2)
        planted = self.get_parameter('planted', parse_vector, None)
        if planted is None:
            # a separate stream keeps L_n independent of how x* is chosen
            planted = make_rng(self.seed, 1).standard_normal(n)
        problem = gen_gaussian(n, spectrum, planted, noise_std, self.seed)
        problem.meta['spectrum_spec'] = self.get_parameter(
            'spectrum', str, 'flat')
        return problem
