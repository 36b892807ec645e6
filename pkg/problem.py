#!/usr/bin/env python3
"""
Least-squares problem types: finite problems held as (A, b) and the
streaming statistical problem defined by a Gaussian covariance factor
"""

import numpy as np
from denselinalg import as_matrix, as_vector, qr_lstsq, singular_values
from errors import DimensionError, NumericError, ParameterError

NORMAL_EQUATIONS_TOL = 1e-8


class LeastSquaresProblem():
    """Finite problem min ||Ax - b||^2 with optional known OLS solution"""

    is_streaming = False

    def __init__(self, a, b, x_star=None, residual_norm=None, meta=None):
        self.a = as_matrix(a, 'A')
        self.b = as_vector(b, 'b')
        if self.b.shape[0] != self.a.shape[0]:
            raise DimensionError(
                'b has length {} but A has {} rows'.format(
                    self.b.shape[0], self.a.shape[0]))
        self.x_star = None
        if x_star is not None:
            self.x_star = as_vector(x_star, 'x_star')
            if self.x_star.shape[0] != self.n:
                raise DimensionError(
                    'x_star has length {} but A has {} columns'.format(
                        self.x_star.shape[0], self.n))
            if residual_norm is None:
                residual_norm = float(np.linalg.norm(self.residual(self.x_star)))
        self.residual_norm = residual_norm
        self.meta = dict(meta or {})

    @property
    def m(self):
        return self.a.shape[0]

    @property
    def n(self):
        return self.a.shape[1]

    @property
    def family(self):
        return self.meta.get('family', 'unknown')

    def rows(self, indices):
        """Rows of A and b at the given indices, copied bit-exactly"""
        index = np.asarray(indices, dtype=np.intp)
        return self.a[index], self.b[index]

    def residual(self, x):
        return self.b - self.a @ x

    def relative_residual(self, x):
        b_norm = np.linalg.norm(self.b)
        r_norm = np.linalg.norm(self.residual(x))
        return float(r_norm / b_norm) if b_norm > 0 else float(r_norm)

    def relative_error(self, x):
        """||x - x*|| / ||x*||, or None when x* is unknown"""
        if self.x_star is None:
            return None
        x_norm = np.linalg.norm(self.x_star)
        error = np.linalg.norm(x - self.x_star)
        return float(error / x_norm) if x_norm > 0 else float(error)

    def ols_solution(self):
        """Minimal-norm OLS solution, computed when not stored"""
        if self.x_star is not None:
            return self.x_star
        return qr_lstsq(self.a, self.b)

    def check_normal_equations(self):
        """Raise NumericError if the stored x* violates A^T(Ax* - b) = 0"""
        if self.x_star is None:
            return
        gap = np.linalg.norm(self.a.T @ (self.a @ self.x_star - self.b))
        sigma = singular_values(self.a)
        a_norm = sigma[0] if sigma.size else 0.0
        limit = NORMAL_EQUATIONS_TOL * a_norm * np.linalg.norm(self.b)
        if gap > limit:
            raise NumericError(
                'Stored x_star violates the normal equations: '
                '||A^T(Ax*-b)|| = {:.3e} > {:.3e}'.format(gap, limit))


class GaussianProblem():
    """
    Statistical problem whose rows [a^T b] are drawn from N(0, L L^T).

    L = [[L_n, 0], [(L_n^T x*)^T, noise_std]] so that b = a^T x* + noise_std * z
    with z independent of a; x* is the statistical OLS solution and
    noise_std the norm of the underlying residual.
    """

    is_streaming = True

    def __init__(self, l_factor, x_star, noise_std, meta=None):
        self.l_factor = as_matrix(l_factor, 'L')
        size = self.l_factor.shape[0]
        if self.l_factor.shape[1] != size or size < 2:
            raise DimensionError('L must be square of size n + 1 >= 2')
        if np.any(np.triu(self.l_factor, 1) != 0.0):
            raise ParameterError('L must be lower-triangular')
        self.x_star = as_vector(x_star, 'x_star')
        if self.x_star.shape[0] != size - 1:
            raise DimensionError('x_star must have length n = {}'.format(
                size - 1))
        if noise_std < 0:
            raise ParameterError('noise_std must be nonnegative')
        self.noise_std = float(noise_std)
        self.meta = dict(meta or {})

    @property
    def n(self):
        return self.l_factor.shape[0] - 1

    @property
    def l_n(self):
        return self.l_factor[:self.n, :self.n]

    @property
    def family(self):
        return self.meta.get('family', 'gaussian')

    @property
    def residual_norm(self):
        return self.noise_std

    def covariance(self):
        return self.l_factor @ self.l_factor.T

    def spectrum(self):
        """Singular values of L_n in non-increasing order"""
        return singular_values(self.l_n)

    def sample_rows(self, count, rng):
        """count i.i.d. rows z^T L^T with z ~ N(0, I_{n+1})"""
        z = rng.standard_normal((count, self.n + 1))
        rows = z @ self.l_factor.T
        return rows[:, :self.n], rows[:, self.n]

    def relative_error(self, x):
        x_norm = np.linalg.norm(self.x_star)
        error = np.linalg.norm(x - self.x_star)
        return float(error / x_norm) if x_norm > 0 else float(error)

    def ols_solution(self):
        return self.x_star
