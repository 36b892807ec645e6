#!/usr/bin/env python3
"""
Dense double-precision linear algebra kernels shared by every other module:
QR-based least-squares solves, Cholesky solves, SVD, pseudoinverse
application and Gram products.

Matrices and vectors are float64 numpy arrays. Every function is a pure
function of its inputs and never writes into its arguments.
"""

import numpy as np
import scipy.linalg as sla
from errors import DimensionError, NotPositiveDefinite, NumericError, \
    ParameterError

# Relative factor of the numerical-rank convention: singular values at or
# below RANK_EPS * max(rows, cols) * sigma_max are treated as zero.
RANK_EPS = 1e-12

SYMMETRY_TOL = 1e-12


class SvdResult():
    """Full singular value decomposition M = U diag(s) V^T"""

    def __init__(self, u, singular_values, vt):
        self.u = u
        self.singular_values = singular_values
        self.vt = vt

    def rank(self, rank_tol=None):
        """Number of singular values above rank_tol * sigma_max"""
        if rank_tol is None:
            rank_tol = RANK_EPS * max(self.u.shape[0], self.vt.shape[0])
        s = self.singular_values
        if s.size == 0 or s[0] == 0.0:
            return 0
        return int(np.count_nonzero(s > rank_tol * s[0]))


def as_matrix(data, name='matrix'):
    """Validate and convert data to a finite 2-D float64 array"""
    matrix = np.asarray(data, dtype=np.float64)
    if matrix.ndim != 2:
        raise DimensionError(
            '{} must be 2-dimensional, got shape {}'.format(name, matrix.shape))
    if not np.all(np.isfinite(matrix)):
        raise ParameterError('{} contains non-finite entries'.format(name))
    return matrix


def as_vector(data, name='vector'):
    """Validate and convert data to a finite 1-D float64 array"""
    vector = np.asarray(data, dtype=np.float64)
    if vector.ndim != 1:
        raise DimensionError(
            '{} must be 1-dimensional, got shape {}'.format(name, vector.shape))
    if not np.all(np.isfinite(vector)):
        raise ParameterError('{} contains non-finite entries'.format(name))
    return vector


def default_rank_tol(matrix):
    """Relative truncation threshold for a matrix of this shape"""
    return RANK_EPS * max(matrix.shape)


def _check_system(matrix, rhs):
    matrix = as_matrix(matrix, 'M')
    rhs = as_vector(rhs, 'y')
    if matrix.size == 0:
        raise DimensionError('M must be nonempty')
    if rhs.shape[0] != matrix.shape[0]:
        raise DimensionError(
            'dimension mismatch: M has {} rows but y has length {}'.format(
                matrix.shape[0], rhs.shape[0]))
    return matrix, rhs


def _is_numerically_singular(r_factor, rank_tol):
    diagonal = np.abs(np.diag(r_factor))
    if diagonal.size == 0 or diagonal.max() == 0.0:
        return True
    return diagonal.min() <= rank_tol * diagonal.max()


def qr_lstsq(matrix, rhs, rank_tol=None):
    """
    Minimal-norm minimiser of ||Mx - y||, equal to M^+ y.

    Wide systems (k <= n, the block Kaczmarz case) factor M^T = QR so that
    x = Q R^{-T} y lies in range(M^T). Tall systems factor M = QR directly.
    When R is numerically singular the solve falls back to the truncated SVD.
    """
    matrix, rhs = _check_system(matrix, rhs)
    if rank_tol is None:
        rank_tol = default_rank_tol(matrix)
    rows, cols = matrix.shape

    if rows <= cols:
        q_factor, r_factor = sla.qr(matrix.T, mode='economic')
        if _is_numerically_singular(r_factor, rank_tol):
            return pseudoinverse_apply(matrix, rhs, rank_tol)
        z = sla.solve_triangular(r_factor, rhs, trans='T')
        return q_factor @ z

    q_factor, r_factor = sla.qr(matrix, mode='economic')
    if _is_numerically_singular(r_factor, rank_tol):
        return pseudoinverse_apply(matrix, rhs, rank_tol)
    return sla.solve_triangular(r_factor, q_factor.T @ rhs)


def cholesky_solve_spd(gram_matrix, rhs):
    """
    Solve G x = y for symmetric positive definite G.

    Raises NotPositiveDefinite when the factorisation meets a non-positive
    pivot, which for ReBlocK means lambda is too small for the data scale.
    """
    gram_matrix = as_matrix(gram_matrix, 'G')
    rhs = as_vector(rhs, 'y')
    size = gram_matrix.shape[0]
    if gram_matrix.shape[1] != size or rhs.shape[0] != size:
        raise DimensionError(
            'dimension mismatch: G is {} and y has length {}'.format(
                gram_matrix.shape, rhs.shape[0]))
    scale = np.abs(gram_matrix).max() if gram_matrix.size else 0.0
    asymmetry = np.abs(gram_matrix - gram_matrix.T).max() if size else 0.0
    if asymmetry > SYMMETRY_TOL * scale:
        raise ParameterError(
            'G is not symmetric (max asymmetry {:.3e})'.format(asymmetry))
    try:
        factor = sla.cho_factor(gram_matrix, lower=True, check_finite=False)
    except np.linalg.LinAlgError as error:
        raise NotPositiveDefinite(
            'Cholesky factorisation failed: {}'.format(error))
    return sla.cho_solve(factor, rhs, check_finite=False)


def svd(matrix):
    """Full SVD with singular values in non-increasing order"""
    matrix = as_matrix(matrix, 'M')
    if matrix.size == 0:
        raise DimensionError('M must be nonempty')
    try:
        u, s, vt = sla.svd(matrix, full_matrices=True, lapack_driver='gesdd')
    except np.linalg.LinAlgError:
        # gesdd occasionally fails to converge where the slower gesvd succeeds
        try:
            u, s, vt = sla.svd(matrix, full_matrices=True,
                               lapack_driver='gesvd')
        except np.linalg.LinAlgError as error:
            raise NumericError('SVD did not converge: {}'.format(error))
    return SvdResult(u, s, vt)


def pseudoinverse_apply(matrix, rhs, rank_tol=None):
    """M^+ y with singular values <= rank_tol * sigma_max truncated"""
    matrix, rhs = _check_system(matrix, rhs)
    if rank_tol is None:
        rank_tol = default_rank_tol(matrix)
    if rank_tol < 0:
        raise ParameterError('rank_tol must be nonnegative')
    u, s, vt = sla.svd(matrix, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros(matrix.shape[1])
    keep = s > rank_tol * s[0]
    coefficients = (u[:, keep].T @ rhs) / s[keep]
    return vt[keep].T @ coefficients


def singular_values(matrix):
    """Singular values in non-increasing order"""
    matrix = as_matrix(matrix, 'M')
    if matrix.size == 0:
        return np.zeros(0)
    return sla.svdvals(matrix)


def min_nonzero_singular_value(matrix, rank_tol=None):
    """Smallest singular value above rank_tol * sigma_max, 0 for M = 0"""
    matrix = as_matrix(matrix, 'M')
    if rank_tol is None:
        rank_tol = default_rank_tol(matrix)
    if not 0.0 < rank_tol < 1.0:
        raise ParameterError('rank_tol must lie in (0, 1)')
    s = singular_values(matrix)
    if s.size == 0 or s[0] == 0.0:
        return 0.0
    return float(s[s > rank_tol * s[0]].min())


def numerical_rank(matrix, rank_tol=None):
    matrix = as_matrix(matrix, 'M')
    if rank_tol is None:
        rank_tol = default_rank_tol(matrix)
    s = singular_values(matrix)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rank_tol * s[0]))


def condition_number(matrix, rank_tol=None):
    """sigma_max / sigma_min^+ (1 for the zero matrix)"""
    s_min = min_nonzero_singular_value(matrix, rank_tol)
    if s_min == 0.0:
        return 1.0
    return float(singular_values(matrix)[0] / s_min)


def gram_pseudoinverse(matrix, rank_tol=None):
    """(M M^T)^+ built from the SVD of M rather than from the Gram matrix"""
    matrix = as_matrix(matrix, 'M')
    if rank_tol is None:
        rank_tol = default_rank_tol(matrix)
    u, s, _ = sla.svd(matrix, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((matrix.shape[0], matrix.shape[0]))
    keep = s > rank_tol * s[0]
    u_kept = u[:, keep]
    return (u_kept / s[keep] ** 2) @ u_kept.T


def row_space_projector(matrix, rank_tol=None):
    """Orthogonal projector onto range(M^T)"""
    result = svd(matrix)
    rank = result.rank(rank_tol)
    v_kept = result.vt[:rank].T
    return v_kept @ v_kept.T


def psd_sqrt(matrix):
    """Symmetric square root with roundoff-negative eigenvalues clamped at 0"""
    matrix = as_matrix(matrix, 'W')
    symmetric = 0.5 * (matrix + matrix.T)
    eigenvalues, eigenvectors = sla.eigh(symmetric)
    root = np.sqrt(np.clip(eigenvalues, 0.0, None))
    return (eigenvectors * root) @ eigenvectors.T


def symmetric_eigenvalues(matrix):
    """Eigenvalues of the symmetric part of M in non-increasing order"""
    matrix = as_matrix(matrix, 'M')
    return sla.eigvalsh(0.5 * (matrix + matrix.T))[::-1]


def haar_orthogonal(size, rng):
    """
    Uniformly random orthogonal matrix: QR of an i.i.d. Gaussian matrix with
    the sign of R's diagonal folded into Q.
    """
    q_factor, r_factor = sla.qr(rng.standard_normal((size, size)))
    signs = np.sign(np.diag(r_factor))
    signs[signs == 0.0] = 1.0
    return q_factor * signs
