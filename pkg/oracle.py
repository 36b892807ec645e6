#!/usr/bin/env python3
"""
Ground truth for the iteration's limit behaviour.

For a mass matrix M and sampling law rho:

    W(S) = I_S^T M(A_S) I_S,    W_bar = E[W(S)]
    P(S) = A_S^T M(A_S) A_S,    P_bar = E[P(S)] = A^T W_bar A
    x_rho = argmin ||A x - b||_{W_bar} (minimal norm),  r_rho = b - A x_rho
    alpha = sigma_min^+(P_bar),  V = E ||A_S^T M(A_S) r_rho_S||^2

computed exactly by enumerating every subset, or estimated by Monte Carlo.
"""

import logging
import numpy as np
from concurrent.futures import ThreadPoolExecutor
from denselinalg import RANK_EPS, min_nonzero_singular_value, \
    numerical_rank, psd_sqrt, qr_lstsq, symmetric_eigenvalues
from elemsym import elem_sym
from errors import NumericError, ParameterError, ProblemIOError
from kdppsampler import kernel_eigen
from sampler import make_rng, next_block, thread_count

ENUMERATE = 'enumerate'
MONTECARLO = 'montecarlo'
MIN_DRAWS = 1000
IDENTITY_TOL = 1e-10
CHUNK = 1024
ORACLE_STREAM = 1 << 21


class OracleReport():
    """Limit quantities of one (problem, mass, sampler) triple"""

    def __init__(self, mode, mass, sampler, w_bar, p_bar, x_rho, r_rho,
                 alpha, kappa_w, variance_v, x_star, residual_norm,
                 max_row_norm_sq=None, max_block_pinv_sq=None, draws=None,
                 std_errors=None):
        self.mode = mode
        self.mass = mass
        self.sampler = sampler
        self.w_bar = w_bar
        self.p_bar = p_bar
        self.x_rho = x_rho
        self.r_rho = r_rho
        self.alpha = alpha
        self.kappa_w = kappa_w
        self.variance_v = variance_v
        self.x_star = x_star
        self.residual_norm = residual_norm
        self.max_row_norm_sq = max_row_norm_sq
        self.max_block_pinv_sq = max_block_pinv_sq
        self.draws = draws
        self.std_errors = std_errors or {}

    @property
    def k(self):
        return self.sampler.k

    @property
    def bias_norm(self):
        return float(np.linalg.norm(self.x_rho - self.x_star))

    @property
    def r_rho_norm(self):
        return None if self.r_rho is None else \
            float(np.linalg.norm(self.r_rho))

    def to_json(self, version, ledger=None):
        """oracle.json contents; matrices are stored for later verification"""
        data = {
            'version': version,
            'mode': self.mode,
            'draws': self.draws,
            'k': self.k,
            **self.mass.describe(),
            **self.sampler.describe(),
            'alpha': json_float(self.alpha),
            'kappa_w': json_float(self.kappa_w),
            'r_rho_norm': json_float(self.r_rho_norm),
            'bias': json_float(self.bias_norm),
            'variance_v': json_float(self.variance_v),
            'residual_norm': json_float(self.residual_norm),
            'max_row_norm_sq': json_float(self.max_row_norm_sq),
            'max_block_pinv_sq': json_float(self.max_block_pinv_sq),
            'x_rho': [float(value) for value in self.x_rho],
            'std_errors': {
                'alpha': json_float(self.std_errors.get('alpha')),
                'variance_v': json_float(self.std_errors.get('variance_v')),
            },
            'w_bar': None if self.w_bar is None else self.w_bar.tolist(),
            'p_bar': self.p_bar.tolist(),
        }
        if ledger is not None:
            data['ledger'] = ledger.to_json()
        return data


def json_float(value):
    """Finite floats as numbers, infinities as the strings 'inf'/'-inf'"""
    if value is None:
        return None
    value = float(value)
    if np.isinf(value):
        return 'inf' if value > 0 else '-inf'
    return value


def from_json_float(value):
    if value is None:
        return None
    return float(value)


def _enumerated_chunk(problem, mass, subsets, probabilities):
    m, n = problem.m, problem.n
    w_sum = np.zeros((m, m))
    p_sum = np.zeros((n, n))
    max_pinv_sq = 0.0
    for (subset, probability) in zip(subsets, probabilities):
        index = np.array(subset, dtype=np.intp)
        a_block = problem.a[index]
        block_mass = mass.matrix(a_block)
        w_sum[np.ix_(index, index)] += probability * block_mass
        p_sum += probability * mass.projection(a_block)
        s_min = min_nonzero_singular_value(a_block)
        if s_min > 0.0:
            max_pinv_sq = max(max_pinv_sq, 1.0 / s_min ** 2)
    return w_sum, p_sum, max_pinv_sq


def enumerate_statistics(problem, mass, sampler, workers=None):
    """
    (W_bar, P_bar, max_S ||A_S^+||^2) by exact enumeration of the law.

    Subsets are split into fixed chunks whose partial sums are added in chunk
    order, so the result does not depend on the number of workers.
    """
    if problem.is_streaming:
        raise ParameterError('Enumeration needs a finite problem')
    subsets, probabilities = sampler.law(problem)
    starts = range(0, len(subsets), CHUNK)
    workers = workers or thread_count()
    with ThreadPoolExecutor(max_workers=workers) as executor:
        partials = list(executor.map(
            lambda start: _enumerated_chunk(
                problem, mass, subsets[start:start + CHUNK],
                probabilities[start:start + CHUNK]), starts))
    w_bar = np.zeros((problem.m, problem.m))
    p_bar = np.zeros((problem.n, problem.n))
    max_pinv_sq = 0.0
    for (w_part, p_part, pinv_part) in partials:
        w_bar += w_part
        p_bar += p_part
        max_pinv_sq = max(max_pinv_sq, pinv_part)

    gap = p_bar_identity_gap(problem.a, w_bar, p_bar)
    if gap > IDENTITY_TOL:
        raise NumericError(
            'Enumerated P_bar differs from A^T W_bar A (relative gap {:.3e})'
            .format(gap))
    logging.debug('Enumerated {} subsets for {} with {}'.format(
        len(subsets), mass, sampler))
    return w_bar, p_bar, max_pinv_sq


def enumerate_wbar_pbar(problem, mass, sampler, workers=None):
    """Exact (W_bar, P_bar) over every subset of the sampler's law"""
    w_bar, p_bar, _ = enumerate_statistics(problem, mass, sampler, workers)
    return w_bar, p_bar


def p_bar_identity_gap(a, w_bar, p_bar):
    """||P_bar - A^T W_bar A||_F relative to ||A||_F^2 ||W_bar||_F"""
    scale = np.linalg.norm(a) ** 2 * np.linalg.norm(w_bar)
    gap = np.linalg.norm(p_bar - a.T @ w_bar @ a)
    if scale == 0.0:
        return float(gap)
    return float(gap / scale)


def montecarlo_wbar_pbar(problem, mass, sampler, draws, seed):
    """
    Sample means of W(S) (finite problems only) and P(S) with entrywise
    standard errors, returned as (w_bar or None, p_bar, std_errors)
    """
    if draws is None or draws < MIN_DRAWS:
        raise ParameterError('Monte Carlo needs at least {} draws, got {}'
                             .format(MIN_DRAWS, draws))
    rng = make_rng(seed, ORACLE_STREAM)
    n = problem.n
    p_sum = np.zeros((n, n))
    p_sq = np.zeros((n, n))
    finite = not problem.is_streaming
    if finite:
        w_sum = np.zeros((problem.m, problem.m))
        w_sq = np.zeros((problem.m, problem.m))
    for _ in range(draws):
        block = next_block(problem, sampler, rng)
        block_mass = mass.matrix(block.a_block)
        projection = mass.projection(block.a_block)
        p_sum += projection
        p_sq += projection ** 2
        if finite:
            cells = np.ix_(block.indices, block.indices)
            w_sum[cells] += block_mass
            w_sq[cells] += block_mass ** 2

    p_bar, p_se = _mean_and_error(p_sum, p_sq, draws)
    std_errors = {'p_bar': p_se, 'w_bar': None}
    w_bar = None
    if finite:
        w_bar, std_errors['w_bar'] = _mean_and_error(w_sum, w_sq, draws)
    return w_bar, p_bar, std_errors


def _mean_and_error(total, total_sq, draws):
    mean = total / draws
    variance = np.clip((total_sq - draws * mean ** 2) / (draws - 1), 0.0,
                       None)
    return mean, np.sqrt(variance / draws)


def weighted_solution(problem, w_bar):
    """Minimal-norm minimiser of ||W_bar^{1/2}(Ax - b)|| and its residual"""
    root = psd_sqrt(w_bar)
    x_rho = qr_lstsq(root @ problem.a, root @ problem.b)
    return x_rho, problem.b - problem.a @ x_rho


def convergence_alpha(p_bar, rank):
    """
    sigma_min^+(P_bar) on range(A^T): the rank-th largest eigenvalue, with the
    rank taken from A rather than from P_bar
    """
    if rank == 0:
        logging.warning('A is numerically zero: alpha reported as 1')
        return 1.0
    eigenvalues = symmetric_eigenvalues(p_bar)
    return float(eigenvalues[rank - 1])


def weight_condition_number(w_bar):
    """kappa(W_bar), infinite when W_bar is numerically singular"""
    eigenvalues = symmetric_eigenvalues(w_bar)
    largest, smallest = eigenvalues[0], eigenvalues[-1]
    if largest <= 0.0 or smallest <= RANK_EPS * w_bar.shape[0] * largest:
        return float('inf')
    return float(largest / smallest)


def variance_v(problem, mass, sampler, x_rho):
    """V = E ||A_S^T M(A_S) r_rho_S||^2 over the exact law"""
    subsets, probabilities = sampler.law(problem)
    r_rho = problem.b - problem.a @ x_rho
    total = 0.0
    for (subset, probability) in zip(subsets, probabilities):
        index = np.array(subset, dtype=np.intp)
        term = mass.additive_term(problem.a[index], r_rho[index])
        total += probability * float(term @ term)
    return total


def montecarlo_variance_v(problem, mass, sampler, x_rho, draws, seed):
    """Monte Carlo V and its standard error; streamed rows use b - a^T x_rho"""
    if draws is None or draws < MIN_DRAWS:
        raise ParameterError('Monte Carlo needs at least {} draws, got {}'
                             .format(MIN_DRAWS, draws))
    rng = make_rng(seed, ORACLE_STREAM + 1)
    values = np.empty(draws)
    for draw in range(draws):
        block = next_block(problem, sampler, rng)
        term = mass.additive_term(
            block.a_block, block.b_block - block.a_block @ x_rho)
        values[draw] = term @ term
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(draws))


def problem_rank(problem):
    if problem.is_streaming:
        return numerical_rank(problem.l_n)
    return numerical_rank(problem.a)


def compute_report(problem, mass, sampler, mode=ENUMERATE, draws=None,
                   seed=0, workers=None):
    """OracleReport by enumeration or by Monte Carlo"""
    x_star = problem.ols_solution()
    rank = problem_rank(problem)
    max_row_norm_sq = None
    if not problem.is_streaming:
        max_row_norm_sq = float(np.max(np.sum(problem.a ** 2, axis=1)))
        residual_norm = float(np.linalg.norm(problem.residual(x_star)))
    else:
        residual_norm = problem.noise_std

    if mode == ENUMERATE:
        w_bar, p_bar, max_pinv_sq = enumerate_statistics(
            problem, mass, sampler, workers)
        x_rho, r_rho = weighted_solution(problem, w_bar)
        return OracleReport(
            mode, mass, sampler, w_bar, p_bar, x_rho, r_rho,
            convergence_alpha(p_bar, rank), weight_condition_number(w_bar),
            variance_v(problem, mass, sampler, x_rho), x_star, residual_norm,
            max_row_norm_sq, max_pinv_sq)

    if mode != MONTECARLO:
        raise ParameterError('Unknown oracle mode "{}"'.format(mode))
    w_bar, p_bar, std_errors = montecarlo_wbar_pbar(
        problem, mass, sampler, draws, seed)
    if problem.is_streaming:
        # the statistical limit point is x* itself for Gaussian rows
        x_rho, r_rho, kappa_w = x_star, None, None
    else:
        x_rho, r_rho = weighted_solution(problem, w_bar)
        kappa_w = weight_condition_number(w_bar)
    v_estimate, v_error = montecarlo_variance_v(
        problem, mass, sampler, x_rho, draws, seed)
    # Weyl: eigenvalue error is at most the spectral (<= Frobenius) error
    std_errors['alpha'] = float(np.linalg.norm(std_errors['p_bar']))
    std_errors['variance_v'] = v_error
    return OracleReport(
        mode, mass, sampler, w_bar, p_bar, x_rho, r_rho,
        convergence_alpha(p_bar, rank), kappa_w, v_estimate, x_star,
        residual_norm, max_row_norm_sq, None, draws, std_errors)


def dpp_wbar_closed_form(problem, k, lambda_):
    """
    W_bar of ReBlocK under k-DPP(AA^T + lambda k I) sampling:
    U diag(p_{k-1}(q_{-i})) U^T / p_k(q) over the kernel eigenpairs (q, U)
    """
    eigen = kernel_eigen(problem, k, lambda_)
    # p_j is homogeneous of degree j, so scaling q only rescales the ratio
    scale = eigen.q.max()
    polys = elem_sym(eigen.q / scale, k)
    weights = polys.leave_one_out / (scale * polys.value(k))
    return (eigen.u * weights) @ eigen.u.T


def dpp_condition_numbers(problem, ell):
    """(kappa_ell^2, kappa_dem^2, sigma_{n_r}, n_r) of A"""
    sigma = np.linalg.svd(problem.a, compute_uv=False)
    rank = numerical_rank(problem.a)
    if rank == 0:
        raise ParameterError('A is numerically zero')
    sigma = sigma[:rank]
    sigma_min = sigma[-1]
    kappa_ell_sq = float(np.sum(sigma[ell:] ** 2) / sigma_min ** 2)
    kappa_dem_sq = float(np.sum(sigma ** 2) / sigma_min ** 2)
    return kappa_ell_sq, kappa_dem_sq, float(sigma_min), rank


def dpp_alpha_bound(problem, k, lambda_, ell):
    """(k-l) / ((k-l) + kappa_l^2 + (m+k-2l) lambda k / sigma_{n_r}^2)"""
    if not 1 <= ell < k:
        raise ParameterError('ell = {} must satisfy 1 <= ell < k = {}'.format(
            ell, k))
    kappa_ell_sq, _, sigma_min, _ = dpp_condition_numbers(problem, ell)
    gap = k - ell
    return gap / (gap + kappa_ell_sq +
                  (problem.m + k - 2 * ell) * lambda_ * k / sigma_min ** 2)


def report_from_json(problem, data, mass, sampler):
    """Rebuild an OracleReport from oracle.json for the same problem"""
    try:
        w_bar = None if data['w_bar'] is None else np.array(data['w_bar'])
        x_rho = np.array(data['x_rho'], dtype=np.float64)
        r_rho = None if problem.is_streaming else \
            problem.b - problem.a @ x_rho
        std_errors = {key: from_json_float(value)
                      for (key, value) in data.get('std_errors', {}).items()}
        return OracleReport(
            data['mode'], mass, sampler, w_bar, np.array(data['p_bar']),
            x_rho, r_rho, from_json_float(data['alpha']),
            from_json_float(data['kappa_w']),
            from_json_float(data['variance_v']), problem.ols_solution(),
            from_json_float(data['residual_norm']),
            from_json_float(data.get('max_row_norm_sq')),
            from_json_float(data.get('max_block_pinv_sq')),
            data.get('draws'), std_errors)
    except (KeyError, TypeError, ValueError) as error:
        raise ProblemIOError('Corrupt oracle file: {}'.format(error),
                             'oracle.json')
