#!/usr/bin/env python3
"""
Bound ledgers: every inequality the limit quantities must satisfy, evaluated
side by side with its actual value. A failing entry points to an
implementation bug or to an input outside the bound's assumptions, such as
rows not in general position (kappa(W_bar) = inf).
"""

import logging
import math
import numpy as np
from denselinalg import condition_number, min_nonzero_singular_value, \
    numerical_rank, symmetric_eigenvalues
from errors import ParameterError, TheoremViolation
from kdppsampler import KDpp, ENUMERATE as KDPP_ENUMERATE
from oracle import ENUMERATE, compute_report, convergence_alpha, \
    dpp_alpha_bound, dpp_wbar_closed_form, json_float, \
    montecarlo_variance_v, montecarlo_wbar_pbar, p_bar_identity_gap
from problem import LeastSquaresProblem
from rbkmass import RbkMass
from reblockmass import ReblockMass
from sampler import make_rng, next_block
from streamsampler import GaussianStream

LEDGER_SLACK = 1e-8
NORMAL_EQUATIONS_TOL = 1e-9
CONTRACTION_TOL = 1e-9
MSGD_STABILITY = 2.0
IDENTITY_TOL = 1e-10
CLOSED_FORM_TOL = 1e-9
DPP_SOLUTION_TOL = 1e-8
ZERO_MEAN_SE = 4.0
ALPHA_SE = 3.0
GAUSSIAN_VARIANCE_CONSTANT = 200.0
IDENTITY_STREAM = 1 << 22


class LedgerEntry():

    def __init__(self, name, bound_value, actual_value, relation):
        self.name = name
        self.bound_value = float(bound_value)
        self.actual_value = float(actual_value)
        self.relation = relation
        slack = LEDGER_SLACK * max(1.0, abs(self.bound_value)) \
            if math.isfinite(self.bound_value) else 0.0
        if relation == '<=':
            self.holds = self.actual_value <= self.bound_value + slack
        else:
            self.holds = self.actual_value >= self.bound_value - slack

    def __str__(self):
        return '{:<32} {:>14.6e} {} {:<14.6e} {}'.format(
            self.name, self.actual_value, self.relation, self.bound_value,
            'ok' if self.holds else 'FAILED')


class BoundLedger():
    """Ordered list of bound entries"""

    def __init__(self):
        self.entries = []

    def add_upper(self, name, actual, bound):
        """Record actual <= bound"""
        self.entries.append(LedgerEntry(name, bound, actual, '<='))

    def add_lower(self, name, actual, bound):
        """Record actual >= bound"""
        self.entries.append(LedgerEntry(name, bound, actual, '>='))

    @property
    def failures(self):
        return [entry for entry in self.entries if not entry.holds]

    @property
    def all_hold(self):
        return not self.failures

    def lines(self):
        header = '{:<32} {:>14} {} {:<14} {}'.format(
            'bound', 'actual', '  ', 'limit', 'status')
        return [header] + [str(entry) for entry in self.entries]

    def raise_on_violation(self):
        if self.failures:
            raise TheoremViolation(
                '{} bound(s) violated: {}'.format(
                    len(self.failures),
                    ', '.join(entry.name for entry in self.failures)),
                failures=self.failures)

    def to_json(self):
        return [{'name': entry.name,
                 'bound': json_float(entry.bound_value),
                 'actual': json_float(entry.actual_value),
                 'relation': entry.relation,
                 'holds': entry.holds} for entry in self.entries]


def _product(*factors):
    """Product in which a zero factor wins over an infinite one"""
    if any(factor == 0.0 for factor in factors):
        return 0.0
    return math.prod(factors)


def pseudoinverse_norm(matrix):
    s_min = min_nonzero_singular_value(matrix)
    return 0.0 if s_min == 0.0 else 1.0 / s_min


def check_structure(problem, report):
    """Identities shared by every mass matrix in Enumerate mode"""
    if report.mode != ENUMERATE:
        raise ParameterError('Bound checks need an Enumerate-mode report')
    ledger = BoundLedger()
    a, w_bar, p_bar = problem.a, report.w_bar, report.p_bar
    scale = np.linalg.norm(a) * np.linalg.norm(w_bar) * \
        max(np.linalg.norm(problem.b), 1.0)
    normal_gap = np.linalg.norm(a.T @ w_bar @ report.r_rho)
    ledger.add_upper('weighted_normal_equations',
                     normal_gap / scale if scale > 0.0 else normal_gap,
                     NORMAL_EQUATIONS_TOL)
    ledger.add_upper('p_bar_identity',
                     p_bar_identity_gap(a, w_bar, p_bar), IDENTITY_TOL)
    eigenvalues = symmetric_eigenvalues(p_bar)
    if report.mass.name == 'msgd':
        # stable step sizes only guarantee lambda_max(P_bar) < 2
        ledger.add_upper('p_bar_stability', eigenvalues[0], MSGD_STABILITY)
    else:
        ledger.add_upper('p_bar_contraction', eigenvalues[0],
                         1.0 + CONTRACTION_TOL)
    ledger.add_lower('p_bar_psd', eigenvalues[-1], -CONTRACTION_TOL)
    return ledger


def check_bounds_rbk(problem, report):
    """Ledger of the RBK bounds on kappa(W_bar), ||r_rho||, bias and V"""
    ledger = check_structure(problem, report)
    kappa = report.kappa_w
    r_norm = report.residual_norm
    ledger.add_upper(
        'kappa_w', kappa,
        report.k * report.max_row_norm_sq * report.max_block_pinv_sq)
    ledger.add_upper('r_rho_norm', report.r_rho_norm,
                     _product(math.sqrt(kappa), r_norm))
    ledger.add_upper('bias', report.bias_norm,
                     _product(math.sqrt(max(kappa - 1.0, 0.0)),
                              pseudoinverse_norm(problem.a), r_norm))
    ledger.add_upper('variance_v', report.variance_v,
                     _product(report.max_block_pinv_sq, kappa, report.k,
                              r_norm ** 2) / problem.m)
    return ledger


def check_bounds_reblock(problem, report):
    """Ledger of the ReBlocK bounds, including the lambda^-1/2 bias bound"""
    ledger = check_structure(problem, report)
    lambda_ = report.mass.lambda_
    kappa = report.kappa_w
    r_norm = report.residual_norm
    ledger.add_upper('kappa_w', kappa,
                     1.0 + report.max_row_norm_sq / lambda_)
    ledger.add_upper('r_rho_norm', report.r_rho_norm,
                     _product(math.sqrt(kappa), r_norm))
    ledger.add_upper('bias', report.bias_norm,
                     _product(math.sqrt(max(kappa - 1.0, 0.0)),
                              pseudoinverse_norm(problem.a), r_norm))
    ledger.add_upper('bias_lambda', report.bias_norm,
                     _product(condition_number(problem.a), r_norm) /
                     math.sqrt(lambda_))
    ledger.add_upper('variance_v', report.variance_v,
                     _product(kappa, r_norm ** 2) /
                     (4.0 * lambda_ * problem.m))
    return ledger


def check_bounds_dpp(problem, k, lambda_, report=None, workers=None):
    """
    Ledger for ReBlocK under k-DPP sampling: closed-form W_bar against
    enumeration, x_rho = x*, the alpha bound for every ell < k and
    V <= max_i r_i^2 / (4 lambda). The report is computed when not given.
    """
    if report is None:
        report = compute_report(problem, ReblockMass(lambda_),
                                KDpp(k, lambda_, KDPP_ENUMERATE), ENUMERATE,
                                workers=workers)
    ledger = check_structure(problem, report)
    closed_form = dpp_wbar_closed_form(problem, k, lambda_)
    ledger.add_upper('dpp_closed_form_w_bar',
                     np.linalg.norm(closed_form - report.w_bar) /
                     np.linalg.norm(report.w_bar), CLOSED_FORM_TOL)
    x_star = report.x_star
    ledger.add_upper('dpp_x_rho_equals_x_star',
                     report.bias_norm / max(np.linalg.norm(x_star), 1.0),
                     DPP_SOLUTION_TOL)
    for ell in range(1, k):
        ledger.add_lower('dpp_alpha_ell_{}'.format(ell), report.alpha,
                         dpp_alpha_bound(problem, k, lambda_, ell))
    residual = problem.residual(x_star)
    ledger.add_upper('dpp_variance_v', report.variance_v,
                     np.max(residual ** 2) / (4.0 * lambda_))
    return ledger


def gaussian_rate_bounds(spectrum, k):
    """
    Terms of the Gaussian-data lower bound on alpha (constant taken as 1):
    returns (msgd_term, ell_terms) with msgd_term = k sigma_n^2 / ||L_n||_F^2,
    the best rate mSGD can reach, and ell_terms[ell] =
    (ell - 1) sigma_n^2 / sum_{i >= k-ell-1} sigma_i^2 for 2 <= ell < k
    """
    sigma_sq = np.asarray(spectrum, dtype=np.float64) ** 2
    smallest = sigma_sq[-1]
    msgd_term = k * smallest / np.sum(sigma_sq)
    ell_terms = {}
    for ell in range(2, k):
        first = max(k - ell - 1, 1)
        ell_terms[ell] = (ell - 1) * smallest / np.sum(sigma_sq[first - 1:])
    return float(msgd_term), ell_terms


def gaussian_alpha_bound(spectrum, k):
    msgd_term, ell_terms = gaussian_rate_bounds(spectrum, k)
    return max([msgd_term] + list(ell_terms.values()))


def _zero_mean_statistic(terms):
    """max_j |mean_j| / SE_j, with coordinates of zero spread skipped"""
    mean = terms.mean(axis=0)
    error = terms.std(axis=0, ddof=1) / np.sqrt(terms.shape[0])
    exact = error == 0.0
    if np.any(exact & (mean != 0.0)):
        return float('inf')
    if np.all(exact):
        return 0.0
    return float(np.max(np.abs(mean[~exact]) / error[~exact]))


def check_gaussian_identity(problem, k, draws, seed=0, mass=None):
    """
    Monte Carlo ledger for RBK on Gaussian rows: the additive term at x* has
    mean zero (so x_rho = x*), V obeys 200 / sigma_2k^2 * E[(a^T x* - b)^2]
    and alpha obeys the spectral lower bound minus three standard errors
    """
    if not problem.is_streaming:
        raise ParameterError('The Gaussian identity check needs a Gaussian '
                             'problem')
    spectrum = problem.spectrum()
    rank = numerical_rank(problem.l_n)
    if k < 6:
        raise ParameterError('Hypothesis k >= 6 fails (k = {})'.format(k))
    if rank < 2 * k:
        raise ParameterError('Hypothesis rank(L_n) >= 2k fails '
                             '(rank {} < {})'.format(rank, 2 * k))
    mass = mass or RbkMass()
    sampler = GaussianStream(k)
    x_star = problem.x_star

    rng = make_rng(seed, IDENTITY_STREAM)
    terms = np.empty((draws, problem.n))
    for draw in range(draws):
        block = next_block(problem, sampler, rng)
        terms[draw] = mass.additive_term(
            block.a_block, block.b_block - block.a_block @ x_star)
    ledger = BoundLedger()
    ledger.add_upper('gaussian_zero_mean_term', _zero_mean_statistic(terms),
                     ZERO_MEAN_SE)

    v_estimate, _ = montecarlo_variance_v(problem, mass, sampler, x_star,
                                          draws, seed)
    ledger.add_upper('gaussian_variance_v', v_estimate,
                     GAUSSIAN_VARIANCE_CONSTANT / spectrum[2 * k - 1] ** 2 *
                     problem.noise_std ** 2)

    _, p_bar, std_errors = montecarlo_wbar_pbar(problem, mass, sampler,
                                                draws, seed)
    alpha = convergence_alpha(p_bar, rank)
    alpha_error = float(np.linalg.norm(std_errors['p_bar']))
    ledger.add_lower('gaussian_alpha', alpha,
                     gaussian_alpha_bound(spectrum, k) - ALPHA_SE * alpha_error)
    logging.info('Gaussian identity check: alpha {:.4e} (SE {:.2e}), '
                 'V {:.4e}'.format(alpha, alpha_error, v_estimate))
    return ledger


def noisy_identity_check(a, planted_x, noise_std, mass, sampler, draws,
                         seed=0):
    """
    For b = A x + z with zero-mean noise resampled on every draw, the mean of
    the additive term A_S^T M(A_S) z_S is zero within four standard errors
    """
    base = LeastSquaresProblem(a, a @ np.asarray(planted_x, dtype=np.float64))
    rng = make_rng(seed, IDENTITY_STREAM + 1)
    terms = np.empty((draws, base.n))
    for draw in range(draws):
        block = next_block(base, sampler, rng)
        noise = noise_std * rng.standard_normal(block.k)
        terms[draw] = mass.additive_term(block.a_block, noise)
    ledger = BoundLedger()
    ledger.add_upper('noisy_zero_mean_term', _zero_mean_statistic(terms),
                     ZERO_MEAN_SE)
    return ledger


def check_bounds(problem, report):
    """Ledger matching the report's mass matrix and sampler"""
    if report.sampler.name == 'kdpp':
        if report.mass.name == 'reblock':
            return check_bounds_dpp(problem, report.k,
                                    report.sampler.lambda_, report)
        return check_structure(problem, report)
    if report.mass.name == 'rbk':
        return check_bounds_rbk(problem, report)
    if report.mass.name == 'reblock':
        return check_bounds_reblock(problem, report)
    return check_structure(problem, report)
