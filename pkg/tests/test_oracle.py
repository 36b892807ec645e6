import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

import oracle
from denselinalg import min_nonzero_singular_value
from errors import ParameterError, ProblemIOError
from gaussiangenerator import gen_gaussian
from isoscelesgenerator import centroid, gen_isosceles
from kdppsampler import ENUMERATE as KDPP_ENUMERATE, KDpp
from ledger import gaussian_alpha_bound
from msgdmass import MsgdMass
from oracle import ENUMERATE, MONTECARLO, compute_report, \
    dpp_alpha_bound, dpp_wbar_closed_form, enumerate_wbar_pbar, \
    json_float, montecarlo_wbar_pbar, report_from_json, variance_v, \
    weight_condition_number, weighted_solution
from problem import LeastSquaresProblem
from rbkmass import RbkMass
from reblockmass import ReblockMass
from solver import SolverConfig, run
from streamsampler import GaussianStream
from uniformsampler import UniformSubsets

from conftest import random_problem


def rbk_report(problem, k=2):
    return compute_report(problem, RbkMass(), UniformSubsets(k), ENUMERATE)


def reblock_report(problem, lambda_, k=2):
    return compute_report(problem, ReblockMass(lambda_), UniformSubsets(k),
                          ENUMERATE)


def test_identity_problem():
    problem = LeastSquaresProblem(np.eye(3), [1.0, 2.0, 3.0])
    w_bar, p_bar = enumerate_wbar_pbar(problem, RbkMass(), UniformSubsets(1))
    assert_allclose(w_bar, np.eye(3) / 3, atol=1e-15)
    assert_allclose(p_bar, np.eye(3) / 3, atol=1e-15)
    assert min_nonzero_singular_value(p_bar) == pytest.approx(1 / 3)
    assert rbk_report(problem, 1).alpha == pytest.approx(1 / 3)


def test_reblock_large_lambda_weights():
    problem = random_problem(8, 3, seed=6)
    lambda_, k = 1e6, 2
    w_bar, _ = enumerate_wbar_pbar(problem, ReblockMass(lambda_),
                                   UniformSubsets(k))
    assert_allclose(w_bar * lambda_ * k, (k / problem.m) * np.eye(problem.m),
                    atol=1e-4)


@pytest.mark.parametrize('epsilon', [0.5, 0.05, 0.005])
def test_rbk_limit_is_centroid(epsilon):
    report = rbk_report(gen_isosceles(epsilon))
    assert_allclose(report.x_rho, centroid(epsilon), rtol=1e-8)


def test_rbk_quantities_diverge_as_triangle_flattens():
    reports = [rbk_report(gen_isosceles(eps)) for eps in (0.5, 0.05, 0.005)]
    for (wide, narrow) in zip(reports, reports[1:]):
        assert narrow.bias_norm > 5 * wide.bias_norm
        assert narrow.r_rho_norm > 5 * wide.r_rho_norm
        assert narrow.kappa_w > 5 * wide.kappa_w
        assert narrow.variance_v > 5 * wide.variance_v


def test_reblock_quantities_vanish_as_triangle_flattens():
    reports = [reblock_report(gen_isosceles(eps), 0.01)
               for eps in (0.5, 0.05, 0.005)]
    for (wide, narrow) in zip(reports, reports[1:]):
        assert narrow.bias_norm < wide.bias_norm
        assert narrow.r_rho_norm < wide.r_rho_norm
        assert narrow.variance_v < wide.variance_v
    assert reports[2].bias_norm < 0.1


def test_reblock_bias_decreases_with_lambda():
    problem = gen_isosceles(0.05)
    biases = [reblock_report(problem, lambda_).bias_norm
              for lambda_ in (1e-3, 1e-2, 1e-1, 1.0)]
    assert all(later <= earlier * (1 + 1e-9)
               for (earlier, later) in zip(biases, biases[1:]))


def test_reblock_bias_below_rbk_bias():
    problem = gen_isosceles(0.1)
    assert reblock_report(problem, 0.1).bias_norm < \
        rbk_report(problem).bias_norm


def test_weighted_solution_invariances(small_problem, rng):
    x_rho, r_rho = weighted_solution(small_problem, 2.5 * np.eye(8))
    assert_allclose(x_rho, small_problem.x_star, atol=1e-10)
    assert_allclose(r_rho, small_problem.residual(x_rho))

    a = rng.standard_normal((6, 3))
    consistent = LeastSquaresProblem(a, a @ np.array([1.0, -1.0, 2.0]))
    g = rng.standard_normal((6, 6))
    x_rho, r_rho = weighted_solution(consistent, g @ g.T)
    assert_allclose(x_rho, [1.0, -1.0, 2.0], atol=1e-9)
    assert_allclose(r_rho, np.zeros(6), atol=1e-9)


def test_consistent_problem_has_no_variance():
    problem = random_problem(7, 3, seed=2, consistent=True)
    report = rbk_report(problem)
    assert report.variance_v == pytest.approx(0.0, abs=1e-20)
    assert report.bias_norm == pytest.approx(0.0, abs=1e-10)
    assert variance_v(problem, RbkMass(), UniformSubsets(2),
                      problem.x_star) == pytest.approx(0.0, abs=1e-20)


def test_weight_condition_number():
    assert weight_condition_number(np.diag([4.0, 1.0])) == pytest.approx(4.0)
    assert weight_condition_number(np.diag([1.0, 0.0])) == float('inf')
    assert json_float(float('inf')) == 'inf'
    assert json_float(None) is None


def test_montecarlo_needs_draws(isosceles):
    with pytest.raises(ParameterError):
        montecarlo_wbar_pbar(isosceles, RbkMass(), UniformSubsets(2), 0, 0)
    with pytest.raises(ParameterError):
        compute_report(isosceles, RbkMass(), UniformSubsets(2), MONTECARLO,
                       draws=10)


def test_montecarlo_agrees_with_enumeration(isosceles):
    exact = rbk_report(isosceles)
    w_bar, p_bar, errors = montecarlo_wbar_pbar(
        isosceles, RbkMass(), UniformSubsets(2), 6000, seed=3)
    assert np.all(np.abs(p_bar - exact.p_bar) <= 5 * errors['p_bar'] + 1e-12)
    assert np.all(np.abs(w_bar - exact.w_bar) <= 5 * errors['w_bar'] + 1e-12)


def test_montecarlo_report_on_gaussian_rows():
    problem = gen_gaussian(8, np.ones(8), np.ones(8), 0.1, seed=4)
    report = compute_report(problem, RbkMass(), GaussianStream(4),
                            MONTECARLO, draws=5000, seed=1)
    assert report.w_bar is None
    assert_allclose(report.x_rho, problem.x_star)
    assert report.alpha >= gaussian_alpha_bound(problem.spectrum(), 4) - \
        3 * report.std_errors['alpha']
    assert report.std_errors['variance_v'] > 0.0


def test_enumeration_on_streaming_problem_rejected():
    problem = gen_gaussian(4, np.ones(4), np.ones(4), 0.1, seed=4)
    with pytest.raises(ParameterError):
        compute_report(problem, RbkMass(), GaussianStream(2), ENUMERATE)


def test_dpp_closed_form_matches_enumeration():
    problem = random_problem(6, 3, seed=12)
    lambda_ = 0.01
    enumerated, _ = enumerate_wbar_pbar(problem, ReblockMass(lambda_),
                                        KDpp(2, lambda_, KDPP_ENUMERATE))
    closed = dpp_wbar_closed_form(problem, 2, lambda_)
    assert_allclose(closed, enumerated, rtol=1e-9, atol=1e-9)


def test_dpp_closed_form_zero_matrix_is_scaled_identity():
    problem = LeastSquaresProblem(np.zeros((5, 2)), np.ones(5))
    lambda_, k = 0.5, 2
    enumerated, _ = enumerate_wbar_pbar(problem, ReblockMass(lambda_),
                                        KDpp(k, lambda_, KDPP_ENUMERATE))
    closed = dpp_wbar_closed_form(problem, k, lambda_)
    # uniform subsets and M = I / (lambda k): W_bar = k / (m lambda k) I
    assert_allclose(closed, np.eye(5) * k / (5 * lambda_ * k),
                    rtol=1e-12, atol=1e-14)
    assert_allclose(closed, enumerated, rtol=1e-12, atol=1e-14)


def test_dpp_alpha_bound_limits():
    problem = LeastSquaresProblem(np.eye(6)[:, :3], np.ones(6))
    assert dpp_alpha_bound(problem, 2, 1e-12, 1) == pytest.approx(1 / 3)
    assert dpp_alpha_bound(problem, 2, 1e12, 1) < 1e-10
    with pytest.raises(ParameterError):
        dpp_alpha_bound(problem, 2, 0.1, 2)


def test_dpp_limit_is_ols_solution():
    problem = random_problem(10, 3, seed=15)
    lambda_ = 1e-3
    dpp = compute_report(problem, ReblockMass(lambda_),
                         KDpp(2, lambda_, KDPP_ENUMERATE), ENUMERATE)
    uniform = reblock_report(problem, lambda_)
    assert_allclose(dpp.x_rho, problem.x_star, atol=1e-8)
    assert uniform.bias_norm > 1e-6


def test_report_json_round_trip(isosceles):
    report = reblock_report(isosceles, 0.1)
    data = json.loads(json.dumps(report.to_json('1.2.3')))
    assert data['version'] == '1.2.3'
    assert data['mass'] == 'reblock'
    assert data['lambda'] == 0.1
    assert data['sampler'] == 'uniform'
    assert data['k'] == 2
    rebuilt = report_from_json(isosceles, data, ReblockMass(0.1),
                               UniformSubsets(2))
    assert_allclose(rebuilt.w_bar, report.w_bar)
    assert_allclose(rebuilt.x_rho, report.x_rho)
    assert rebuilt.bias_norm == pytest.approx(report.bias_norm)
    with pytest.raises(ProblemIOError):
        report_from_json(isosceles, {'mode': 'enumerate'}, RbkMass(),
                         UniformSubsets(2))


def test_msgd_weights_are_uniform(small_problem):
    report = compute_report(small_problem, MsgdMass(0.5), UniformSubsets(2),
                            ENUMERATE)
    # M = (eta / k) I and each row is in a block with probability k / m
    assert_allclose(report.w_bar, 0.5 / 8 * np.eye(8), atol=1e-15)
    assert_allclose(report.x_rho, small_problem.x_star, atol=1e-10)
    assert report.kappa_w == pytest.approx(1.0)


@pytest.mark.parametrize('mass', [RbkMass(), ReblockMass(0.01)], ids=str)
def test_weighted_normal_equations_and_averaged_projection(mass):
    problem = random_problem(9, 4, seed=41)
    report = compute_report(problem, mass, UniformSubsets(3), ENUMERATE)
    r_rho = problem.residual(report.x_rho)
    assert_allclose(problem.a.T @ report.w_bar @ r_rho, np.zeros(4),
                    atol=1e-9)
    eigenvalues = np.linalg.eigvalsh(report.p_bar)
    assert eigenvalues.min() >= -1e-12
    assert eigenvalues.max() <= 1.0 + 1e-9
    assert np.linalg.matrix_rank(report.p_bar) == \
        np.linalg.matrix_rank(problem.a)


def seeded_traces(problem, mass, k, total, burn_in, runs):
    return [
        run(problem, SolverConfig(mass, UniformSubsets(k), total, burn_in,
                                  seed=seed, record_every=total))
        for seed in range(runs)]


@pytest.mark.slow
@pytest.mark.parametrize('mass', [RbkMass(), ReblockMass(1e-3)], ids=str)
def test_tail_averages_concentrate_at_limit(mass):
    problem = random_problem(12, 4, seed=42)
    report = compute_report(problem, mass, UniformSubsets(3), ENUMERATE)
    traces = seeded_traces(problem, mass, 3, 400, 200, 200)
    estimates = np.array([trace.final_tail_x for trace in traces])
    error = estimates.std(axis=0, ddof=1) / np.sqrt(len(estimates))
    assert np.all(np.abs(estimates.mean(axis=0) - report.x_rho) <=
                  4 * error + 1e-12)


@pytest.mark.slow
@pytest.mark.parametrize('mass', [RbkMass(), ReblockMass(1e-3)], ids=str)
def test_expected_iterate_decays_geometrically(mass):
    problem = random_problem(12, 4, seed=43)
    report = compute_report(problem, mass, UniformSubsets(3), ENUMERATE)
    for total in (5, 10, 20, 40):
        traces = seeded_traces(problem, mass, 3, total, 0, 500)
        finals = np.array([trace.final_x for trace in traces])
        error = np.linalg.norm(finals.std(axis=0, ddof=1)) / \
            np.sqrt(len(finals))
        # x0 = 0
        bound = (1 - report.alpha) ** total * np.linalg.norm(report.x_rho)
        assert np.linalg.norm(finals.mean(axis=0) - report.x_rho) <= \
            bound + 4 * error


@pytest.mark.slow
@pytest.mark.parametrize('mass', [RbkMass(), ReblockMass(1e-3)], ids=str)
def test_tail_average_error_halves_when_tail_doubles(mass):
    problem = random_problem(12, 4, seed=44)
    report = compute_report(problem, mass, UniformSubsets(3), ENUMERATE)

    def mean_squared_error(tail):
        traces = seeded_traces(problem, mass, 3, 200 + tail, 200, 400)
        return np.mean([np.sum((trace.final_tail_x - report.x_rho) ** 2)
                        for trace in traces])

    ratio = mean_squared_error(200) / mean_squared_error(400)
    assert 1.4 <= ratio <= 2.8


def test_enumeration_honours_thread_setting(monkeypatch, small_problem):
    seen = []
    executor = oracle.ThreadPoolExecutor

    def recording_executor(max_workers=None):
        seen.append(max_workers)
        return executor(max_workers=max_workers)

    monkeypatch.setattr(oracle, 'ThreadPoolExecutor', recording_executor)
    monkeypatch.setenv('ROWSOLVE_THREADS', '1')
    compute_report(small_problem, RbkMass(), UniformSubsets(2), ENUMERATE)
    assert seen == [1]
