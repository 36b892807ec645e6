import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from chebyshevgenerator import DECAYING, ChebyshevSpec, gen_chebyshev
from bundle import write_matrix_csv, write_vector_csv
from denselinalg import condition_number
from errors import DimensionError, NumericError, ParameterError
from gaussiangenerator import demmel_condition_squared, gen_gaussian, \
    parse_spectrum, sample_gaussian_block
from isoscelesgenerator import centroid, gen_isosceles
from noisygenerator import gen_gaussian_matrix, gen_noisy
from problem import GaussianProblem, LeastSquaresProblem
from registry import make_generator
from sampler import make_rng


def test_problem_dimension_mismatch():
    with pytest.raises(DimensionError):
        LeastSquaresProblem(np.eye(3), [1.0, 2.0])


def test_problem_residual_norm_from_x_star(small_problem):
    expected = np.linalg.norm(small_problem.b -
                              small_problem.a @ small_problem.x_star)
    assert small_problem.residual_norm == pytest.approx(expected)
    small_problem.check_normal_equations()


def test_check_normal_equations_rejects_wrong_solution():
    problem = LeastSquaresProblem(np.eye(2), [1.0, 1.0], x_star=[0.0, 0.0])
    with pytest.raises(NumericError):
        problem.check_normal_equations()


def test_isosceles_unit_epsilon():
    problem = gen_isosceles(1.0)
    assert_allclose(problem.a, [[0.0, 1.0], [1.0, 1.0], [1.0, -1.0]])
    assert_allclose(problem.b, [0.0, 2.0, 0.0])
    assert_allclose(problem.x_star, [1.0, 2.0 / 3.0])
    problem.check_normal_equations()


def test_isosceles_small_epsilon():
    problem = gen_isosceles(1e-4)
    assert_allclose(problem.x_star, [1.0, 0.0], atol=1e-10)
    problem = gen_isosceles(0.1)
    direct = np.linalg.norm(problem.b - problem.a @ problem.x_star)
    assert problem.residual_norm == pytest.approx(direct, rel=1e-12)
    assert_allclose(centroid(0.1), [1.0, 1.0 / 0.3])


@pytest.mark.parametrize('epsilon', [0.0, -0.5, 1.5])
def test_isosceles_invalid_epsilon(epsilon):
    with pytest.raises(ParameterError):
        gen_isosceles(epsilon)


def test_parse_spectrum():
    assert_allclose(parse_spectrum('flat', 3), np.ones(3))
    assert_allclose(parse_spectrum('poly:2', 3), [1.0, 0.5, 1.0 / 3.0])
    assert_allclose(parse_spectrum('exp:0.5', 3), [1.0, 0.5, 0.25])
    assert_allclose(parse_spectrum('3,2,1', 3), [3.0, 2.0, 1.0])
    with pytest.raises(ParameterError):
        parse_spectrum('3,2', 3)
    with pytest.raises(ParameterError):
        parse_spectrum('exp:2', 3)


def test_demmel_condition_polynomial_decay():
    n = 10
    spectrum = parse_spectrum('poly:4', n)
    expected = math.fsum(i ** -4.0 for i in range(1, n + 1)) / n ** -4.0
    assert demmel_condition_squared(spectrum) == \
        pytest.approx(expected, rel=1e-10)


def test_gaussian_one_dimensional_consistent():
    problem = gen_gaussian(1, [1.0], [2.0], 0.0, seed=0)
    block = sample_gaussian_block(problem, 50, make_rng(1))
    assert np.array_equal(block.b_block, 2.0 * block.a_block[:, 0])


def test_gaussian_noiseless_rows_are_consistent():
    problem = gen_gaussian(3, [2.0, 1.0, 0.5], [1.0, -1.0, 0.5], 0.0, seed=4)
    block = sample_gaussian_block(problem, 20, make_rng(2))
    assert_allclose(block.b_block, block.a_block @ problem.x_star,
                    atol=1e-12)


def test_gaussian_factor_has_requested_spectrum():
    spectrum = parse_spectrum('poly:2', 6)
    problem = gen_gaussian(6, spectrum, np.ones(6), 0.1, seed=3)
    assert isinstance(problem, GaussianProblem)
    assert_allclose(problem.spectrum(), spectrum, rtol=1e-10)
    assert np.all(np.triu(problem.l_n, 1) == 0.0)
    assert np.all(np.diag(problem.l_n) > 0.0)


def test_gaussian_block_shape():
    problem = gen_gaussian(2, [1.0, 1.0], [1.0, -1.0], 0.1, seed=0)
    block = sample_gaussian_block(problem, 3, make_rng(0))
    assert block.a_block.shape == (3, 2)
    assert block.b_block.shape == (3,)
    assert block.indices is None


def test_gaussian_sample_ols_recovers_planted():
    problem = gen_gaussian(2, [1.0, 1.0], [1.0, -1.0], 0.1, seed=0)
    a, b = problem.sample_rows(100000, make_rng(5))
    estimate = np.linalg.lstsq(a, b, rcond=None)[0]
    # five standard errors of 0.1 / sqrt(1e5) per coefficient
    assert_allclose(estimate, [1.0, -1.0], atol=5 * 0.1 / math.sqrt(1e5))


@pytest.mark.slow
def test_gaussian_sample_covariance():
    problem = gen_gaussian(3, [1.5, 1.0, 0.5], [0.5, 1.0, -1.0], 0.2,
                           seed=9)
    draws = 100000
    a, b = problem.sample_rows(draws, make_rng(6))
    rows = np.column_stack([a, b])
    covariance = problem.covariance()
    empirical = rows.T @ rows / draws
    diagonal = np.diag(covariance)
    error = np.sqrt((covariance ** 2 + np.outer(diagonal, diagonal)) / draws)
    assert np.all(np.abs(empirical - covariance) <= 5 * error)


def test_gaussian_rejects_bad_spectrum():
    with pytest.raises(ParameterError):
        gen_gaussian(2, [1.0, 0.0], [1.0, 1.0], 0.1, seed=0)
    with pytest.raises(ParameterError):
        gen_gaussian(2, [1.0, 2.0], [1.0, 1.0], 0.1, seed=0)


def test_chebyshev_single_polynomial():
    problem = gen_chebyshev(ChebyshevSpec(n=1, m=9, noise_std=0.0))
    assert_allclose(problem.a[:, 0], np.linspace(-1.0, 1.0, 9))


def test_chebyshev_consistent_recovers_planted():
    problem = gen_chebyshev(ChebyshevSpec(n=4, m=64, noise_std=0.0, seed=3))
    assert_allclose(problem.x_star, problem.meta['planted'], atol=1e-8)


def test_chebyshev_decaying_spectrum_is_ill_conditioned():
    spec = ChebyshevSpec(n=50, m=2000, c_kind=DECAYING, exponent=1.0,
                         seed=7)
    kappa = condition_number(gen_chebyshev(spec).a)
    assert np.isfinite(kappa)
    assert kappa > 10.0


def test_chebyshev_requires_tall_matrix():
    with pytest.raises(ParameterError):
        ChebyshevSpec(n=5, m=4)


def test_chebyshev_is_deterministic():
    spec = ChebyshevSpec(n=5, m=40, c_kind=DECAYING, seed=2)
    first, second = gen_chebyshev(spec), gen_chebyshev(spec)
    assert np.array_equal(first.a, second.a)
    assert np.array_equal(first.b, second.b)


def test_noisy_without_noise_recovers_planted(rng):
    a = rng.standard_normal((30, 4))
    planted = rng.standard_normal(4)
    problem = gen_noisy(a, planted, 0.0, seed=1)
    assert_allclose(problem.x_star, planted, atol=1e-9)


def test_noisy_zero_column_stays_zero(rng):
    a = rng.standard_normal((20, 3))
    a[:, 1] = 0.0
    problem = gen_noisy(a, [1.0, 2.0, 3.0], 0.1, seed=1)
    assert problem.x_star[1] == pytest.approx(0.0, abs=1e-12)


def test_noisy_error_scales_with_noise():
    ratios = []
    for seed in range(10):
        problem = gen_gaussian_matrix(1000, 10, 0.0, 1e-2, seed)
        error = np.linalg.norm(problem.x_star - problem.meta['planted'])
        bound = 1e-2 * math.sqrt(problem.n) / \
            np.linalg.svd(problem.a, compute_uv=False)[-1]
        ratios.append(error / bound)
    assert 0.05 < np.median(ratios) < 5.0


def test_make_generator_unknown_family():
    with pytest.raises(ParameterError):
        make_generator('triangle', {}, 0, '0')


def test_generator_missing_parameter(tmp_path):
    generator = make_generator('chebyshev', {'n': 3}, 0, '0')
    with pytest.raises(ParameterError) as error:
        generator.run(tmp_path / 'cheb')
    assert 'missing value for m' in str(error.value)


def test_generator_run_stamps_meta(tmp_path, capsys):
    generator = make_generator('isosceles', {'epsilon': 0.25}, 5, '9.9.9')
    problem = generator.run(tmp_path / 'tri')
    assert problem.meta['family'] == 'isosceles'
    assert problem.meta['seed'] == 5
    assert problem.meta['version'] == '9.9.9'
    assert 'm = 3' in capsys.readouterr().out


@pytest.mark.parametrize('epsilon', [1.0, 0.3, 0.01])
def test_isosceles_vertices(epsilon):
    problem = gen_isosceles(epsilon)
    vertices = [np.linalg.solve(problem.a[list(pair)], problem.b[list(pair)])
                for pair in ((0, 1), (0, 2), (1, 2))]
    assert_allclose(vertices, [[1 + epsilon, 0.0], [1 - epsilon, 0.0],
                               [1.0, 1.0 / epsilon]], rtol=1e-10, atol=1e-12)


def test_load_generator(tmp_path):
    a = np.array([[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]])
    write_matrix_csv(a, tmp_path / 'A.csv')
    write_vector_csv([1.0, 2.0, 0.0], tmp_path / 'b.csv')
    generator = make_generator('load', {'source': str(tmp_path)}, 0, '0')
    problem = generator.run(tmp_path / 'bundle')
    assert_allclose(problem.x_star,
                    np.linalg.lstsq(a, [1.0, 2.0, 0.0], rcond=None)[0],
                    atol=1e-12)
    assert problem.meta['family'] == 'load'

    write_vector_csv([1.0, 2.0], tmp_path / 'b.csv')
    with pytest.raises(DimensionError):
        generator.run(tmp_path / 'mismatch')
