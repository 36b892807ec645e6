#!/usr/bin/env python3
"""
Problem bundles on disk.

A bundle is a directory holding either A.csv + b.csv (finite problems) or
L.csv (Gaussian streaming problems), plus meta.json. CSV files start with a
`# rows cols` header and store every value as its shortest round-trip
decimal, so a save/load cycle is bit-exact.
"""

import json
import logging
import numpy as np
from pathlib import Path
from errors import ProblemIOError, RowSolveError
from problem import GaussianProblem, LeastSquaresProblem

META_FILE = 'meta.json'
A_FILE = 'A.csv'
B_FILE = 'b.csv'
L_FILE = 'L.csv'

# meta.json keys owned by the bundle format rather than by the generator
RESERVED_META = ('kind', 'x_star', 'residual_norm', 'noise_std')


def write_matrix_csv(matrix, path):
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    lines = ['# {} {}'.format(matrix.shape[0], matrix.shape[1])]
    for row in matrix:
        lines.append(','.join(repr(float(value)) for value in row))
    Path(path).write_text('\n'.join(lines) + '\n')


def write_vector_csv(vector, path):
    write_matrix_csv(np.asarray(vector, dtype=np.float64).reshape(-1, 1), path)


def read_matrix_csv(path):
    """Parse a `# rows cols` CSV file, naming the file in any error"""
    path = Path(path)
    if not path.is_file():
        raise ProblemIOError('Missing problem file {}'.format(path.name),
                             path.name)
    lines = [line for line in path.read_text().splitlines() if line.strip()]
    try:
        header = lines[0].lstrip('#').split()
        rows, cols = int(header[0]), int(header[1])
        values = [[float(field) for field in line.split(',')]
                  for line in lines[1:]]
    except (IndexError, ValueError) as error:
        raise ProblemIOError('Corrupt problem file {}: {}'.format(
            path.name, error), path.name)
    if not lines[0].startswith('#') or len(values) != rows or \
            any(len(row) != cols for row in values):
        raise ProblemIOError(
            'Corrupt problem file {}: contents do not match header "{}"'
            .format(path.name, lines[0]), path.name)
    return np.array(values, dtype=np.float64).reshape(rows, cols)


def read_vector_csv(path):
    matrix = read_matrix_csv(path)
    if matrix.shape[1] != 1:
        raise ProblemIOError('Corrupt problem file {}: expected one column'
                             .format(Path(path).name), Path(path).name)
    return matrix[:, 0]


def save_problem(problem, directory):
    """Write the problem bundle into directory (created if missing)"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    meta = {key: value for (key, value) in problem.meta.items()
            if key not in RESERVED_META}
    if problem.is_streaming:
        write_matrix_csv(problem.l_factor, directory / L_FILE)
        meta['kind'] = 'gaussian'
        meta['noise_std'] = problem.noise_std
    else:
        write_matrix_csv(problem.a, directory / A_FILE)
        write_vector_csv(problem.b, directory / B_FILE)
        meta['kind'] = 'finite'
        if problem.residual_norm is not None:
            meta['residual_norm'] = float(problem.residual_norm)
    if problem.x_star is not None:
        meta['x_star'] = [float(value) for value in problem.x_star]
    (directory / META_FILE).write_text(json.dumps(meta, indent=2) + '\n')
    logging.info('Wrote {} problem bundle to {}'.format(
        problem.family, directory))


def read_meta(directory):
    path = Path(directory) / META_FILE
    if not path.is_file():
        raise ProblemIOError('Missing problem file {}'.format(META_FILE),
                             META_FILE)
    try:
        meta = json.loads(path.read_text())
    except json.JSONDecodeError as error:
        raise ProblemIOError('Corrupt problem file {}: {}'.format(
            META_FILE, error), META_FILE)
    if not isinstance(meta, dict):
        raise ProblemIOError('Corrupt problem file {}: expected an object'
                             .format(META_FILE), META_FILE)
    return meta


def load_problem(directory):
    """Read a bundle written by save_problem"""
    directory = Path(directory)
    if not directory.is_dir():
        raise ProblemIOError('Problem bundle {} does not exist'.format(
            directory))
    meta = read_meta(directory)
    kind = meta.get('kind', 'finite')
    extra = {key: value for (key, value) in meta.items()
             if key not in RESERVED_META}
    try:
        if kind == 'gaussian':
            return GaussianProblem(read_matrix_csv(directory / L_FILE),
                                   meta['x_star'], meta['noise_std'],
                                   meta=extra)
        return LeastSquaresProblem(read_matrix_csv(directory / A_FILE),
                                   read_vector_csv(directory / B_FILE),
                                   x_star=meta.get('x_star'),
                                   residual_norm=meta.get('residual_norm'),
                                   meta=extra)
    except KeyError as error:
        raise ProblemIOError('Corrupt problem file {}: missing {}'.format(
            META_FILE, error), META_FILE)
    except ProblemIOError:
        raise
    except RowSolveError as error:
        raise ProblemIOError('Inconsistent problem bundle {}: {}'.format(
            directory, error))
