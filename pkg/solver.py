#!/usr/bin/env python3
"""
The generalized row-access iteration with optional tail averaging

    for t = 1..T:  sample S_t ~ rho
                   x_t = x_{t-1} + A_S^T M(A_S) (b_S - A_S x_{t-1})
                   after the burn-in T_b, fold x_t into the running average

plus trace recording, trace CSV files and concurrent execution of
independent runs.
"""

import csv
import logging
import numpy as np
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from time import perf_counter
from denselinalg import as_vector
from errors import NumericError, ParameterError, ProblemIOError, \
    RowSolveError
from sampler import make_rng, next_block, thread_count

TRACE_FIELDS = ['iter', 'wall_seconds', 'rel_err', 'rel_residual',
                'tail_rel_err', 'tail_rel_residual']

# stream offset for the block used to estimate the initial residual of a
# streaming problem, kept apart from the iteration's own stream
METRICS_STREAM = 1 << 20


class SolverConfig():
    """Parameters of one run of the iteration"""

    def __init__(self, mass, sampler, total_iters, burn_in=None, seed=0,
                 x0=None, record_every=1, stream=0, label=None):
        self.mass = mass
        self.sampler = sampler
        self.total_iters = int(total_iters)
        self.burn_in = self.total_iters // 2 if burn_in is None \
            else int(burn_in)
        self.seed = int(seed)
        self.x0 = None if x0 is None else as_vector(x0, 'x0')
        self.record_every = int(record_every)
        self.stream = int(stream)
        self.label = label or mass.name
        self.validate()

    @property
    def k(self):
        return self.sampler.k

    def validate(self):
        if self.total_iters < 1:
            raise ParameterError('Total iterations T must be at least 1')
        if not 0 <= self.burn_in < self.total_iters:
            raise ParameterError(
                'Burn-in T_b = {} must satisfy 0 <= T_b < T = {}'.format(
                    self.burn_in, self.total_iters))
        if self.record_every < 1:
            raise ParameterError('record_every must be at least 1')

    def __str__(self):
        return '{} with {} (seed {}, T = {}, T_b = {})'.format(
            self.label, self.sampler, self.seed, self.total_iters,
            self.burn_in)


class TraceRecord():
    """Metrics at one iteration; tail fields are None before T_b + 1"""

    def __init__(self, iteration, wall_seconds, rel_err, rel_residual,
                 tail_rel_err=None, tail_rel_residual=None):
        self.iteration = iteration
        self.wall_seconds = wall_seconds
        self.rel_err = rel_err
        self.rel_residual = rel_residual
        self.tail_rel_err = tail_rel_err
        self.tail_rel_residual = tail_rel_residual

    def as_row(self, omit_wall_time=False):
        values = [self.wall_seconds, self.rel_err, self.rel_residual,
                  self.tail_rel_err, self.tail_rel_residual]
        if omit_wall_time:
            values[0] = None
        row = {'iter': str(self.iteration)}
        for (field, value) in zip(TRACE_FIELDS[1:], values):
            row[field] = '' if value is None else repr(float(value))
        return row


class SolverTrace():

    def __init__(self, config, records, final_x, final_tail_x):
        self.config = config
        self.records = records
        self.final_x = final_x
        self.final_tail_x = final_tail_x

    @property
    def final(self):
        return self.records[-1]


class TailAverage():
    """Running mean updated in place, x_bar <- x_bar + (x - x_bar) / count"""

    def __init__(self, size):
        self.mean = np.zeros(size)
        self.count = 0

    def update(self, x):
        self.count += 1
        self.mean += (x - self.mean) / self.count

    @property
    def value(self):
        return self.mean.copy() if self.count else None


def tail_average(xs, burn_in):
    """Average of x_{T_b+1}, ..., x_T for the iterates xs = (x_1, ..., x_T)"""
    xs = list(xs)
    if not 0 <= burn_in < len(xs):
        raise ParameterError(
            'Burn-in T_b = {} must satisfy 0 <= T_b < T = {}'.format(
                burn_in, len(xs)))
    average = TailAverage(np.asarray(xs[0]).shape[0])
    for x in xs[burn_in:]:
        average.update(np.asarray(x, dtype=np.float64))
    return average.value


def apply_update(x, block, mass):
    return mass.apply_update(x, block)


def block_relative_residual(block, x):
    """||A_S x - b_S|| / ||b_S||, the residual estimate for streamed data"""
    b_norm = np.linalg.norm(block.b_block)
    r_norm = np.linalg.norm(block.b_block - block.a_block @ x)
    return float(r_norm / b_norm) if b_norm > 0 else float(r_norm)


def measure(problem, x, tail, block):
    """(rel_err, rel_residual, tail_rel_err, tail_rel_residual)"""
    if problem.is_streaming:
        residual = block_relative_residual(block, x)
        tail_residual = None if tail is None else \
            block_relative_residual(block, tail)
    else:
        residual = problem.relative_residual(x)
        tail_residual = None if tail is None else \
            problem.relative_residual(tail)
    tail_error = None if tail is None else problem.relative_error(tail)
    return problem.relative_error(x), residual, tail_error, tail_residual


def run(problem, config):
    """Execute one run; deterministic given config.seed and config.stream"""
    logging.info('Starting run: {}'.format(config))
    rng = make_rng(config.seed, config.stream)
    n = problem.n
    x = np.zeros(n) if config.x0 is None else config.x0.copy()
    if x.shape[0] != n:
        raise ParameterError('x0 has length {} but n = {}'.format(
            x.shape[0], n))
    tail = TailAverage(n)

    first_block = None
    if problem.is_streaming:
        first_block = next_block(
            problem, config.sampler,
            make_rng(config.seed, config.stream + METRICS_STREAM))
    else:
        config.sampler.check_problem(problem)
    records = [TraceRecord(0, 0.0, *measure(problem, x, None, first_block))]

    elapsed = 0.0
    for t in range(1, config.total_iters + 1):
        block = next_block(problem, config.sampler, rng)
        start = perf_counter()
        try:
            x = config.mass.apply_update(x, block)
        except NumericError as error:
            raise NumericError('Iteration {}: {}'.format(t, error),
                               iteration=t)
        if t > config.burn_in:
            tail.update(x)
        elapsed += perf_counter() - start

        if not np.all(np.isfinite(x)):
            raise NumericError(
                'Iterate became non-finite at iteration {}'.format(t),
                iteration=t)
        if t % config.record_every == 0 or t == config.total_iters:
            record = TraceRecord(t, elapsed,
                                 *measure(problem, x, tail.value, block))
            logging.debug('{} iter {}: rel_residual {:.3e}'.format(
                config.label, t, record.rel_residual))
            records.append(record)

    logging.info('Finished run: {} ({:.3f}s in updates)'.format(
        config, elapsed))
    return SolverTrace(config, records, x, tail.value)


class RunOutcome():
    """Trace of a finished run, or the error that stopped it"""

    def __init__(self, config, trace=None, error=None):
        self.config = config
        self.trace = trace
        self.error = error

    @property
    def failed(self):
        return self.trace is None


def _run_guarded(problem, config):
    try:
        return RunOutcome(config, trace=run(problem, config))
    except RowSolveError as error:
        logging.error('Run {} failed: {}'.format(config, error))
        return RunOutcome(config, error=error)


def run_many(problem, configs, workers=None):
    """
    Execute independent runs over a thread pool, returning one RunOutcome per
    config in input order. The problem is shared read-only; each run owns its
    RNG stream and its trace.
    """
    workers = workers or thread_count()
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(_run_guarded, problem, config)
                   for config in configs]
        return [future.result() for future in futures]


def write_trace_csv(trace, path, omit_wall_time=False):
    with open(path, 'w', newline='') as handle:
        writer = csv.DictWriter(handle, fieldnames=TRACE_FIELDS,
                                lineterminator='\n')
        writer.writeheader()
        for record in trace.records:
            writer.writerow(record.as_row(omit_wall_time))


def read_trace_csv(path):
    """TraceRecords from a trace CSV, with empty fields read as None"""
    path = Path(path)
    if not path.is_file():
        raise ProblemIOError('Missing trace file {}'.format(path.name),
                             path.name)
    records = []
    with open(path, newline='') as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != TRACE_FIELDS:
            raise ProblemIOError('Corrupt trace file {}: unexpected header'
                                 .format(path.name), path.name)
        try:
            for row in reader:
                values = [None if row[field] == '' else float(row[field])
                          for field in TRACE_FIELDS[1:]]
                records.append(TraceRecord(int(row['iter']), *values))
        except ValueError as error:
            raise ProblemIOError('Corrupt trace file {}: {}'.format(
                path.name, error), path.name)
    return records
