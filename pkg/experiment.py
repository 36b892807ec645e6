#!/usr/bin/env python3
"""
Experiments: a problem plus a list of solver specifications, each run over a
list of seeds, with one trace CSV per run and an aggregated summary.json
"""

import json
import logging
import numpy as np
from pathlib import Path
from bundle import load_problem
from errors import NumericError, ParameterError, ProblemIOError
from msgdmass import MsgdMass
from reblockmass import DEFAULT_LAMBDA
from registry import make_generator, make_mass, make_sampler
from solver import SolverConfig, read_trace_csv, run, run_many, \
    write_trace_csv

SUMMARY_FILE = 'summary.json'
SUMMARY_FIELDS = ['rel_err', 'rel_residual', 'tail_rel_err',
                  'tail_rel_residual']
INSTABILITY_FACTOR = 10.0
DEFAULT_TB_FRAC = 0.5
DEFAULT_PILOT_ITERS = 1000


class ExperimentConfig():
    """
    problem:  path of a bundle, or an inline generator description
              {"family": ..., "seed": ..., <generator parameters>}
    solvers:  [{"mass": ..., "k": ..., "T": ..., "seeds": [...], ...}]
    """

    def __init__(self, problem, solvers, outputs, record_every=1,
                 omit_wall_time=False):
        self.problem = problem
        self.solvers = solvers
        self.outputs = Path(outputs)
        self.record_every = int(record_every)
        self.omit_wall_time = omit_wall_time
        self.validate()

    def validate(self):
        if not self.solvers:
            raise ParameterError('Experiment lists no solvers')
        for spec in self.solvers:
            for key in ('mass', 'k', 'T', 'seeds'):
                if key not in spec:
                    raise ParameterError(
                        'Solver entry {} is missing "{}"'.format(spec, key))
            if not spec['seeds']:
                raise ParameterError('Solver entry {} lists no seeds'.format(
                    spec['mass']))
        if self.record_every < 1:
            raise ParameterError('record_every must be at least 1')

    @classmethod
    def from_json(cls, path, outputs=None):
        path = Path(path)
        if not path.is_file():
            raise ProblemIOError('Missing experiment config {}'.format(
                path.name), path.name)
        try:
            data = json.loads(path.read_text())
            problem = data['problem']
            if isinstance(problem, str) and not Path(problem).is_absolute():
                # bundle paths are relative to the config file
                problem = str(path.parent / problem)
            return cls(problem, data['solvers'],
                       outputs or data.get('outputs', 'out'),
                       data.get('record_every', 1),
                       data.get('omit_wall_time', False))
        except (json.JSONDecodeError, KeyError, TypeError) as error:
            raise ProblemIOError('Corrupt experiment config {}: {}'.format(
                path.name, error), path.name)


def parse_eta_grid(text):
    """`grid:LOW..HIGH` into (low, high)"""
    kind, _, bounds = str(text).partition(':')
    low, _, high = bounds.partition('..')
    try:
        low, high = float(low), float(high)
    except ValueError:
        raise ParameterError('Invalid step-size grid "{}": expected '
                             'grid:LOW..HIGH'.format(text))
    if kind != 'grid' or not 0.0 < low <= high:
        raise ParameterError('Invalid step-size grid "{}": expected '
                             'grid:LOW..HIGH with 0 < LOW <= HIGH'.format(text))
    return low, high


def is_stable(trace):
    """No recorded residual exceeds INSTABILITY_FACTOR times the initial one"""
    initial = trace.records[0].rel_residual
    return all(np.isfinite(record.rel_residual) and
               record.rel_residual <= INSTABILITY_FACTOR * initial
               for record in trace.records)


def tune_eta(problem, sampler, low, high, pilot_iters=DEFAULT_PILOT_ITERS,
             seed=0):
    """
    Largest stable mSGD step size of the doubling grid low * 2^j <= high,
    judged on pilot runs and stopping at the first unstable step size
    """
    best = None
    eta = low
    while eta <= high * (1.0 + 1e-12):
        config = SolverConfig(MsgdMass(eta), sampler, pilot_iters,
                              burn_in=0, seed=seed,
                              record_every=max(1, pilot_iters // 20))
        try:
            stable = is_stable(run(problem, config))
        except NumericError:
            stable = False
        logging.info('Pilot run with eta = {:.3e}: {}'.format(
            eta, 'stable' if stable else 'unstable'))
        if not stable:
            break
        best = eta
        eta *= 2.0
    if best is None:
        raise ParameterError(
            'No stable mSGD step size in [{}, {}]'.format(low, high))
    logging.info('Tuned mSGD step size: eta = {:.3e}'.format(best))
    return best


def as_list(value, default):
    if value is None:
        return [default]
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


def summarise_finals(finals):
    """
    Mean and population standard deviation over seeds of each final metric;
    finals is a list of final TraceRecords
    """
    summary = {}
    for field in SUMMARY_FIELDS:
        values = [getattr(record, field) for record in finals
                  if getattr(record, field) is not None]
        summary[field] = None if not values else {
            'mean': float(np.mean(values)),
            'std': float(np.std(values)),
        }
    return summary


def trace_filename(label, seed):
    return '{}_seed{}.csv'.format(label, seed)


def summarise_directory(directory):
    """Recompute per-label summaries from the trace CSVs alone"""
    finals = {}
    for path in sorted(Path(directory).glob('*_seed*.csv')):
        label, _, _ = path.stem.rpartition('_seed')
        finals.setdefault(label, []).append(read_trace_csv(path)[-1])
    return {label: summarise_finals(records)
            for (label, records) in finals.items()}


class Experiment():
    """Run every (solver, seed) pair of an ExperimentConfig"""

    def __init__(self, config, version, workers=None):
        self.config = config
        self.version = version
        self.workers = workers

    def load_problem(self):
        problem = self.config.problem
        if isinstance(problem, dict):
            params = dict(problem)
            family = params.pop('family', None)
            seed = int(params.pop('seed', 0))
            generator = make_generator(family, params, seed, self.version)
            return generator.run(self.config.outputs / 'problem')
        return load_problem(problem)

    def expand(self, problem, spec):
        """(label, params, [SolverConfig per seed]) for each sweep point"""
        total = int(spec['T'])
        fractions = as_list(spec.get('tb_frac'), DEFAULT_TB_FRAC)
        lambdas = as_list(spec.get('lambda'), DEFAULT_LAMBDA)
        if spec['mass'] != 'reblock' and spec.get('sampler') != 'kdpp':
            lambdas = lambdas[:1]
        eta = spec.get('eta')
        base = spec.get('label', spec['mass'])
        points = []
        for fraction in fractions:
            if not 0.0 <= float(fraction) < 1.0:
                raise ParameterError('Burn-in fraction {} must lie in '
                                     '[0, 1)'.format(fraction))
            for lambda_ in lambdas:
                label = base
                if len(fractions) > 1:
                    label += '-tb{}'.format(fraction)
                if len(lambdas) > 1:
                    label += '-lambda{}'.format(lambda_)
                sampler = make_sampler(spec.get('sampler'), spec['k'],
                                       problem, float(lambda_),
                                       spec.get('kdpp_mode', 'eigen'))
                if spec['mass'] == 'msgd' and spec.get('tune_eta'):
                    low, high = parse_eta_grid(spec['tune_eta'])
                    eta = tune_eta(
                        problem, sampler, low, high,
                        min(total, spec.get('pilot_iters',
                                            DEFAULT_PILOT_ITERS)),
                        spec['seeds'][0])
                mass = make_mass(spec['mass'], float(lambda_), eta,
                                 spec.get('rank_tol'))
                burn_in = spec.get('T_b', int(float(fraction) * total))
                configs = [SolverConfig(mass, sampler, total, burn_in,
                                        seed=seed,
                                        record_every=self.config.record_every,
                                        label=label)
                           for seed in spec['seeds']]
                params = {**mass.describe(), **sampler.describe(),
                          'T': total, 'T_b': burn_in}
                points.append((label, params, configs))
        return points

    def run(self):
        """Execute all runs, write traces and summary.json, return the summary"""
        out_dir = self.config.outputs
        out_dir.mkdir(parents=True, exist_ok=True)
        problem = self.load_problem()
        points = []
        for spec in self.config.solvers:
            points.extend(self.expand(problem, spec))
        configs = [config for (_, _, group) in points for config in group]
        outcomes = iter(run_many(problem, configs, self.workers))

        solvers = {}
        for (label, params, group) in points:
            finals, seeds, failed = [], [], []
            for config in group:
                outcome = next(outcomes)
                if outcome.failed:
                    failed.append({'seed': config.seed,
                                   'error': str(outcome.error)})
                    continue
                write_trace_csv(outcome.trace,
                                out_dir / trace_filename(label, config.seed),
                                self.config.omit_wall_time)
                seeds.append(config.seed)
                finals.append(outcome.trace.final)
            solvers[label] = {
                'params': params,
                'seeds': seeds,
                'failed': failed,
                'final': summarise_finals(finals),
            }

        summary = {
            'version': self.version,
            'problem': self.config.problem if isinstance(
                self.config.problem, dict) else str(self.config.problem),
            'family': problem.family,
            'solvers': solvers,
        }
        (out_dir / SUMMARY_FILE).write_text(
            json.dumps(summary, indent=2) + '\n')
        logging.info('Wrote {} traces and {} to {}'.format(
            len(configs), SUMMARY_FILE, out_dir))
        return summary


def all_failed(summary):
    return all(not entry['seeds'] for entry in summary['solvers'].values())
