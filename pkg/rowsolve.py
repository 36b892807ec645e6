#!/usr/bin/env python3
"""
Randomized block row-access least-squares solvers

Generate problems, run RBK / ReBlocK / mSGD traces with tail averaging,
compute exact or Monte Carlo oracles of the limit quantities, verify their
bounds and benchmark per-update cost.
"""

__version__ = '0.1.0'

import argparse
import csv
import json
import logging
import sys
from dotenv import load_dotenv
from pathlib import Path
from bench import bench_updates, write_bench_csv
from bundle import load_problem
from errors import NumericError, ParameterError, ProblemIOError, \
    TheoremViolation
from experiment import Experiment, ExperimentConfig, all_failed
from isoscelesgenerator import gen_isosceles
from ledger import check_bounds, check_gaussian_identity
from oracle import ENUMERATE, MONTECARLO, compute_report, report_from_json
from registry import GENERATORS_STR, MASS_MATRICES_STR, SAMPLERS_STR, \
    make_generator, make_mass, make_sampler
from uniformsampler import UniformSubsets

ORACLE_FILE = 'oracle.json'
SWEEP_FILE = 'oracle_sweep.csv'
SWEEP_FIELDS = ['epsilon', 'alpha', 'kappa_w', 'r_rho_norm', 'bias',
                'variance_v']
BENCH_FILE = 'bench.csv'
DEFAULT_GAUSSIAN_DRAWS = 10000

GENERATE_ARGS = [
    {
        "val": "--family",
        "dest": "family",
        "action": "store",
        "help": "Problem family. One of: {}".format(GENERATORS_STR),
    }, {
        "val": "--out",
        "dest": "out",
        "action": "store",
        "help": "Directory to write the problem bundle to",
    }, {
        "val": "--seed",
        "dest": "seed",
        "action": "store",
        "type": int,
        "default": 0,
        "help": "Seed of the generator's random stream",
    }, {
        "val": "--n",
        "dest": "n",
        "action": "store",
        "type": int,
        "default": None,
        "help": "Number of columns (gaussian, chebyshev, noisy)",
    }, {
        "val": "--m",
        "dest": "m",
        "action": "store",
        "type": int,
        "default": None,
        "help": "Number of rows (chebyshev, noisy)",
    }, {
        "val": "--spectrum",
        "dest": "spectrum",
        "action": "store",
        "default": None,
        "help": "Singular values of L_n (gaussian): flat, poly:BETA, "
                "exp:GAMMA or a comma list",
    }, {
        "val": "--decay",
        "dest": "decay",
        "action": "store",
        "type": float,
        "default": None,
        "help": "Spectral decay exponent of the coefficient matrix "
                "(chebyshev, noisy); 0 for none",
    }, {
        "val": "--noise-std",
        "dest": "noise_std",
        "action": "store",
        "type": float,
        "default": None,
        "help": "Standard deviation of the noise (variance is its square)",
    }, {
        "val": "--epsilon",
        "dest": "epsilon",
        "action": "store",
        "type": float,
        "default": None,
        "help": "Shape parameter in (0, 1] (isosceles)",
    }, {
        "val": "--planted",
        "dest": "planted",
        "action": "store",
        "default": None,
        "help": "Comma list for the planted solution (gaussian); random "
                "if absent",
    }, {
        "val": "--source",
        "dest": "source",
        "action": "store",
        "default": None,
        "help": "Directory with A.csv and b.csv (load), or a bundle whose "
                "matrix to reuse (noisy)",
    }
]

SOLVE_ARGS = [
    {
        "val": "--problem",
        "dest": "problem",
        "action": "store",
        "default": None,
        "help": "Problem bundle directory",
    }, {
        "val": "--config",
        "dest": "config",
        "action": "store",
        "default": None,
        "help": "ExperimentConfig JSON file (replaces the solver options)",
    }, {
        "val": "--out",
        "dest": "out",
        "action": "store",
        "help": "Directory for trace CSVs and summary.json",
    }, {
        "val": "--solver",
        "dest": "solver",
        "action": "store",
        "default": "rbk",
        "help": "Comma list of solvers. Each one of: {}".format(
            MASS_MATRICES_STR),
    }, {
        "val": "--sampler",
        "dest": "sampler",
        "action": "store",
        "default": None,
        "help": "Block sampler. One of: {} (default: gaussian for streaming "
                "problems, uniform otherwise)".format(SAMPLERS_STR),
    }, {
        "val": "--kdpp-mode",
        "dest": "kdpp_mode",
        "action": "store",
        "default": "eigen",
        "help": "k-DPP backend: eigen or enumerate",
    }, {
        "val": "--k",
        "dest": "k",
        "action": "store",
        "type": int,
        "default": 10,
        "help": "Block size",
    }, {
        "val": "--iters",
        "dest": "iters",
        "action": "store",
        "type": int,
        "default": 20000,
        "help": "Total iterations T",
    }, {
        "val": "--tb-frac",
        "dest": "tb_frac",
        "action": "store",
        "default": "0.5",
        "help": "Burn-in as a fraction of T; a comma list sweeps it",
    }, {
        "val": "--lambda",
        "dest": "lambda_",
        "action": "store",
        "default": "1e-3",
        "help": "ReBlocK / k-DPP regularization; a comma list sweeps it",
    }, {
        "val": "--eta",
        "dest": "eta",
        "action": "store",
        "type": float,
        "default": None,
        "help": "mSGD step size",
    }, {
        "val": "--tune-eta",
        "dest": "tune_eta",
        "action": "store",
        "default": None,
        "help": "Tune the mSGD step size on grid:LOW..HIGH by doubling",
    }, {
        "val": "--pilot-iters",
        "dest": "pilot_iters",
        "action": "store",
        "type": int,
        "default": 1000,
        "help": "Iterations of each step-size pilot run",
    }, {
        "val": "--rank-tol",
        "dest": "rank_tol",
        "action": "store",
        "type": float,
        "default": None,
        "help": "Relative rank threshold of the RBK block solve",
    }, {
        "val": "--seeds",
        "dest": "seeds",
        "action": "store",
        "default": "0",
        "help": "Comma list of seeds, one run per seed",
    }, {
        "val": "--record-every",
        "dest": "record_every",
        "action": "store",
        "type": int,
        "default": 100,
        "help": "Record metrics every this many iterations",
    }, {
        "val": "--omit-wall-time",
        "dest": "omit_wall_time",
        "action": "store_true",
        "default": False,
        "help": "Leave wall_seconds empty so reruns are byte-identical",
    }, {
        "val": "--workers",
        "dest": "workers",
        "action": "store",
        "type": int,
        "default": None,
        "help": "Worker threads (default: ROWSOLVE_THREADS or CPU count)",
    }
]

ORACLE_ARGS = [
    {
        "val": "--problem",
        "dest": "problem",
        "action": "store",
        "default": None,
        "help": "Problem bundle directory",
    }, {
        "val": "--out",
        "dest": "out",
        "action": "store",
        "help": "Directory for oracle.json / oracle_sweep.csv",
    }, {
        "val": "--solver",
        "dest": "solver",
        "action": "store",
        "default": "rbk",
        "help": "Mass matrix. One of: {}".format(MASS_MATRICES_STR),
    }, {
        "val": "--sampler",
        "dest": "sampler",
        "action": "store",
        "default": None,
        "help": "Block sampler. One of: {}".format(SAMPLERS_STR),
    }, {
        "val": "--kdpp-mode",
        "dest": "kdpp_mode",
        "action": "store",
        "default": "eigen",
        "help": "k-DPP backend for Monte Carlo draws: eigen or enumerate",
    }, {
        "val": "--k",
        "dest": "k",
        "action": "store",
        "type": int,
        "default": 2,
        "help": "Block size",
    }, {
        "val": "--lambda",
        "dest": "lambda_",
        "action": "store",
        "type": float,
        "default": 1e-3,
        "help": "ReBlocK / k-DPP regularization",
    }, {
        "val": "--eta",
        "dest": "eta",
        "action": "store",
        "type": float,
        "default": None,
        "help": "mSGD step size",
    }, {
        "val": "--rank-tol",
        "dest": "rank_tol",
        "action": "store",
        "type": float,
        "default": None,
        "help": "Relative rank threshold of the RBK block solve",
    }, {
        "val": "--mode",
        "dest": "mode",
        "action": "store",
        "default": ENUMERATE,
        "help": "{} or {}".format(ENUMERATE, MONTECARLO),
    }, {
        "val": "--draws",
        "dest": "draws",
        "action": "store",
        "type": int,
        "default": None,
        "help": "Monte Carlo draws (at least 1000)",
    }, {
        "val": "--seed",
        "dest": "seed",
        "action": "store",
        "type": int,
        "default": 0,
        "help": "Monte Carlo seed",
    }, {
        "val": "--sweep-epsilon",
        "dest": "sweep_epsilon",
        "action": "store",
        "default": None,
        "help": "Comma list of epsilon values: evaluate the isosceles family "
                "instead of --problem",
    }, {
        "val": "--workers",
        "dest": "workers",
        "action": "store",
        "type": int,
        "default": None,
        "help": "Worker threads for enumeration",
    }
]

VERIFY_ARGS = ORACLE_ARGS[:-2] + [
    {
        "val": "--oracle",
        "dest": "oracle",
        "action": "store",
        "default": None,
        "help": "oracle.json to verify (default: OUT/oracle.json, computed "
                "if absent)",
    }, {
        "val": "--inject-fault",
        "dest": "inject_fault",
        "action": "store_true",
        "default": False,
        "help": "Scale W_bar by 2 before verification (test hook)",
    }, {
        "val": "--workers",
        "dest": "workers",
        "action": "store",
        "type": int,
        "default": None,
        "help": "Worker threads for enumeration",
    }
]

BENCH_ARGS = [
    {
        "val": "--n",
        "dest": "n",
        "action": "store",
        "type": int,
        "default": 10000,
        "help": "Number of columns",
    }, {
        "val": "--k",
        "dest": "k",
        "action": "store",
        "type": int,
        "default": 200,
        "help": "Block size",
    }, {
        "val": "--trials",
        "dest": "trials",
        "action": "store",
        "type": int,
        "default": 100,
        "help": "Timed updates per solver",
    }, {
        "val": "--seed",
        "dest": "seed",
        "action": "store",
        "type": int,
        "default": 0,
        "help": "Seed of the synthetic blocks",
    }, {
        "val": "--out",
        "dest": "out",
        "action": "store",
        "help": "Directory for bench.csv",
    }
]


def parse_floats(text):
    try:
        return [float(value) for value in str(text).split(',') if value]
    except ValueError:
        raise ParameterError('Invalid number list "{}"'.format(text))


def parse_seeds(text):
    try:
        return [int(value) for value in str(text).split(',') if value]
    except ValueError:
        raise ParameterError('Invalid seed list "{}"'.format(text))


def require(value, option):
    if value is None:
        raise ParameterError('{} is required'.format(option))
    return value


def write_json(data, path):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(data, indent=2) + '\n')


def cmd_generate(arguments):
    """Write a problem bundle and print its summary"""
    params = vars(arguments)
    generator = make_generator(arguments.family, params, arguments.seed,
                               __version__)
    generator.run(arguments.out)


def cmd_solve(arguments):
    """Run every (solver, seed) pair; one trace CSV each plus summary.json"""
    if arguments.config is not None:
        config = ExperimentConfig.from_json(arguments.config, arguments.out)
        config.omit_wall_time = config.omit_wall_time or \
            arguments.omit_wall_time
    else:
        solvers = [{
            'mass': name,
            'k': arguments.k,
            'T': arguments.iters,
            'tb_frac': parse_floats(arguments.tb_frac),
            'lambda': parse_floats(arguments.lambda_),
            'eta': arguments.eta,
            'tune_eta': arguments.tune_eta,
            'pilot_iters': arguments.pilot_iters,
            'rank_tol': arguments.rank_tol,
            'sampler': arguments.sampler,
            'kdpp_mode': arguments.kdpp_mode,
            'seeds': parse_seeds(arguments.seeds),
        } for name in arguments.solver.split(',') if name]
        config = ExperimentConfig(
            require(arguments.problem, '--problem or --config'), solvers,
            arguments.out, arguments.record_every, arguments.omit_wall_time)
    summary = Experiment(config, __version__, arguments.workers).run()
    for (label, entry) in summary['solvers'].items():
        tail = entry['final']['tail_rel_err'] or \
            entry['final']['tail_rel_residual']
        print('{}: {} run(s), {} failed, final tail metric {}'.format(
            label, len(entry['seeds']), len(entry['failed']),
            'n/a' if tail is None else '{:.4e}'.format(tail['mean'])))
    if all_failed(summary):
        raise NumericError('All runs failed')


def oracle_objects(arguments, problem):
    mass = make_mass(arguments.solver, arguments.lambda_, arguments.eta,
                     arguments.rank_tol)
    kdpp_mode = ENUMERATE if arguments.mode == ENUMERATE \
        else arguments.kdpp_mode
    sampler = make_sampler(arguments.sampler, arguments.k, problem,
                           arguments.lambda_, kdpp_mode)
    return mass, sampler


def sweep_epsilon(arguments):
    """Isosceles limit quantities across epsilon into oracle_sweep.csv"""
    rows = []
    for epsilon in parse_floats(arguments.sweep_epsilon):
        problem = gen_isosceles(epsilon)
        mass, _ = oracle_objects(arguments, problem)
        report = compute_report(problem, mass, UniformSubsets(arguments.k),
                                ENUMERATE, workers=arguments.workers)
        rows.append({'epsilon': epsilon, 'alpha': report.alpha,
                     'kappa_w': report.kappa_w,
                     'r_rho_norm': report.r_rho_norm,
                     'bias': report.bias_norm,
                     'variance_v': report.variance_v})
    out_dir = Path(arguments.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / SWEEP_FILE, 'w', newline='') as handle:
        writer = csv.DictWriter(handle, fieldnames=SWEEP_FIELDS,
                                lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow({key: repr(float(value))
                             for (key, value) in row.items()})
    for row in rows:
        print('epsilon {:.3e}: bias {:.4e}, kappa_w {:.4e}, V {:.4e}'.format(
            row['epsilon'], row['bias'], row['kappa_w'], row['variance_v']))
    return rows


def cmd_oracle(arguments):
    """Write oracle.json (or oracle_sweep.csv for --sweep-epsilon)"""
    if arguments.sweep_epsilon is not None:
        sweep_epsilon(arguments)
        return
    problem = load_problem(require(arguments.problem, '--problem'))
    mass, sampler = oracle_objects(arguments, problem)
    report = compute_report(problem, mass, sampler, arguments.mode,
                            arguments.draws, arguments.seed,
                            arguments.workers)
    ledger = None
    if report.mode == ENUMERATE:
        ledger = check_bounds(problem, report)
    write_json(report.to_json(__version__, ledger),
               Path(arguments.out) / ORACLE_FILE)
    print('alpha = {:.6e}'.format(report.alpha))
    print('kappa(W_bar) = {}'.format(report.kappa_w))
    print('bias = {:.6e}'.format(report.bias_norm))
    print('V = {:.6e}'.format(report.variance_v))
    print('x_rho = {}'.format(list(report.x_rho)))


def cmd_verify(arguments):
    """Print the bound ledger; a violated bound exits with code 1"""
    problem = load_problem(require(arguments.problem, '--problem'))
    if problem.is_streaming:
        ledger = check_gaussian_identity(
            problem, arguments.k, arguments.draws or DEFAULT_GAUSSIAN_DRAWS,
            arguments.seed)
    else:
        oracle_path = Path(arguments.oracle) if arguments.oracle \
            else Path(arguments.out) / ORACLE_FILE
        if oracle_path.is_file():
            logging.info('Verifying {}'.format(oracle_path))
            try:
                data = json.loads(oracle_path.read_text())
            except json.JSONDecodeError as error:
                raise ProblemIOError('Corrupt oracle file {}: {}'.format(
                    oracle_path.name, error), oracle_path.name)
            mass = make_mass(data.get('mass'), data.get('lambda', 1e-3),
                             data.get('eta'), data.get('rank_tol'))
            sampler = make_sampler(data.get('sampler'), data['k'], problem,
                                   data.get('kdpp_lambda', 1e-3), ENUMERATE)
            report = report_from_json(problem, data, mass, sampler)
        else:
            mass, sampler = oracle_objects(arguments, problem)
            report = compute_report(problem, mass, sampler, ENUMERATE,
                                    workers=arguments.workers)
        if arguments.inject_fault:
            logging.warning('Injecting fault: W_bar scaled by 2')
            report.w_bar = 2.0 * report.w_bar
        ledger = check_bounds(problem, report)
    for line in ledger.lines():
        print(line)
    ledger.raise_on_violation()


def cmd_bench(arguments):
    """Per-update timings into bench.csv"""
    rows = bench_updates(arguments.n, arguments.k, arguments.trials,
                         arguments.seed)
    out_dir = Path(arguments.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_bench_csv(rows, out_dir / BENCH_FILE)
    for row in rows:
        print('{}: median {:.3e}s, IQR {:.3e}s'.format(
            row['solver'], row['median_s'], row['iqr_s']))


COMMANDS = {
    "generate": (GENERATE_ARGS, cmd_generate),
    "solve": (SOLVE_ARGS, cmd_solve),
    "oracle": (ORACLE_ARGS, cmd_oracle),
    "verify": (VERIFY_ARGS, cmd_verify),
    "bench": (BENCH_ARGS, cmd_bench),
}


def run(arguments):
    """Execute the selected subcommand and map errors to exit codes"""
    logging.info('Beginning {} (rowsolve {})'.format(
        arguments.command, __version__))
    try:
        COMMANDS[arguments.command][1](arguments)
    except TheoremViolation as error:
        logging.error(error)
        for entry in error.failures:
            logging.error('Failed: {}'.format(entry))
        return 1
    except (ParameterError, ProblemIOError) as error:
        logging.error(error)
        return 2
    except NumericError as error:
        logging.error(error)
        return 3
    return 0


def get_arguments(argv=None):
    """Parse input arguments using the per-command ARGS tables"""
    parser = argparse.ArgumentParser()
    parser.add_argument('--verbose', dest='verbose', action='store_true',
                        help='Log at DEBUG level')
    subparsers = parser.add_subparsers(dest='command', required=True)
    for (command, (args, handler)) in COMMANDS.items():
        subparser = subparsers.add_parser(command, help=handler.__doc__)
        for arg in args:
            options = {'dest': arg["dest"], 'action': arg["action"],
                       'help': arg["help"]}
            if arg["action"] == 'store':
                options['type'] = arg.get("type", str)
            if 'default' in arg:
                options['default'] = arg["default"]
            else:
                options['required'] = True
            subparser.add_argument(arg["val"], **options)
    return parser.parse_args(argv)


def main(argv=None):
    ARGUMENTS = get_arguments(argv)
    if ARGUMENTS.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    return run(ARGUMENTS)


if __name__ == '__main__':
    logging.basicConfig(level=logging.INFO,
                        format='%(levelname)s:%(asctime)s: %(message)s')
    # dotenv only required for running locally - environment variables
    # may be set directly instead
    dotenv_path = Path('./config.env')
    load_dotenv(dotenv_path=dotenv_path)
    sys.exit(main())
