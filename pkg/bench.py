#!/usr/bin/env python3
"""
Per-update timing of the three mass matrices on synthetic Gaussian blocks
"""

import csv
import logging
import numpy as np
from time import perf_counter
from errors import ParameterError
from msgdmass import MsgdMass
from rbkmass import RbkMass
from reblockmass import DEFAULT_LAMBDA, ReblockMass
from sampler import BlockSample, make_rng

BENCH_FIELDS = ['solver', 'n', 'k', 'median_s', 'iqr_s']
# blocks are drawn once and cycled so sampling stays outside the timings
BLOCK_POOL = 4


def bench_updates(n, k, trials, seed=0, lambda_=DEFAULT_LAMBDA, eta=1.0):
    """Median and interquartile range of apply_update wall time per solver"""
    if n < 1 or k < 1 or trials < 1:
        raise ParameterError('n, k and trials must all be at least 1')
    rng = make_rng(seed)
    blocks = [BlockSample(None, rng.standard_normal((k, n)),
                          rng.standard_normal(k))
              for _ in range(BLOCK_POOL)]
    x = rng.standard_normal(n)
    rows = []
    for mass in (RbkMass(), ReblockMass(lambda_), MsgdMass(eta)):
        times = np.empty(trials)
        for trial in range(trials):
            block = blocks[trial % BLOCK_POOL]
            start = perf_counter()
            mass.apply_update(x, block)
            times[trial] = perf_counter() - start
        lower, median, upper = np.percentile(times, [25.0, 50.0, 75.0])
        logging.info('{}: median update {:.3e}s at n = {}, k = {}'.format(
            mass, median, n, k))
        rows.append({'solver': mass.name, 'n': n, 'k': k,
                     'median_s': float(median), 'iqr_s': float(upper - lower)})
    return rows


def write_bench_csv(rows, path):
    with open(path, 'w', newline='') as handle:
        writer = csv.DictWriter(handle, fieldnames=BENCH_FIELDS,
                                lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow({**row, 'median_s': repr(row['median_s']),
                             'iqr_s': repr(row['iqr_s'])})
