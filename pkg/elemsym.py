#!/usr/bin/env python3
"""
Elementary symmetric polynomials p_j(q) of nonnegative vectors, computed by
the addition-only recursion p_j(q_1..q_i) = p_j(q_1..q_{i-1}) +
q_i p_{j-1}(q_1..q_{i-1})
"""

import numpy as np
from denselinalg import as_vector
from errors import ParameterError


class ElemSymPolys():
    """p_0(q), ..., p_k(q) and the leave-one-out values p_{k-1}(q_{-i})"""

    def __init__(self, q, values, leave_one_out):
        self.q = q
        self.values = values
        self.leave_one_out = leave_one_out

    @property
    def k(self):
        return self.values.shape[0] - 1

    def value(self, j):
        return float(self.values[j])


def _check(q, k):
    q = as_vector(q, 'q')
    if np.any(q < 0.0):
        raise ParameterError('q must be nonnegative')
    if not 0 <= k <= q.shape[0]:
        raise ParameterError('k = {} must lie in [0, {}]'.format(
            k, q.shape[0]))
    return q


def elem_sym_table(q, k):
    """
    Table E with E[j, i] = p_j(q_1, ..., q_i) for 0 <= j <= k, 0 <= i <= m.
    Used by the k-DPP sampler to select eigenvectors.
    """
    q = _check(q, k)
    m = q.shape[0]
    table = np.zeros((k + 1, m + 1))
    table[0, :] = 1.0
    for i in range(1, m + 1):
        table[1:, i] = table[1:, i - 1] + q[i - 1] * table[:-1, i - 1]
    return table


def elem_sym(q, k):
    """ElemSymPolys for q up to order k"""
    q = _check(q, k)
    m = q.shape[0]
    values = elem_sym_table(q, k)[:, m]
    if k == 0:
        return ElemSymPolys(q, values, np.zeros(m))

    # row i accumulates p_0..p_{k-1} of the elements seen so far, except q_i
    partial = np.zeros((m, k))
    partial[:, 0] = 1.0
    for element in range(m):
        updated = partial.copy()
        updated[:, 1:] += q[element] * partial[:, :-1]
        updated[element] = partial[element]
        partial = updated
    return ElemSymPolys(q, values, partial[:, k - 1].copy())
