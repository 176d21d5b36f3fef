"""Tridiagonal Cayley-step kernels.

One propagation factor along one axis is psi <- A^-1 B psi with A and B
tridiagonal along that axis and constant over the run, so the Thomas
elimination factors are computed once and reused every step.

All kernels parallelize over independent rows (prange) and perform no
cross-row or cross-thread reductions, which keeps results bit-identical
for any thread count.
"""

import numpy as np
from numba import njit, prange


@njit(cache=True, parallel=True)
def thomas_factor(low, diag, up, cprime, minv):
    """Forward-elimination factors of row-wise tridiagonal systems.

    low[r, i] multiplies x[i-1] in equation i (low[r, 0] unused);
    up[r, i] multiplies x[i+1] (up[r, n-1] unused). Writes the normalized
    superdiagonal into cprime and the pivot inverses into minv.
    """
    n_rows, n = diag.shape
    for r in prange(n_rows):
        m = 1.0 / diag[r, 0]
        minv[r, 0] = m
        cprime[r, 0] = up[r, 0] * m
        for i in range(1, n):
            m = 1.0 / (diag[r, i] - low[r, i] * cprime[r, i - 1])
            minv[r, i] = m
            cprime[r, i] = up[r, i] * m


@njit(cache=True, parallel=True)
def cayley_rows(lowA, cprime, minv, lowB, diagB, upB, psi, out):
    """Apply A^-1 B to every row of psi.

    The rhs B psi is formed and forward-substituted in one sweep, then the
    back substitution runs in place on `out`. `out` must not alias `psi`.
    """
    n_rows, n = psi.shape
    for r in prange(n_rows):
        rhs = diagB[r, 0] * psi[r, 0] + upB[r, 0] * psi[r, 1]
        d = rhs * minv[r, 0]
        out[r, 0] = d
        for i in range(1, n - 1):
            rhs = (lowB[r, i] * psi[r, i - 1]
                   + diagB[r, i] * psi[r, i]
                   + upB[r, i] * psi[r, i + 1])
            d = (rhs - lowA[r, i] * d) * minv[r, i]
            out[r, i] = d
        rhs = lowB[r, n - 1] * psi[r, n - 2] + diagB[r, n - 1] * psi[r, n - 1]
        d = (rhs - lowA[r, n - 1] * d) * minv[r, n - 1]
        out[r, n - 1] = d
        for i in range(n - 2, -1, -1):
            out[r, i] = out[r, i] - cprime[r, i] * out[r, i + 1]


@njit(cache=True, parallel=True)
def weighted_abs2_rows(psi, w, out):
    """out[r] = sum_i w[r, i] * |psi[r, i]|^2, one row per thread."""
    n_rows, n = psi.shape
    for r in prange(n_rows):
        acc = 0.0
        for i in range(n):
            p = psi[r, i]
            acc += w[r, i] * (p.real * p.real + p.imag * p.imag)
        out[r] = acc
