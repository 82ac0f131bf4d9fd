# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled stepper kernels.

Implements the per-step inner loop of the N-particle front: for every target
site i, the maximum over source sites j of offsets[j] + xi_ji, with the edge
noise xi_ji addressed at (seed; t, 0, i, j) through the same splitmix64 chain
as frontspeed.rng.  Skipping a draw never perturbs any other draw, which is
what makes the pruned scan bit-identical to the exhaustive one.

For the two families whose quantile needs a transcendental call (uniform01 is
an identity, negexp needs a log) the loop first compares the raw uniform
against a conservatively lowered image of the acceptance threshold under the
CDF; only the rare survivors pay for the exact quantile.  The lowering margin
guarantees that a rejected draw could not have beaten the running maximum, so
the shortcut is exact, not approximate.
"""

from cython.parallel cimport prange

import numpy as np

from libc.math cimport INFINITY, exp, log, pow

ctypedef unsigned long long u64

cdef u64 PHI = 0x9E3779B97F4A7C15ULL
cdef u64 M1 = 0xBF58476D1CE4E5B9ULL
cdef u64 M2 = 0x94D049BB133111EBULL
cdef double U53_INV = 1.0 / 9007199254740994.0
# absolute slack on guaranteed-reject thresholds; anything this far below the
# running best cannot win after rounding, anything closer is evaluated exactly
cdef double MARGIN = 1e-9

cdef int FAM_UNIFORM = 0
cdef int FAM_NEGEXP = 1
cdef int FAM_RWEIBULL = 2
cdef int FAM_POLYMAX = 3


cdef inline u64 _mix64(u64 z) nogil:
    z = (z ^ (z >> 30)) * M1
    z = (z ^ (z >> 27)) * M2
    return z ^ (z >> 31)


cdef inline u64 _chain(u64 h, u64 w) nogil:
    return _mix64(h + w * PHI)


cdef inline double _u01(u64 v) nogil:
    return (<double> ((v >> 11) + 1ULL)) * U53_INV


def raw_u64(u64 seed, u64 w0, u64 w1, u64 w2, u64 w3):
    """Hash of a fully padded address; mirrors frontspeed.rng.raw_u64."""
    cdef u64 h = _mix64(seed + PHI)
    h = _chain(h, w0)
    h = _chain(h, w1)
    h = _chain(h, w2)
    h = _chain(h, w3)
    return h


def uniform_fill(u64 seed, u64 w0, u64 w1, u64 w2, u64 j0, double[::1] out):
    """Uniforms at consecutive final labels j0, j0+1, ...; for benchmarks."""
    cdef u64 h = _mix64(seed + PHI)
    cdef Py_ssize_t n = out.shape[0], r
    h = _chain(h, w0)
    h = _chain(h, w1)
    h = _chain(h, w2)
    for r in range(n):
        out[r] = _u01(_mix64(h + (j0 + <u64> r) * PHI))


def particle_step(double[::1] offsets, long long[::1] order, double[::1] out_vals,
                  u64 seed, u64 t_next, bint pruned, int fam, double param,
                  int num_threads):
    """One synchronous step; returns the number of keyed draws examined.

    offsets   recentred positions by particle label
    order     labels sorted by descending offset, ties in label order
    out_vals  receives max_j offsets[j] + xi_ji for each target i (unrecentred)
    """
    cdef Py_ssize_t n = offsets.shape[0]
    cdef double xsup = 1.0 if fam == FAM_UNIFORM else 0.0
    cdef double invalpha = 1.0 / param if fam >= FAM_RWEIBULL else 0.0
    cdef double[::1] pexp = None
    cdef Py_ssize_t i, r
    cdef long long j
    cdef long long pairs = 0
    cdef u64 hbase, hi, v
    cdef double best, oj, u, xi, z, a_neg, tau

    if fam == FAM_NEGEXP:
        buf = np.empty(n, dtype=np.float64)
        pexp = buf
        for r in range(n):
            pexp[r] = exp(-param * offsets[r])

    # prefix through (t, stream=0): shared by all targets
    hbase = _chain(_chain(_mix64(seed + PHI), t_next), 0ULL)

    if num_threads < 1:
        num_threads = 1

    for i in prange(n, nogil=True, schedule="static", num_threads=num_threads):
        hi = _chain(hbase, <u64> i)
        best = -INFINITY
        a_neg = 0.0  # e^(lam*best) lowered by MARGIN, 0 while best = -inf
        for r in range(n):
            j = order[r]
            oj = offsets[j]
            if pruned and oj + xsup <= best:
                break
            pairs += 1
            v = _mix64(hi + (<u64> j) * PHI)
            u = _u01(v)
            if fam == FAM_UNIFORM:
                if u > best - oj - MARGIN:
                    z = oj + u
                    if z > best:
                        best = z
            elif fam == FAM_NEGEXP:
                if u > a_neg * pexp[j]:
                    xi = log(u) / param
                    z = oj + xi
                    if z > best:
                        best = z
                        a_neg = exp(param * best) * (1.0 - MARGIN)
            elif fam == FAM_RWEIBULL:
                xi = -pow(-log(u), invalpha)
                z = oj + xi
                if z > best:
                    best = z
            else:
                xi = -pow(1.0 - u, invalpha)
                z = oj + xi
                if z > best:
                    best = z
        out_vals[i] = best
    return pairs


def column_argmax_step(double[::1] offsets, long long[::1] order,
                       double[::1] out_vals, long long[::1] out_argmax,
                       u64 seed, u64 t_next, int fam, double param):
    """Exhaustive step that also reports, per target, which source supplied
    the largest raw noise value (not offset + noise); the renewal diagnostic
    watches whether that source is the previous leader in every column."""
    cdef Py_ssize_t n = offsets.shape[0]
    cdef Py_ssize_t i, r
    cdef long long j, arg
    cdef u64 hbase, hi
    cdef double invalpha = 1.0 / param if fam >= FAM_RWEIBULL else 0.0
    cdef double best, bestxi, u, xi, z

    hbase = _chain(_chain(_mix64(seed + PHI), t_next), 0ULL)
    for i in range(n):
        hi = _chain(hbase, <u64> i)
        best = -INFINITY
        bestxi = -INFINITY
        arg = -1
        for r in range(n):
            j = order[r]
            u = _u01(_mix64(hi + (<u64> j) * PHI))
            if fam == FAM_UNIFORM:
                xi = u
            elif fam == FAM_NEGEXP:
                xi = log(u) / param
            elif fam == FAM_RWEIBULL:
                xi = -pow(-log(u), invalpha)
            else:
                xi = -pow(1.0 - u, invalpha)
            z = offsets[j] + xi
            if z > best:
                best = z
            if xi > bestxi:
                bestxi = xi
                arg = j
        out_vals[i] = best
        out_argmax[i] = arg
    return n * n
