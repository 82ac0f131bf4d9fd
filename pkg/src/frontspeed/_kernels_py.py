"""Pure-Python/numpy fallback for the compiled stepper kernels.

Same call surface and same keyed-draw semantics as frontspeed._kernels, used
when the extension is unavailable (and by the benchmark for comparison).  Both
steppers here evaluate noise in fixed 64-draw chunks along the descending
offset order, so the exhaustive and pruned variants feed numpy bit-identical
slices and their trajectories agree to the last bit, as required of the
compiled pair as well.

num_threads is accepted for interface parity; numpy runs single-threaded here.
"""

from __future__ import annotations

import numpy as np

from . import rng

CHUNK = 64

FAM_UNIFORM = 0
FAM_NEGEXP = 1
FAM_RWEIBULL = 2
FAM_POLYMAX = 3

_U11 = np.uint64(11)


def raw_u64(seed, w0, w1, w2, w3):
    return rng.raw_u64(seed, (w0, w1, w2, w3))


def uniform_fill(seed, w0, w1, w2, j0, out):
    n = out.shape[0]
    out[:] = rng.uniform_block(seed, w0, w1, w2, j0 + np.arange(n, dtype=np.uint64))


def _quantile_block(fam, param, u):
    if fam == FAM_UNIFORM:
        return u
    if fam == FAM_NEGEXP:
        return np.log(u) / param
    if fam == FAM_RWEIBULL:
        return -((-np.log(u)) ** (1.0 / param))
    return -((1.0 - u) ** (1.0 / param))


def _edge_prefix(seed, t_next):
    """Hash state through the labels (t_next, stream=0); see rng layout."""
    h = rng.mix64((int(seed) + rng.PHI) & rng.MASK64)
    h = rng.mix64((h + (int(t_next) & rng.MASK64) * rng.PHI) & rng.MASK64)
    return rng.mix64(h)


def particle_step(offsets, order, out_vals, seed, t_next, pruned, fam, param,
                  num_threads):
    """One synchronous step; returns the number of keyed draws examined."""
    offsets = np.asarray(offsets)
    order = np.asarray(order)
    n = offsets.shape[0]
    xsup = 1.0 if fam == FAM_UNIFORM else 0.0
    oj_sorted = offsets[order]
    with np.errstate(over="ignore"):
        jphi = order.astype(np.uint64) * np.uint64(rng.PHI)
    base = _edge_prefix(seed, t_next)
    pairs = 0
    for i in range(n):
        hi = np.uint64(rng.mix64((base + i * rng.PHI) & rng.MASK64))
        best = -np.inf
        for c0 in range(0, n, CHUNK):
            c1 = min(c0 + CHUNK, n)
            oj = oj_sorted[c0:c1]
            if pruned and oj[0] + xsup <= best:
                break
            with np.errstate(over="ignore"):
                v = rng._mix64_np(hi + jphi[c0:c1])
            u = ((v >> _U11).astype(np.float64) + 1.0) * rng.U53_INV
            z = oj + _quantile_block(fam, param, u)
            running = np.maximum.accumulate(z)
            if pruned:
                best_before = np.empty(c1 - c0)
                best_before[0] = best
                np.maximum(running[:-1], best, out=best_before[1:])
                stops = np.nonzero(oj + xsup <= best_before)[0]
                if stops.size:
                    s = int(stops[0])
                    pairs += s
                    if s > 0:
                        best = max(best, float(running[s - 1]))
                    break
            pairs += c1 - c0
            best = max(best, float(running[-1]))
        out_vals[i] = best
    return pairs


def column_argmax_step(offsets, order, out_vals, out_argmax, seed, t_next, fam,
                       param):
    offsets = np.asarray(offsets)
    order = np.asarray(order)
    n = offsets.shape[0]
    with np.errstate(over="ignore"):
        jphi = order.astype(np.uint64) * np.uint64(rng.PHI)
    base = _edge_prefix(seed, t_next)
    oj_sorted = offsets[order]
    for i in range(n):
        hi = np.uint64(rng.mix64((base + i * rng.PHI) & rng.MASK64))
        with np.errstate(over="ignore"):
            v = rng._mix64_np(hi + jphi)
        u = ((v >> _U11).astype(np.float64) + 1.0) * rng.U53_INV
        xi = _quantile_block(fam, param, u)
        out_vals[i] = np.max(oj_sorted + xi)
        out_argmax[i] = int(order[int(np.argmax(xi))])
    return n * n
