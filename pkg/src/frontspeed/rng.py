"""Keyed, counter-based uniform randomness.

Every uniform variate is addressed by (master_seed, labels) where labels is a
tuple of up to four 64-bit coordinates.  The value is a pure function of that
address, so two steppers that consume the same addresses see the same noise
no matter which draws they skip and in which order they work.

The generator hashes the address through chained splitmix64 finalizer rounds:

    h0 = mix64(seed + PHI)
    hk = mix64(h(k-1) + w(k-1) * PHI)        k = 1..4, labels padded to 4

and the variate is the last state.  Putting the fastest-varying coordinate in
the final label slot lets bulk consumers reuse the three-label prefix and pay
a single finalizer round per draw.

Uniforms map the top 53 bits to (0, 1) via ((v >> 11) + 1) / (2^53 + 2); both
endpoints are unreachable and every intermediate is exact in double precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
PHI = 0x9E3779B97F4A7C15  # golden-ratio increment, splitmix64's gamma
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

# 2^53 + 2: smallest even integer > 2^53, so division stays exact-per-step and
# the image of the map is strictly inside (0, 1).
U53_DENOM = 9007199254740994.0
U53_INV = 1.0 / U53_DENOM


@dataclass(frozen=True)
class RngKey:
    """Address of a single uniform variate."""

    master_seed: int
    labels: tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.labels) > 4:
            raise ValueError("at most four stream labels are supported")

    def child(self, *labels: int) -> "RngKey":
        return RngKey(self.master_seed, self.labels + labels)


def mix64(z: int) -> int:
    """splitmix64 finalizer on 64-bit integers."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def raw_u64(seed: int, labels: tuple[int, ...] = ()) -> int:
    """64-bit hash of an address; labels are padded with zeros to four."""
    if len(labels) > 4:
        raise ValueError("at most four stream labels are supported")
    h = mix64((seed + PHI) & MASK64)
    padded = tuple(labels) + (0,) * (4 - len(labels))
    for w in padded:
        h = mix64((h + (w & MASK64) * PHI) & MASK64)
    return h


def uniform_at(key: RngKey) -> float:
    """Deterministic uniform in the open interval (0, 1)."""
    return ((raw_u64(key.master_seed, key.labels) >> 11) + 1) * U53_INV


def derive_seed(master_seed: int, *words: int) -> int:
    """Derived 64-bit sub-seed, e.g. one independent stream per replica."""
    return raw_u64(master_seed, tuple(words))


def label_prefix(seed: int, w0: int, w1: int, w2: int) -> int:
    """Hash state after the first three label rounds.

    uniform_at(RngKey(seed, (w0, w1, w2, j))) == finalize(prefix + j * PHI)
    for every final label j; bulk samplers exploit this.
    """
    h = mix64((seed + PHI) & MASK64)
    for w in (w0, w1, w2):
        h = mix64((h + (w & MASK64) * PHI) & MASK64)
    return h


def _mix64_np(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(_M1)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def raw_from_prefix(prefix: int, j: np.ndarray) -> np.ndarray:
    """Vectorized final round over the last label; exact uint64 arithmetic."""
    with np.errstate(over="ignore"):
        z = np.uint64(prefix) + j.astype(np.uint64) * np.uint64(PHI)
        return _mix64_np(z)


def uniform_block(seed: int, w0: int, w1: int, w2: int, j: np.ndarray) -> np.ndarray:
    """Uniforms at (seed; w0, w1, w2, j) for an array of final labels j."""
    v = raw_from_prefix(label_prefix(seed, w0, w1, w2), np.asarray(j))
    return ((v >> np.uint64(11)).astype(np.float64) + 1.0) * U53_INV
