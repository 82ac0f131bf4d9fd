"""The N-particle branching-selection front and its speed estimator.

Positions are kept recentred: the state stores offsets from the current
leader (all <= 0, at least one exactly 0) plus the leader's accumulated
absolute displacement.  At speeds of order 1/N over 10^5+ steps absolute
positions would lose precision; offsets stay O(1).

Edge noise xi_ji(t+1) is addressed at (seed; t+1, 0, i, j), so a stepper may
skip any subset of draws without perturbing the rest.  The pruned stepper
scans sources in descending offset order and stops a target's scan once no
remaining source can beat the running maximum even with noise at the right
endpoint; its trajectory is bit-identical to the exhaustive stepper's.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels, rng
from .errors import ConfigError, InsufficientDataError
from .noise import FAMILY_CODE, NoiseDistribution

# stream codes, label slot 1 of the (t, stream, i, j) draw address
STREAM_EDGE = 0
STREAM_OFFSPRING = 1
STREAM_PPP = 2
STREAM_INIT = 3
STREAM_REPLICA = 4

RENEWAL_MAX_N = 6
MIN_RENEWALS = 30


@dataclass(frozen=True)
class ParticleState:
    """Recentred front: offsets from the leader, leader displacement, clock."""

    offsets: np.ndarray
    leader_abs: float
    t: int

    @property
    def n(self) -> int:
        return self.offsets.shape[0]


@dataclass(frozen=True)
class SpeedEstimate:
    speed: float
    stderr: float
    t_total: int
    t_burnin: int
    batches: int
    n: int
    seed: int
    stepper: str
    draws_per_step: float


def run_seed(master_seed: int, replica: int) -> int:
    """Per-replica stream seed, derived through the keyed generator."""
    return rng.derive_seed(master_seed, 0, STREAM_REPLICA, replica, 0)


def initial_state(n: int, kind: str = "zero", seed: int = 0) -> ParticleState:
    if n < 1:
        raise ConfigError(f"population size must be >= 1, got {n}")
    if kind == "zero":
        offsets = np.zeros(n)
    elif kind == "uniform":
        u = rng.uniform_block(seed, 0, STREAM_INIT, 0, np.arange(n, dtype=np.uint64))
        offsets = u - 1.0
        offsets -= offsets.max()
    else:
        raise ConfigError(f"unknown initial condition {kind!r}")
    return ParticleState(offsets=offsets, leader_abs=0.0, t=0)


def source_order(offsets: np.ndarray) -> np.ndarray:
    """Labels by descending offset; ties keep original label order."""
    return np.argsort(-offsets, kind="stable")


def _do_step(state, d, seed, pruned, impl, num_threads):
    order = source_order(state.offsets)
    vals = np.empty(state.n)
    pairs = impl.particle_step(
        state.offsets, order, vals, seed, state.t + 1, pruned,
        FAMILY_CODE[d.kind], d.kernel_param, num_threads,
    )
    shift = float(vals.max())
    new = ParticleState(
        offsets=vals - shift,
        leader_abs=state.leader_abs + shift,
        t=state.t + 1,
    )
    return new, pairs


def step_naive(state: ParticleState, d: NoiseDistribution, seed: int,
               impl=None, num_threads: int = 1):
    """Exhaustive step: every target examines all N sources (N^2 draws)."""
    return _do_step(state, d, seed, False, impl or kernels, num_threads)


def step_pruned(state: ParticleState, d: NoiseDistribution, seed: int,
                impl=None, num_threads: int = 1):
    """Pruned step, bit-identical to step_naive under the same seed."""
    return _do_step(state, d, seed, True, impl or kernels, num_threads)


def default_burnin(n: int) -> int:
    # empirical; the renewal argument proves ergodicity but no mixing rate
    return max(1000, int(50 * math.sqrt(n)))


def estimate_speed(d: NoiseDistribution, n: int, t_total: int, t_burnin: int,
                   batches: int, seed: int, stepper: str = "pruned",
                   init: str = "zero", impl=None, num_threads: int = 1,
                   master_seed: int | None = None) -> SpeedEstimate:
    """Long-run speed with batch-means error bars.

    seed is the effective stream seed (see run_seed); master_seed is echoed
    into the estimate when the caller derived seed from one.
    """
    if t_burnin < 1:
        raise ConfigError("t_burnin must be >= 1")
    if batches < 8:
        raise ConfigError("batches must be >= 8")
    post = t_total - t_burnin
    if post <= 0 or post % batches != 0:
        raise ConfigError(
            f"t_total - t_burnin = {post} must be positive and divisible by "
            f"batches = {batches}"
        )
    if stepper not in ("naive", "pruned"):
        raise ConfigError(f"unknown stepper {stepper!r}")
    impl = impl or kernels
    pruned = stepper == "pruned"
    width = post // batches

    state = initial_state(n, init, seed)
    for _ in range(t_burnin):
        state, _ = _do_step(state, d, seed, pruned, impl, num_threads)
    l_burn = state.leader_abs
    marks = []
    draws = 0
    for _ in range(batches):
        for _ in range(width):
            state, pairs = _do_step(state, d, seed, pruned, impl, num_threads)
            draws += pairs
        marks.append(state.leader_abs)
    speed = (marks[-1] - l_burn) / post
    bounds = np.concatenate(([l_burn], marks))
    batch_means = np.diff(bounds) / width
    stderr = float(np.std(batch_means, ddof=1) / math.sqrt(batches))
    return SpeedEstimate(
        speed=float(speed), stderr=stderr, t_total=t_total, t_burnin=t_burnin,
        batches=batches, n=n,
        seed=master_seed if master_seed is not None else seed,
        stepper=stepper, draws_per_step=draws / post,
    )


@dataclass(frozen=True)
class RenewalReport:
    mean_gap: float
    stderr: float
    renewals: int
    t_total: int
    n: int


def renewal_diagnostic(d: NoiseDistribution, n: int, t_total: int,
                       seed: int, impl=None) -> RenewalReport:
    """Mean gap between steps whose previous leader wins every noise column.

    The event has probability N^-N per step for continuous noise, so the gap
    is geometric with mean N^N; impractical beyond very small N.
    """
    if n > RENEWAL_MAX_N:
        raise ConfigError(
            f"renewal diagnostic is limited to N <= {RENEWAL_MAX_N} "
            f"(event probability N^-N), got {n}"
        )
    impl = impl or kernels
    state = initial_state(n, "zero", seed)
    vals = np.empty(n)
    argmax = np.empty(n, dtype=np.int64)
    fam = FAMILY_CODE[d.kind]
    renewal_times = []
    for _ in range(t_total):
        order = source_order(state.offsets)
        leader = int(order[0])
        impl.column_argmax_step(
            state.offsets, order, vals, argmax, seed, state.t + 1, fam,
            d.kernel_param,
        )
        if np.all(argmax == leader):
            renewal_times.append(state.t + 1)
        shift = float(vals.max())
        state = ParticleState(
            offsets=vals - shift, leader_abs=state.leader_abs + shift,
            t=state.t + 1,
        )
    if len(renewal_times) < MIN_RENEWALS:
        raise InsufficientDataError(
            f"observed {len(renewal_times)} renewals in {t_total} steps; "
            f"need at least {MIN_RENEWALS}"
        )
    times = np.asarray(renewal_times, dtype=np.float64)
    gaps = np.diff(np.concatenate(([0.0], times)))
    mean = float(gaps.mean())
    stderr = float(gaps.std(ddof=1) / math.sqrt(gaps.size))
    return RenewalReport(mean_gap=mean, stderr=stderr, renewals=len(renewal_times),
                         t_total=t_total, n=n)
