"""Deterministic predictions for the front speed.

For a noise law with log-mgf Lambda, the first-moment bound solves

    u_N Lambda'(u_N) - Lambda(u_N) = ln N,      v_N = Lambda'(u_N),

the left side being strictly increasing in u.  The edge scale a_N is the
distance from the right endpoint to the (1 - 1/N)-quantile, and the predicted
speed is x_xi - c_alpha * a_N with the universal constant

    c_alpha = (alpha / e) * (Gamma(alpha) * alpha)^(-1/alpha).

A single particle that always jumps from the current leader moves at
E[max of N noise draws], a crude lower bound computed here by quadrature and
cross-checked against closed forms in the tests.

Internally, asymptotic comparisons shift the noise so the right endpoint sits
at zero (the ratio helpers below); reports convert back.  This avoids
cancellation when v_N approaches x_xi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate

from .errors import ConfigError, NumericError
from .noise import ALPHA_MAX, ALPHA_MIN, NoiseDistribution

RESIDUAL_TOL = 1e-10
N_CAP = 10**12  # beyond this 1 - 1/N degenerates in double precision
_BRACKET_CAP = 1e12


@dataclass(frozen=True)
class TheoryReport:
    family: str
    alpha: float
    n: int
    u_n: float
    v_n_upper: float
    a_n: float
    c_alpha: float
    predicted_speed: float
    follow_leader_bound: float
    residual: float


def c_alpha(alpha: float) -> float:
    """(alpha/e) * (Gamma(alpha) * alpha)^(-1/alpha)."""
    if not ALPHA_MIN <= alpha <= ALPHA_MAX:
        raise ConfigError(f"alpha must lie in [{ALPHA_MIN}, {ALPHA_MAX}], got {alpha}")
    return (alpha / math.e) * (math.gamma(alpha) * alpha) ** (-1.0 / alpha)


def _legendre_gap(d: NoiseDistribution, u: float) -> float:
    """u Lambda'(u) - Lambda(u); strictly increasing on (0, inf)."""
    m = d.log_mgf(u)
    return u * m.d1 - m.value


def solve_u_N(d: NoiseDistribution, n: int) -> float:
    """Unique positive root of u Lambda'(u) - Lambda(u) = ln N.

    N = 1 is served as a diagnostic (root 0, v = E[xi]) without the solver.
    """
    if n < 1:
        raise ConfigError(f"N must be >= 1, got {n}")
    if n > N_CAP:
        raise ConfigError(f"N is capped at {N_CAP} for theory computations")
    if n == 1:
        return 0.0
    target = math.log(n)

    lo = 1e-6
    hi = 1.0
    g_hi = _legendre_gap(d, hi) - target
    while g_hi < 0.0:
        hi *= 2.0
        if hi > _BRACKET_CAP:
            raise NumericError(
                f"no root of the Legendre relation below u = {_BRACKET_CAP:g}; "
                f"{d.spec_string()} violates the growth hypothesis numerically"
            )
        g_hi = _legendre_gap(d, hi) - target
    g_lo = _legendre_gap(d, lo) - target
    if g_lo > 0.0:
        lo = 1e-300  # pathological, but keeps the bracket honest

    # Newton on g with bisection fallback; g'(u) = u Lambda''(u)
    u = 0.5 * (lo + hi)
    for _ in range(200):
        m = d.log_mgf(u)
        g = u * m.d1 - m.value - target
        if abs(g) <= RESIDUAL_TOL:
            return u
        if g > 0.0:
            hi = u
        else:
            lo = u
        slope = u * m.d2
        step_ok = slope > 0.0 and math.isfinite(slope)
        u_next = u - g / slope if step_ok else 0.0
        if not step_ok or not lo < u_next < hi:
            u_next = 0.5 * (lo + hi)
        u = u_next
    raise NumericError(
        f"Legendre solve did not reach residual {RESIDUAL_TOL:g} for "
        f"{d.spec_string()}, N={n}", achieved=abs(g),
    )


def legendre_residual(d: NoiseDistribution, n: int, u: float) -> float:
    return _legendre_gap(d, u) - math.log(n)


def cramer(d: NoiseDistribution, v: float) -> float:
    """Cramer transform sup_x {v x - Lambda(x)} for E[xi] <= v < x_xi."""
    if not d.mean <= v < d.right_endpoint:
        raise ValueError(
            f"cramer requires E[xi] = {d.mean} <= v < x_xi = {d.right_endpoint}, "
            f"got v = {v}"
        )
    if v == d.mean:
        return 0.0
    # stationarity: Lambda'(x) = v, with Lambda' increasing from E[xi] to x_xi
    lo = 0.0
    hi = 1.0
    while d.log_mgf(hi).d1 < v:
        hi *= 2.0
        if hi > _BRACKET_CAP:
            raise NumericError(f"no stationary point below x = {_BRACKET_CAP:g}")
    x = 0.5 * hi
    for _ in range(200):
        m = d.log_mgf(x)
        g = m.d1 - v
        if abs(g) <= 1e-13 * max(1.0, abs(v)):
            break
        if g > 0.0:
            hi = x
        else:
            lo = x
        x_next = x - g / m.d2 if m.d2 > 0.0 else 0.0
        if not (m.d2 > 0.0) or not lo < x_next < hi:
            x_next = 0.5 * (lo + hi)
        x = x_next
    else:
        raise NumericError("Cramer stationarity solve did not converge")
    return v * x - d.log_mgf(x).value


def scale_a_N(d: NoiseDistribution, n: int) -> float:
    """a_N = x_xi - quantile(1 - 1/N), via the exact tail inverse."""
    if n < 2:
        raise ConfigError(f"a_N requires N >= 2, got {n}")
    if n > N_CAP:
        raise ConfigError(f"N is capped at {N_CAP} for theory computations")
    return d.edge_distance(1.0 / n)


def follow_leader_bound(d: NoiseDistribution, n: int) -> float:
    """E[max of N i.i.d. draws]: speed of one particle chasing the leader.

    Uses E[max] = x_xi - int_0^N edge_distance(s/N) (1 - s/N)^(N-1) ds, the
    exceedance-scale form of x_xi - int F^N; well conditioned at every N.
    """
    if n < 1:
        raise ConfigError(f"N must be >= 1, got {n}")

    def integrand(s: float) -> float:
        if s <= 0.0 or s >= n:
            return 0.0
        return d.edge_distance(s / n) * math.exp((n - 1) * math.log1p(-s / n))

    # (1 - s/N)^(N-1) kills the integrand beyond s ~ 40 for any tail index
    upper = float(min(n, 800.0))
    val, err = integrate.quad(integrand, 0.0, upper, epsabs=1e-14, epsrel=1e-11,
                              limit=200)
    if err > 1e-8 * max(1.0, abs(val)):
        raise NumericError("follow-the-leader quadrature did not converge",
                           achieved=err)
    return d.right_endpoint - val


def theory_report(d: NoiseDistribution, n: int) -> TheoryReport:
    if n < 2:
        raise ConfigError(f"theory_report requires N >= 2, got {n}")
    u_n = solve_u_N(d, n)
    m = d.log_mgf(u_n)
    a_n = scale_a_N(d, n)
    c_a = c_alpha(d.tail_index)
    return TheoryReport(
        family=d.kind,
        alpha=d.tail_index,
        n=n,
        u_n=u_n,
        v_n_upper=m.d1,
        a_n=a_n,
        c_alpha=c_a,
        predicted_speed=d.right_endpoint - c_a * a_n,
        follow_leader_bound=follow_leader_bound(d, n),
        residual=legendre_residual(d, n, u_n),
    )


def upper_bound_ratio(d: NoiseDistribution, n: int) -> float:
    """(Lambda'(u_N) - x_xi) / (-c_alpha a_N); tends to 1 as N grows."""
    u_n = solve_u_N(d, n)
    shifted = d.log_mgf(u_n).d1 - d.right_endpoint
    return shifted / (-c_alpha(d.tail_index) * scale_a_N(d, n))
