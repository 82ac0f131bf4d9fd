"""Poisson point process with intensity C|z|^beta dz on the negative half-line.

The mass map m(z) = C|z|^(beta+1)/(beta+1) carries the process to a unit-rate
process on the positive axis, so the K largest atoms are exactly

    P_k = -((beta+1) S_k / C)^(1/(beta+1)),    S_k = E_1 + ... + E_k,

with unit exponential gaps E_k; sampling is exact with O(K) draws and no
spatial truncation.  Under the standard parametrization C = alpha,
beta = alpha - 1 this is -S_k^(1/alpha) and the largest atom follows the
reverse-Weibull law exp(-|x|^alpha).

The log generating function of the full process is closed form,

    psi(u) = ln(Gamma(1+beta) C) - (1+beta) ln u,

while the K-point truncation is integrated term by term against the gamma
density of S_k, with the displacement (and its square, for the curvature)
folded into the integrand.  The fixed point psi(u*) = u* psi'(u*) gives the
branching random walk speed gamma = psi'(u*) and curvature chi = u* psi''(u*);
for the full process u* = e (C Gamma(1+beta))^(1/(1+beta)) and
gamma = -(1+beta)/u*, which under the standard parametrization equals
-c_alpha from the theory module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .errors import ConfigError, NumericError
from .particles import STREAM_PPP
from .rng import RngKey, label_prefix, raw_from_prefix, U53_INV

TERM_ABS_TOL = 1e-10
FIXED_POINT_TOL = 1e-8
_TRUNC_EPS = 1e-17


@dataclass(frozen=True)
class PppSpec:
    c: float
    beta: float

    def __post_init__(self):
        if not self.c > 0:
            raise ConfigError(f"intensity constant must be positive, got {self.c}")
        if not self.beta > -1:
            raise ConfigError(f"beta must exceed -1, got {self.beta}")

    @classmethod
    def standard(cls, alpha: float) -> "PppSpec":
        """C = alpha, beta = alpha - 1: the scaling limit of top noise values."""
        if not alpha > 0:
            raise ConfigError(f"alpha must be positive, got {alpha}")
        return cls(c=alpha, beta=alpha - 1.0)

    @property
    def p(self) -> float:
        return 1.0 / (1.0 + self.beta)

    @property
    def mass_scale(self) -> float:
        """P_k = -mass_scale * S_k^p."""
        return ((1.0 + self.beta) / self.c) ** self.p


@dataclass(frozen=True)
class PppSample:
    points: np.ndarray  # strictly decreasing, all negative

    def __post_init__(self):
        if self.points.size and not np.all(np.diff(self.points) < 0):
            raise ValueError("PPP sample points must be strictly decreasing")


def sample_top_k(spec: PppSpec, k: int, key: RngKey) -> PppSample:
    """K largest atoms; gap l of attempt a is drawn at key + (a, l).

    Equal adjacent points are impossible in exact arithmetic but can appear
    after rounding; such a sample is rejected and redrawn at the next attempt
    label, leaving every other draw untouched.
    """
    if k < 1:
        raise ConfigError(f"K must be >= 1, got {k}")
    if len(key.labels) > 2:
        raise ConfigError("sampling key may carry at most two labels")
    w0 = key.labels[0] if len(key.labels) > 0 else 0
    w1 = key.labels[1] if len(key.labels) > 1 else STREAM_PPP
    ls = np.arange(1, k + 1, dtype=np.uint64)
    for attempt in range(64):
        prefix = label_prefix(key.master_seed, w0, w1, attempt)
        u = ((raw_from_prefix(prefix, ls) >> np.uint64(11)).astype(np.float64)
             + 1.0) * U53_INV
        s = np.cumsum(-np.log(u))
        points = -spec.mass_scale * s ** spec.p
        if np.all(np.diff(points) < 0):
            return PppSample(points=points)
    raise NumericError("could not draw a strictly decreasing PPP sample")


def psi_analytic(spec: PppSpec, u: float) -> tuple[float, float]:
    """psi and psi' of the full process at u > 0 (Campbell formula)."""
    if not u > 0:
        raise ValueError(f"psi requires u > 0, got {u}")
    psi = math.log(math.gamma(1.0 + spec.beta) * spec.c) - (1.0 + spec.beta) * math.log(u)
    return psi, -(1.0 + spec.beta) / u


def psi_analytic_second(spec: PppSpec, u: float) -> float:
    return (1.0 + spec.beta) / (u * u)


def _term_integrals(spec: PppSpec, k: int, u: float, second: bool):
    """E[e^{u P_k}], E[P_k e^{u P_k}] and optionally E[P_k^2 e^{u P_k}].

    S_k has the Gamma(k) density; the integrand is evaluated in log space and
    each moment carries its own power of the displacement.
    """
    p = spec.p
    cs = spec.mass_scale
    lg = math.lgamma(k)

    def make(m):
        def f(s):
            if s <= 0.0:
                return 0.0
            logw = (k - 1.0) * math.log(s) - s - lg - u * cs * s**p
            return math.exp(logw + m * (math.log(cs) + p * math.log(s)))

        return f

    split = k + 12.0 * math.sqrt(k) + 12.0
    out = []
    for m in range(3 if second else 2):
        f = make(m)
        v1, e1 = integrate.quad(f, 0.0, split, epsabs=TERM_ABS_TOL * 1e-2,
                                epsrel=1e-12, limit=200)
        v2, e2 = integrate.quad(f, split, np.inf, epsabs=TERM_ABS_TOL * 1e-2,
                                epsrel=1e-12, limit=200)
        if e1 + e2 > 100 * TERM_ABS_TOL:
            raise NumericError(
                f"PPP term quadrature did not converge (k={k}, u={u}, m={m})",
                achieved=e1 + e2,
            )
        out.append(v1 + v2)
    i_k = out[0]
    j_k = -out[1]
    l_k = out[2] if second else 0.0
    return i_k, j_k, l_k


def psi_truncated(spec: PppSpec, k_top: int, u: float, second: bool = False):
    """psi(u | P^(K)) and derivatives by term-wise quadrature.

    Terms decrease in k; once the geometric tail bound drops below the
    working precision of the accumulated sum the remaining terms are skipped.
    Returns (psi, psi') or (psi, psi', psi'') when second is set.
    """
    if not u > 0:
        raise ValueError(f"psi requires u > 0, got {u}")
    if k_top < 1:
        raise ConfigError(f"K must be >= 1, got {k_top}")
    si = sj = sl = 0.0
    prev = None
    for k in range(1, k_top + 1):
        i_k, j_k, l_k = _term_integrals(spec, k, u, second)
        si += i_k
        sj += j_k
        sl += l_k
        if prev is not None and prev > 0.0 and i_k < prev:
            ratio = i_k / prev
            if ratio < 0.9 and i_k * ratio / (1.0 - ratio) < _TRUNC_EPS * si:
                break
        prev = i_k
    psi = math.log(si)
    d1 = sj / si
    if second:
        d2 = sl / si - d1 * d1
        return psi, d1, d2
    return psi, d1


def fixed_point_u(spec: PppSpec, k_top: int | None = None) -> float:
    """Root of psi(u) = u psi'(u); closed form for the full process."""
    u_inf = math.e * (spec.c * math.gamma(1.0 + spec.beta)) ** spec.p
    if k_top is None:
        return u_inf

    def h(u):
        psi, d1 = psi_truncated(spec, k_top, u)
        return psi - u * d1

    lo, hi = u_inf / 64.0, 2.0 * u_inf
    h_lo, h_hi = h(lo), h(hi)
    for _ in range(12):
        if h_lo > 0.0 >= h_hi:
            break
        if h_lo <= 0.0:
            lo /= 8.0
            h_lo = h(lo)
        if h_hi > 0.0:
            hi *= 2.0
            h_hi = h(hi)
    else:
        raise NumericError(
            f"no fixed point bracket for K={k_top}; K too small for this spec"
        )
    root = optimize.brentq(h, lo, hi, xtol=1e-13, rtol=8.9e-16, maxiter=200)
    if abs(h(root)) > FIXED_POINT_TOL:
        raise NumericError("fixed point residual above tolerance",
                           achieved=abs(h(root)))
    return float(root)


def gamma_and_chi(spec: PppSpec, k_top: int | None = None) -> tuple[float, float]:
    """Front speed gamma = psi'(u*) and curvature chi = u* psi''(u*)."""
    u_star = fixed_point_u(spec, k_top)
    if k_top is None:
        return -(1.0 + spec.beta) / u_star, (1.0 + spec.beta) / u_star
    _, d1, d2 = psi_truncated(spec, k_top, u_star, second=True)
    return d1, u_star * d2


def mc_lemma1(spec: PppSpec, k_top: int, n_samples: int, key: RngKey,
              u: float | None = None) -> dict:
    """Monte Carlo check of E[sum_k e^{u P_k}] against the Campbell value."""
    if u is None:
        u = fixed_point_u(spec, None)
    total = np.empty(n_samples)
    for s in range(n_samples):
        pts = sample_top_k(spec, k_top, key.child(s)).points
        total[s] = np.exp(u * pts).sum()
    mean = float(total.mean())
    stderr = float(total.std(ddof=1) / math.sqrt(n_samples))
    analytic = math.gamma(1.0 + spec.beta) * spec.c / u ** (1.0 + spec.beta)
    return {
        "u": u,
        "empirical_mean": mean,
        "stderr": stderr,
        "analytic_value": analytic,
        "n_samples": n_samples,
        "k": k_top,
    }
