"""Closed-form statistics of a single distance-attenuated lognormal interferer.

A single interferer is ``I = B * exp(X) * r**-gamma`` with ``X ~ N(0, sigma_x^2)``
and ``r`` distributed on the annulus ``[R0, R]`` with density
``2r / (R^2 - R0^2)``. The received PU signal has the same form, which is what
lets :func:`calibrate_power` reuse the interferer CDF.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ConsistencyError, ConvergenceError, DegenerateDistributionError, DomainError
from .scenario import Geometry, PropagationEnv

_SQRT2 = math.sqrt(2.0)
CLAMP_TOL = 1e-12
# Below this spread the shadowed form equals the unshadowed one to rounding.
TINY_SIGMA_X = 1e-8
CALIBRATION_TOL = 1e-9
MAX_BISECTION_STEPS = 200


def std_normal_cdf(z):
    """Standard Gaussian CDF via the complementary error function."""
    out = 0.5 * special.erfc(-np.asarray(z, dtype=float) / _SQRT2)
    return float(out) if np.ndim(out) == 0 else out


def _log_gauss_mass(a, b):
    """log(Phi(b) - Phi(a)) for a <= b, accurate in both tails."""
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    upper = a > 0
    lo = np.where(upper, -b, a)
    hi = np.where(upper, -a, b)
    log_hi = special.log_ndtr(hi)
    log_lo = special.log_ndtr(lo)
    with np.errstate(divide="ignore", invalid="ignore"):
        return log_hi + np.log1p(-np.exp(log_lo - log_hi))


@dataclass(frozen=True)
class SingleCdfTerms:
    """Integration limits of the Gaussian kernel for a threshold ``x``.

    ``u = -X`` is the implicit integration variable; the CDF kernel is 0 below
    ``w0``, 1 above ``w1`` and ``(R^2 - y^(2/gamma) e^(-2u/gamma)) / (R^2 - R0^2)``
    in between.
    """

    y: np.ndarray
    w0: np.ndarray
    w1: np.ndarray


def cdf_terms(x, env: PropagationEnv, geom: Geometry, scale: float, outer: float | None = None) -> SingleCdfTerms:
    R = geom.R if outer is None else outer
    log_y = math.log(scale) - np.log(np.asarray(x, dtype=float))
    return SingleCdfTerms(
        y=np.exp(log_y),
        w0=log_y - env.gamma * math.log(R),
        w1=log_y - env.gamma * math.log(geom.R0),
    )


def _unshadowed_cdf(log_y, gamma, R, R0):
    # P(r > y^(1/gamma)) for the annulus, computed in log space.
    t2 = np.exp(np.clip(2.0 * log_y / gamma, -700.0, 700.0))
    return np.clip((R**2 - t2) / (R**2 - R0**2), 0.0, 1.0)


def single_interferer_cdf(x, env: PropagationEnv, geom: Geometry, scale: float, outer: float | None = None):
    """P(I < x) for one interferer with transmit constant ``scale``.

    ``outer`` replaces the annulus outer radius (used for calibrating a link
    whose coverage radius differs from R). Accepts scalars or arrays.
    """
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)):
        raise DomainError("interference threshold must be strictly positive")
    R = geom.R if outer is None else outer
    R0 = geom.R0
    if not R > R0:
        raise DomainError("outer radius must exceed R0")
    gamma = env.gamma
    sx = env.sigma_x
    log_y = math.log(scale) - np.log(xa)

    if sx < TINY_SIGMA_X:
        out = _unshadowed_cdf(log_y, gamma, R, R0)
        return float(out) if out.ndim == 0 else out

    w0 = log_y - gamma * math.log(R)
    w1 = log_y - gamma * math.log(R0)
    shift = 2.0 * sx**2 / gamma
    frac = R**2 / (R**2 - R0**2)

    beyond = std_normal_cdf(-w1 / sx)
    inner = np.exp(_log_gauss_mass(w0 / sx, w1 / sx))
    # (B/x)^(2/gamma) = R^2 exp(2 w0 / gamma); the R^2 is folded into frac.
    log_tilted = 2.0 * w0 / gamma + 2.0 * sx**2 / gamma**2 + _log_gauss_mass((w0 + shift) / sx, (w1 + shift) / sx)
    tilted = np.exp(log_tilted)

    F = beyond + frac * (inner - tilted)
    if np.any(F < -CLAMP_TOL) or np.any(F > 1.0 + CLAMP_TOL) or np.any(np.isnan(F)):
        raise ConsistencyError(f"CDF left [0, 1] beyond rounding: {np.min(F)!r}..{np.max(F)!r}")
    F = np.clip(F, 0.0, 1.0)
    return float(F) if F.ndim == 0 else F


def distance_moment(k: int, env: PropagationEnv, geom: Geometry) -> float:
    """E(r^(-k gamma)) over the annulus, including the k*gamma == 2 limit."""
    if k < 0:
        raise DomainError("moment order must be nonnegative")
    if k == 0:
        return 1.0
    R, R0 = geom.R, geom.R0
    a = 2.0 - k * env.gamma
    L = math.log(R / R0)
    if a == 0.0:
        return 2.0 * L / (R**2 - R0**2)
    # (R^a - R0^a) / a written to stay accurate as a -> 0
    return 2.0 * R0**a * math.expm1(a * L) / (a * (R**2 - R0**2))


def distance_moment_approx(k: int, env: PropagationEnv, geom: Geometry) -> float:
    """Large-R, small-R0 approximation 2 / (R^2 (k gamma - 2))."""
    kg = k * env.gamma
    if not kg > 2.0:
        raise DomainError(f"approximation needs k*gamma > 2, got {kg}")
    return 2.0 / (geom.R**2 * (kg - 2.0))


def interference_moment(j: int, env: PropagationEnv, geom: Geometry, scale: float = 1.0) -> float:
    """E(I^j) = B^j E(e^(jX)) E(r^(-j gamma))."""
    if j not in (1, 2, 3):
        raise DomainError(f"moment order must be 1, 2 or 3, got {j}")
    return scale**j * math.exp(0.5 * j**2 * env.sigma_x**2) * distance_moment(j, env, geom)


@dataclass(frozen=True)
class MomentSet:
    m1: float
    m2: float
    m3: float

    @property
    def sk(self) -> float:
        return skewness_exact(self)


def moment_set(env: PropagationEnv, geom: Geometry, scale: float = 1.0) -> MomentSet:
    return MomentSet(*(interference_moment(j, env, geom, scale) for j in (1, 2, 3)))


def skewness_exact(m: MomentSet) -> float:
    var = m.m2 - m.m1**2
    if not var > 0.0:
        raise DegenerateDistributionError("skewness undefined for zero variance")
    return (m.m3 + 2.0 * m.m1**3 - 3.0 * m.m1 * m.m2) / var**1.5


@dataclass(frozen=True)
class FwFit:
    """Lognormal ``Y = exp(Z)``, ``Z ~ N(mu_z, sigma_z2)``, matched on two moments."""

    mu_z: float
    sigma_z2: float
    third_moment: float

    def moment(self, k: float) -> float:
        return math.exp(k * self.mu_z + 0.5 * k**2 * self.sigma_z2)


def fenton_wilkinson_fit(m: MomentSet) -> FwFit:
    if not m.m1 > 0.0:
        raise DegenerateDistributionError("first moment must be positive")
    if not m.m2 > m.m1**2:
        raise DegenerateDistributionError("need m2 > m1^2 for a lognormal fit")
    sigma_z2 = math.log(m.m2) - 2.0 * math.log(m.m1)
    mu_z = math.log(m.m1) - 0.5 * sigma_z2
    return FwFit(mu_z=mu_z, sigma_z2=sigma_z2, third_moment=(m.m2 / m.m1) ** 3)


def skewness_ratio_exact(env: PropagationEnv, geom: Geometry) -> float:
    """E(Y^3) / m3 for the two-moment lognormal fit of a single interferer."""
    m = moment_set(env, geom)
    return fenton_wilkinson_fit(m).third_moment / m.m3


def skewness_ratio_asymptotic(env: PropagationEnv, geom: Geometry) -> float:
    g = env.gamma
    if not g > 2.0:
        raise DomainError(f"asymptotic ratio needs gamma > 2, got {g}")
    return ((g - 2.0) / (2.0 * g - 2.0)) ** 3 * geom.R**2 * (3.0 * g - 2.0) / 2.0


def calibrate_power(
    env: PropagationEnv,
    geom: Geometry,
    radius: float,
    reliability: float,
    snr_threshold_dB: float,
    noise: float = 1.0,
) -> float:
    """Transmit constant giving P(SNR >= threshold) = reliability over [R0, radius].

    Bisects on t = ln(A / theta). The CDF depends on A and the threshold only
    through their ratio, so the answer scales exactly with ``noise``.
    """
    if not 0.0 < reliability < 1.0:
        raise DomainError("reliability must lie in (0, 1)")
    theta = noise * 10.0 ** (snr_threshold_dB / 10.0)
    target = 1.0 - reliability

    def excess(t):
        return single_interferer_cdf(1.0, env, geom, math.exp(t), outer=radius) - target

    center = env.gamma * math.log(radius)
    half = 10.0 + 10.0 * env.sigma_x
    lo, hi = center - half, center + half
    for _ in range(60):
        if excess(lo) > 0.0 and excess(hi) < 0.0:
            break
        half *= 2.0
        lo, hi = center - half, center + half
    else:
        raise ConvergenceError("could not bracket the calibration root")

    for _ in range(MAX_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        e = excess(mid)
        if abs(e) < CALIBRATION_TOL:
            return theta * math.exp(mid)
        if e > 0.0:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError(f"calibration did not converge in {MAX_BISECTION_STEPS} steps")
