"""CR access control: REM centralized/decentralized selection and the PEZ.

The REM rules cap aggregate interference at ``noise * (10^(delta/10) - 1)``,
which is exactly the interference that lowers SINR by ``delta`` dB below SNR,
whatever the instantaneous PU signal is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Literal, Sequence

import numpy as np

from .engine import run_replications
from .errors import ConvergenceError, DomainError
from .scenario import CALIBRATION_SNR_DB, Geometry, Realization, Scenario, draw

Kind = Literal["rem-centralized", "rem-decentralized", "pez"]
KINDS = ("rem-centralized", "rem-decentralized", "pez")


@dataclass(frozen=True, eq=False)
class AdmissionResult:
    indices: np.ndarray  # 0-based positions into the realization's CR arrays
    n_active: int
    aggregate: float

    @property
    def n_admitted(self) -> int:
        return len(self.indices)

    @property
    def pct_admitted(self) -> float:
        # zero active CRs reports 0 %
        return 100.0 * self.n_admitted / self.n_active if self.n_active else 0.0


def interference_budget(delta_dB: float, noise: float = 1.0) -> float:
    """Largest aggregate interference with 10 log10((N0 + I) / N0) <= delta_dB."""
    if delta_dB < 0:
        raise DomainError("delta_dB must be >= 0")
    return noise * math.expm1(delta_dB * math.log(10.0) / 10.0)


def rem_centralized(interferences, budget: float) -> AdmissionResult:
    """Admit the weakest interferers first; this maximizes the admitted count."""
    I = np.asarray(interferences, dtype=float)
    order = np.argsort(I, kind="stable")
    csum = np.cumsum(I[order])
    n = int(np.searchsorted(csum, budget, side="right"))
    return AdmissionResult(
        indices=np.sort(order[:n]),
        n_active=I.size,
        aggregate=float(csum[n - 1]) if n else 0.0,
    )


def rem_decentralized(interferences, budget: float) -> AdmissionResult:
    """First come, first served: accept each CR that still fits the budget."""
    I = np.asarray(interferences, dtype=float)
    total = 0.0
    accepted = []
    for i, v in enumerate(I.tolist()):
        if total + v <= budget:
            total += v
            accepted.append(i)
    return AdmissionResult(np.asarray(accepted, dtype=np.intp), I.size, total)


def pez_filter(real: Realization, exclusion_radius_m: float, geom: Geometry | None = None) -> AdmissionResult:
    if geom is not None and not geom.R0 <= exclusion_radius_m <= geom.R:
        raise DomainError(f"exclusion radius {exclusion_radius_m} outside [{geom.R0}, {geom.R}]")
    idx = np.flatnonzero(real.cr_distances >= exclusion_radius_m)
    return AdmissionResult(idx, real.n_active, float(np.sum(real.cr_interferences[idx])))


@dataclass(frozen=True)
class AdmissionPolicy:
    kind: Kind
    delta_dB: float = 2.0
    exclusion_radius_m: float | None = None
    target_sinr_dB: float = CALIBRATION_SNR_DB - 2.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown policy kind {self.kind!r}")
        if self.delta_dB < 0:
            raise DomainError("delta_dB must be >= 0")
        if self.kind == "pez" and self.exclusion_radius_m is None:
            raise DomainError("pez policy needs exclusion_radius_m")

    def admit(self, real: Realization, scenario: Scenario) -> AdmissionResult:
        if self.kind == "pez":
            return pez_filter(real, self.exclusion_radius_m, scenario.geom)
        budget = interference_budget(self.delta_dB, scenario.power.noise)
        if self.kind == "rem-centralized":
            return rem_centralized(real.cr_interferences, budget)
        return rem_decentralized(real.cr_interferences, budget)


# -- exclusion radius --------------------------------------------------------


def critical_radius(real: Realization, threshold: float, noise: float) -> float:
    """Infimum exclusion radius meeting SINR >= threshold (linear) in this draw.

    The event holds exactly when R_e > the returned value; ``-inf`` means it
    holds for every radius and ``+inf`` means it holds for none.
    """
    slack = real.pu_signal / threshold - noise
    if slack < 0.0:
        return math.inf
    order = np.argsort(-real.cr_distances, kind="stable")
    csum = np.cumsum(real.cr_interferences[order])
    k = int(np.searchsorted(csum, slack, side="right"))
    if k == real.n_active:
        return -math.inf
    return float(real.cr_distances[order[k]])


def _critical_radii_one(thresholds, scenario: Scenario, i: int):
    real = draw(scenario, i)
    return [critical_radius(real, t, scenario.power.noise) for t in thresholds]


def critical_radii(scenario: Scenario, target_sinr_dB: Sequence[float], replications: int, workers: int = 1) -> np.ndarray:
    """(replications, len(target_sinr_dB)) array of per-draw critical radii."""
    thresholds = [10.0 ** (t / 10.0) for t in target_sinr_dB]
    rows = run_replications(partial(_critical_radii_one, thresholds), scenario, replications, workers)
    return np.asarray(rows, dtype=float).reshape(replications, len(thresholds))


def pez_reliability(crit: np.ndarray, radius) -> np.ndarray | float:
    """Reliability at each radius under the common draws behind ``crit``."""
    crit = np.sort(np.asarray(crit, dtype=float))
    out = np.searchsorted(crit, radius, side="left") / crit.size
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class PezSolution:
    radius_m: float
    reliability: float
    replications: int
    status: str = field(default="ok")  # ok | no-exclusion | infeasible


def pez_radius_from_critical(
    crit: np.ndarray, reliability_target: float, geom: Geometry, tol: float = 1.0, max_steps: int = 200
) -> PezSolution:
    """Bisect the common-random-number reliability curve on [R0, R]."""
    crit = np.sort(np.asarray(crit, dtype=float))
    n = crit.size

    def rel(r):
        return pez_reliability(crit, r)

    lo, hi = geom.R0, geom.R
    if rel(lo) >= reliability_target:
        return PezSolution(lo, rel(lo), n, "no-exclusion")
    if rel(hi) < reliability_target:
        return PezSolution(hi, rel(hi), n, "infeasible")
    for _ in range(max_steps):
        if hi - lo <= tol:
            return PezSolution(hi, rel(hi), n)
        mid = 0.5 * (lo + hi)
        if rel(mid) >= reliability_target:
            hi = mid
        else:
            lo = mid
    raise ConvergenceError("exclusion radius bisection did not converge")


def solve_pez_radius(
    scenario: Scenario,
    target_sinr_dB: float,
    reliability_target: float = 0.95,
    replications: int | None = None,
    workers: int = 1,
    tol: float = 1.0,
) -> PezSolution:
    """Smallest R_e (to ``tol`` meters) with P(SINR >= target) >= reliability_target.

    Every candidate radius is scored on the same replications, so the
    estimated reliability curve is monotone and bisection is well posed.
    """
    check_pez_inputs(target_sinr_dB, reliability_target)
    reps = scenario.replications if replications is None else replications
    crit = critical_radii(scenario, [target_sinr_dB], reps, workers)[:, 0]
    return pez_radius_from_critical(crit, reliability_target, scenario.geom, tol)


def check_pez_inputs(target_sinr_dB: float, reliability_target: float) -> None:
    if not 0.0 < reliability_target < 1.0:
        raise DomainError("reliability_target must lie in (0, 1)")
    if target_sinr_dB > CALIBRATION_SNR_DB:
        raise DomainError(f"target SINR {target_sinr_dB} dB exceeds the {CALIBRATION_SNR_DB} dB calibration threshold")
