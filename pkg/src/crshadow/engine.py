"""Replicated Monte Carlo evaluation: aggregate interference, empirical CDFs,
KS distances and reliability estimates.

Replications are independent work units keyed by their index, so they can be
farmed out to worker processes without changing any result.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError
from .scenario import (
    Geometry,
    PropagationEnv,
    Purpose,
    Realization,
    Scenario,
    SeedSpec,
    draw,
    received_power,
    sample_annulus_distance,
    sample_shadowing,
)

Z95 = 1.96


def aggregate_interference(real: Realization, transmit_mask) -> float:
    mask = np.asarray(transmit_mask, dtype=bool)
    if mask.shape != (real.n_active,):
        raise DomainError(f"mask length {mask.size} does not match {real.n_active} active CRs")
    return float(np.sum(real.cr_interferences[mask]))


@dataclass(frozen=True, eq=False)
class EmpiricalCdf:
    values: np.ndarray

    @property
    def n(self) -> int:
        return len(self.values)

    def __call__(self, x):
        """Right-continuous step function rank(x) / n."""
        out = np.searchsorted(self.values, x, side="right") / self.n
        return float(out) if np.ndim(out) == 0 else out


def empirical_cdf(samples) -> EmpiricalCdf:
    values = np.sort(np.asarray(samples, dtype=float).ravel())
    if values.size == 0:
        raise DomainError("empirical CDF needs at least one sample")
    return EmpiricalCdf(values)


def ks_distance(e: EmpiricalCdf, cdf: Callable) -> float:
    """sup |F_n - F|, checking both sides of every jump."""
    F = np.asarray(cdf(e.values), dtype=float)
    n = e.n
    upper = np.arange(1, n + 1) / n - F
    lower = F - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


@dataclass(frozen=True)
class ReliabilityEstimate:
    estimate: float
    replications: int

    @property
    def half_width(self) -> float:
        p = self.estimate
        return Z95 * math.sqrt(p * (1.0 - p) / self.replications)

    @classmethod
    def from_outcomes(cls, outcomes) -> "ReliabilityEstimate":
        outcomes = np.asarray(outcomes, dtype=bool)
        return cls(float(outcomes.mean()), int(outcomes.size))


# -- replication runner ------------------------------------------------------


def _run_chunk(fn, scenario, start, stop):
    return [fn(scenario, i) for i in range(start, stop)]


def run_replications(fn: Callable, scenario: Scenario, replications: int, workers: int = 1, chunk: int = 2000) -> list:
    """Evaluate ``fn(scenario, i)`` for i in range(replications), in index order.

    ``fn`` must be picklable when ``workers > 1``. The result list does not
    depend on ``workers`` or ``chunk``.
    """
    if replications < 1:
        raise DomainError("replications must be >= 1")
    bounds = [(s, min(s + chunk, replications)) for s in range(0, replications, chunk)]
    if workers <= 1 or len(bounds) == 1:
        parts = [_run_chunk(fn, scenario, s, e) for s, e in bounds]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, *zip(*[(fn, scenario, s, e) for s, e in bounds])))
    return [item for part in parts for item in part]


# -- single-link bulk sampling ----------------------------------------------


def sample_single_links(
    env: PropagationEnv,
    geom: Geometry,
    scale: float,
    n: int,
    seeds: SeedSpec,
    outer: float | None = None,
    stream: int = 0,
) -> np.ndarray:
    """n independent draws of scale * e^X * r^-gamma on the annulus [R0, outer]."""
    r = sample_annulus_distance(geom, seeds.generator(Purpose.BULK, 2 * stream), n, outer=outer)
    x = sample_shadowing(env, seeds.generator(Purpose.BULK, 2 * stream + 1), n)
    return received_power(scale, x, r, env.gamma)


# -- reliability -------------------------------------------------------------


def sinr(real: Realization, result, noise: float) -> float:
    aggregate = 0.0 if result is None else result.aggregate
    return real.pu_signal / (noise + aggregate)


@dataclass(frozen=True)
class SinrAtLeast:
    """Event predicate: SINR (linear) >= threshold given in dB."""

    threshold_dB: float

    def __call__(self, real: Realization, result, noise: float) -> bool:
        if self.threshold_dB == -math.inf:
            return True
        return sinr(real, result, noise) >= 10.0 ** (self.threshold_dB / 10.0)


def always(real, result, noise) -> bool:
    return True


def _reliability_outcome(policy, predicate, scenario: Scenario, i: int) -> bool:
    real = draw(scenario, i)
    result = None if policy is None else policy.admit(real, scenario)
    return bool(predicate(real, result, scenario.power.noise))


def estimate_reliability(
    scenario: Scenario,
    policy,
    predicate: Callable,
    replications: int,
    workers: int = 1,
) -> ReliabilityEstimate:
    """Fraction of replications where ``predicate(real, admitted, noise)`` holds.

    ``policy`` is anything with ``admit(realization, scenario)``; ``None``
    means no CR transmits.
    """
    fn = partial(_reliability_outcome, policy, predicate)
    return ReliabilityEstimate.from_outcomes(run_replications(fn, scenario, replications, workers))


def total_interference(scenario: Scenario, i: int) -> float:
    """I_TOT with every active CR transmitting."""
    return float(np.sum(draw(scenario, i).cr_interferences))


def mean_and_stderr(values: Sequence[float]) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return float(v.mean()), math.nan
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))
