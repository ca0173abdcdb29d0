"""Preset experiments producing plot-ready tables.

Each runner takes an effective config (scalars or sweep tuples per key) and
returns named tables. Nothing here touches the filesystem.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable

import numpy as np

from . import analytic
from .admission import (
    AdmissionPolicy,
    check_pez_inputs,
    critical_radii,
    interference_budget,
    pez_radius_from_critical,
    rem_centralized,
    rem_decentralized,
)
from .errors import DomainError
from .engine import (
    SinrAtLeast,
    empirical_cdf,
    estimate_reliability,
    ks_distance,
    mean_and_stderr,
    run_replications,
    sample_single_links,
)
from .scenario import (
    CALIBRATION_RELIABILITY,
    CALIBRATION_SNR_DB,
    DEFAULT_CONFIG,
    Scenario,
    draw,
    is_sweep,
    linear_to_db,
    resolve_config,
)

CDF_TABLE_QUANTILES = np.linspace(0.01, 0.99, 99)


@dataclass(frozen=True)
class Table:
    header: tuple[str, ...]
    rows: list[tuple]


@dataclass
class Outcome:
    tables: dict[str, Table]
    summary: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class ExperimentPreset:
    name: str
    outputs: tuple[str, ...]
    settings: dict  # config keys; tuples are sweeps
    runner: Callable[[dict, int], Outcome]


def effective_config(preset: ExperimentPreset, overrides: dict) -> dict:
    """defaults < preset settings < user overrides."""
    return resolve_config({**preset.settings, **overrides})


def expand(config: dict) -> list[dict]:
    """Cartesian product over swept keys, in config-key order."""
    swept = [k for k in DEFAULT_CONFIG if is_sweep(config[k])]
    points = []
    for combo in itertools.product(*(config[k] for k in swept)):
        point = dict(config)
        point.update(zip(swept, combo))
        points.append(point)
    return points


# -- cdf-compare ---------------------------------------------------------------


def run_cdf_compare(config: dict, workers: int = 1) -> Outcome:
    rows, summary = [], []
    n = int(config["replications"])
    for point in expand(config):
        sc = Scenario.from_config(point)
        B = sc.power.cr_scale
        samples = sample_single_links(sc.env, sc.geom, B, n, sc.seeds)
        ecdf = empirical_cdf(samples)
        cdf = partial(analytic.single_interferer_cdf, env=sc.env, geom=sc.geom, scale=B)
        ks = ks_distance(ecdf, cdf)
        x = np.quantile(ecdf.values, CDF_TABLE_QUANTILES)
        for xi, fa, fe in zip(x, cdf(x), ecdf(x)):
            rows.append((sc.env.gamma, sc.env.sigma_dB, float(linear_to_db(xi / sc.power.noise)), float(fa), float(fe), ks))
        summary.append(f"gamma={sc.env.gamma:g} sigma={sc.env.sigma_dB:g} dB  KS={ks:.5f}  (n={n})")
    header = ("gamma", "sigma_dB", "x_dB", "F_analytic", "F_empirical", "ks")
    return Outcome({"cdf_compare.csv": Table(header, rows)}, summary)


# -- moments / skewness --------------------------------------------------------


def skewness_row(sc: Scenario) -> tuple:
    m = analytic.moment_set(sc.env, sc.geom, sc.power.cr_scale)
    fit = analytic.fenton_wilkinson_fit(m)
    var = m.m2 - m.m1**2
    sk_y = (fit.third_moment + 2 * m.m1**3 - 3 * m.m1 * m.m2) / var**1.5
    ratio = fit.third_moment / m.m3
    try:
        asym = analytic.skewness_ratio_asymptotic(sc.env, sc.geom)
        rel = abs(ratio - asym) / ratio
    except DomainError:
        asym = rel = math.nan
    return (sc.env.gamma, sc.env.sigma_dB, m.m1, m.m2, m.m3, m.sk, sk_y, fit.mu_z, fit.sigma_z2, ratio, asym, rel)


SKEWNESS_HEADER = (
    "gamma", "sigma_dB", "m1", "m2", "m3", "sk_I", "sk_Y", "mu_z", "sigma_z2",
    "ratio_exact", "ratio_asymptotic", "ratio_rel_err",
)


def run_skewness(config: dict, workers: int = 1) -> Outcome:
    rows = [skewness_row(Scenario.from_config(p)) for p in expand(config)]
    summary = [
        f"gamma={r[0]:g} sigma={r[1]:g} dB  E(Y^3)/m3={r[9]:.6g}  asymptotic={r[10]:.6g}" for r in rows
    ]
    return Outcome({"skewness.csv": Table(SKEWNESS_HEADER, rows)}, summary)


def run_moments(config: dict, workers: int = 1) -> Outcome:
    outcome = run_skewness(config, workers)
    table = outcome.tables.pop("skewness.csv")
    outcome.tables["moments.csv"] = table
    outcome.summary = [
        f"gamma={r[0]:g} sigma={r[1]:g} dB  m1={r[2]:.6g} m2={r[3]:.6g} m3={r[4]:.6g} SK(I)={r[5]:.6g} "
        f"FW mu_z={r[7]:.6g} sigma_z2={r[8]:.6g}"
        for r in table.rows
    ]
    return outcome


# -- calibration -------------------------------------------------------------


def run_calibrate(config: dict, workers: int = 1) -> Outcome:
    rows, summary = [], []
    for point in expand(config):
        sc = Scenario.from_config(point)
        est = estimate_reliability(sc, None, SinrAtLeast(CALIBRATION_SNR_DB), sc.replications, workers)
        rows.append(
            (sc.env.gamma, sc.env.sigma_dB, sc.geom.R, sc.geom.Rc, sc.power.pu_scale, sc.power.cr_scale,
             est.estimate, est.half_width, est.replications)
        )
        summary.append(
            f"gamma={sc.env.gamma:g} sigma={sc.env.sigma_dB:g} dB  A={sc.power.pu_scale:.6g} B={sc.power.cr_scale:.6g}  "
            f"P(SNR>={CALIBRATION_SNR_DB:g} dB)={est.estimate:.4f} +/- {est.half_width:.4f}"
        )
    header = ("gamma", "sigma_dB", "R_m", "Rc_m", "pu_scale", "cr_scale", "estimate", "ci_halfwidth", "replications")
    return Outcome({"reliability.csv": Table(header, rows)}, summary)


# -- PEZ sweep ---------------------------------------------------------------

PEZ_HEADER = ("sigma_dB", "gamma", "density_per_km2", "target_sinr_dB", "Re_m", "reliability_at_Re", "Rc_m", "status")


def run_pez(config: dict, workers: int = 1) -> Outcome:
    targets = config["target_sinr_dB"]
    targets = list(targets) if is_sweep(targets) else [targets]
    for target in targets:
        check_pez_inputs(target, CALIBRATION_RELIABILITY)
    rows, summary = [], []
    for point in expand({**config, "target_sinr_dB": targets[0]}):
        sc = Scenario.from_config(point)
        crit = critical_radii(sc, targets, sc.replications, workers)
        for j, target in enumerate(targets):
            sol = pez_radius_from_critical(crit[:, j], CALIBRATION_RELIABILITY, sc.geom)
            rows.append(
                (sc.env.sigma_dB, sc.env.gamma, point["density_per_km2"], target, sol.radius_m, sol.reliability,
                 sc.geom.Rc, sol.status)
            )
            summary.append(
                f"sigma={sc.env.sigma_dB:g} dB gamma={sc.env.gamma:g} Rc={sc.geom.Rc:g} m  "
                f"target={target:g} dB  R_e={sol.radius_m:.1f} m ({sol.status})"
            )
    return Outcome({"pez.csv": Table(PEZ_HEADER, rows)}, summary)


# -- REM counts --------------------------------------------------------------


def _rem_counts_one(scenario: Scenario, i: int):
    real = draw(scenario, i)
    budget = interference_budget(scenario.delta_dB, scenario.power.noise)
    return real.n_active, rem_centralized(real.cr_interferences, budget).n_admitted, rem_decentralized(
        real.cr_interferences, budget
    ).n_admitted


def rem_counts(scenario: Scenario, replications: int, workers: int = 1) -> np.ndarray:
    """(replications, 3) array of n_active, centralized count, decentralized count."""
    return np.asarray(run_replications(_rem_counts_one, scenario, replications, workers), dtype=np.int64)


def _pct(n, total):
    return 100.0 * n / total if total else 0.0


REM_HEADER = ("scheme", "replication", "n_active", "n_admitted", "pct_admitted", "gamma", "sigma_dB", "density_per_km2")


def run_rem(config: dict, workers: int = 1) -> Outcome:
    rows, summary = [], []
    for point in expand(config):
        sc = Scenario.from_config(point)
        counts = rem_counts(sc, sc.replications, workers)
        for scheme, col in (("rem-centralized", 1), ("rem-decentralized", 2)):
            for i, (n_active, n_adm) in enumerate(zip(counts[:, 0], counts[:, col])):
                rows.append(
                    (scheme, i, int(n_active), int(n_adm), _pct(n_adm, n_active), sc.env.gamma, sc.env.sigma_dB,
                     point["density_per_km2"])
                )
            mean, se = mean_and_stderr(counts[:, col])
            summary.append(
                f"gamma={sc.env.gamma:g} sigma={sc.env.sigma_dB:g} dB  {scheme}: mean N={mean:.2f} (se {se:.2f})"
            )
    return Outcome({"rem_counts.csv": Table(REM_HEADER, rows)}, summary)


# -- access comparison -------------------------------------------------------

SCHEMES = ("rem-centralized", "rem-decentralized", "pez")


def _access_one(policies, scenario: Scenario, i: int):
    real = draw(scenario, i)
    return [real.n_active] + [p.admit(real, scenario).n_admitted for p in policies]


@dataclass(frozen=True)
class AccessComparison:
    counts: np.ndarray  # columns: n_active, then one per scheme in SCHEMES
    pez_radius_m: float
    pez_target_sinr_dB: float

    def pct(self, scheme: str) -> np.ndarray:
        col = 1 + SCHEMES.index(scheme)
        active = self.counts[:, 0]
        return np.where(active > 0, 100.0 * self.counts[:, col] / np.maximum(active, 1), 0.0)


def access_comparison(scenario: Scenario, replications: int, workers: int = 1) -> AccessComparison:
    """REM schemes with budget delta vs a PEZ sized for SINR >= 5 dB - delta.

    The PEZ radius is solved on the same replications the schemes are scored on.
    """
    pez_target = CALIBRATION_SNR_DB - scenario.delta_dB
    crit = critical_radii(scenario, [pez_target], replications, workers)[:, 0]
    sol = pez_radius_from_critical(crit, CALIBRATION_RELIABILITY, scenario.geom)
    policies = (
        AdmissionPolicy("rem-centralized", delta_dB=scenario.delta_dB),
        AdmissionPolicy("rem-decentralized", delta_dB=scenario.delta_dB),
        AdmissionPolicy("pez", delta_dB=scenario.delta_dB, exclusion_radius_m=sol.radius_m, target_sinr_dB=pez_target),
    )
    counts = run_replications(partial(_access_one, policies), scenario, replications, workers)
    return AccessComparison(np.asarray(counts, dtype=np.int64), sol.radius_m, pez_target)


def run_access(config: dict, workers: int = 1) -> Outcome:
    rows, summary_rows, summary = [], [], []
    for point in expand(config):
        sc = Scenario.from_config(point)
        cmp = access_comparison(sc, sc.replications, workers)
        density = point["density_per_km2"]
        for scheme in SCHEMES:
            col = 1 + SCHEMES.index(scheme)
            pct = cmp.pct(scheme)
            for i in range(len(pct)):
                rows.append((scheme, i, int(cmp.counts[i, 0]), int(cmp.counts[i, col]), float(pct[i]), density))
            mean, se = mean_and_stderr(pct)
            summary_rows.append((density, scheme, mean, se, cmp.pez_radius_m, cmp.pez_target_sinr_dB, len(pct)))
            summary.append(f"density={density:g}/km^2  {scheme}: mean admitted {mean:.3f} % (se {se:.3f})")
        summary.append(f"density={density:g}/km^2  PEZ radius {cmp.pez_radius_m:.1f} m at {cmp.pez_target_sinr_dB:g} dB")
    return Outcome(
        {
            "access.csv": Table(("scheme", "replication", "n_active", "n_admitted", "pct_admitted", "density_per_km2"), rows),
            "access_summary.csv": Table(
                ("density_per_km2", "scheme", "mean_pct", "stderr_pct", "pez_Re_m", "pez_target_sinr_dB", "replications"),
                summary_rows,
            ),
        },
        summary,
    )


# -- presets -------------------------------------------------------------------

_TARGETS = (0.0, 1.0, 2.0, 3.0, 4.0, 5.0)

PRESETS: dict[str, ExperimentPreset] = {
    p.name: p
    for p in (
        ExperimentPreset(
            "cdf-compare", ("cdf_compare.csv",),
            {"gamma": (2.0, 3.0, 3.5, 4.0), "sigma_dB": (4.0, 8.0, 12.0), "replications": 1_000_000},
            run_cdf_compare,
        ),
        ExperimentPreset("moments", ("moments.csv",), {}, run_moments),
        ExperimentPreset(
            "skewness-report", ("skewness.csv",),
            {"gamma": (2.0, 3.0, 3.5, 4.0), "sigma_dB": (4.0, 6.0, 8.0, 12.0)},
            run_skewness,
        ),
        ExperimentPreset("calibrate", ("reliability.csv",), {"replications": 100_000}, run_calibrate),
        ExperimentPreset(
            "pez-sweep", ("pez.csv",),
            {"sigma_dB": (4.0, 6.0, 8.0, 12.0), "target_sinr_dB": _TARGETS, "gamma": 3.5,
             "density_per_km2": 1000.0, "Rc_m": 50.0, "replications": 100_000},
            run_pez,
        ),
        ExperimentPreset(
            "pez-ratio", ("pez.csv",),
            {"Rc_m": (100.0, 50.0, 25.0), "target_sinr_dB": _TARGETS, "sigma_dB": 8.0, "gamma": 3.5,
             "density_per_km2": 1000.0, "replications": 100_000},
            run_pez,
        ),
        ExperimentPreset(
            "rem-cdf", ("rem_counts.csv",),
            {"gamma": (3.0, 3.5, 4.0), "sigma_dB": (4.0, 8.0, 12.0), "density_per_km2": 10_000.0,
             "Rc_m": 50.0, "replications": 10_000},
            run_rem,
        ),
        ExperimentPreset(
            "access-compare", ("access.csv", "access_summary.csv"),
            {"density_per_km2": (10_000.0, 1000.0), "Rc_m": 100.0, "sigma_dB": 8.0, "gamma": 3.5,
             "delta_dB": 2.0, "replications": 10_000},
            run_access,
        ),
    )
}
