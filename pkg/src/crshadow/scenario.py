"""Scenario configuration, unit conventions and seeded sampling.

Every power is linear and normalized to a unit noise floor. Distances are in
meters and only the radial distance to the primary receiver (at the origin)
is ever sampled.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import ConfigError

BETA = math.log(10.0) / 10.0

# Reference link budget used to calibrate every transmitter.
CALIBRATION_SNR_DB = 5.0
CALIBRATION_RELIABILITY = 0.95


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class PropagationEnv:
    """Path-loss exponent and lognormal shadowing spread."""

    gamma: float
    sigma_dB: float

    def __post_init__(self):
        if not 2.0 <= self.gamma <= 6.0:
            raise ConfigError(f"gamma must lie in [2, 6], got {self.gamma}")
        if not self.sigma_dB >= 0.0:
            raise ConfigError(f"sigma_dB must be >= 0, got {self.sigma_dB}")

    @property
    def beta(self) -> float:
        return BETA

    @property
    def sigma_x(self) -> float:
        """Standard deviation of the natural-log shadowing exponent."""
        return BETA * self.sigma_dB


@dataclass(frozen=True)
class Geometry:
    R: float
    R0: float
    Rc: float

    def __post_init__(self):
        if not 0.0 < self.R0 < self.R:
            raise ConfigError(f"need 0 < R0 < R, got R0={self.R0}, R={self.R}")
        if not 0.0 < self.Rc <= self.R:
            raise ConfigError(f"need 0 < Rc <= R, got Rc={self.Rc}")


@dataclass(frozen=True)
class Population:
    density_per_m2: float
    activity_p: float
    R: float

    def __post_init__(self):
        if not 0.0 <= self.activity_p <= 1.0:
            raise ConfigError(f"activity_p must lie in [0, 1], got {self.activity_p}")
        if not self.density_per_m2 >= 0.0:
            raise ConfigError("density must be nonnegative")

    @property
    def max_count(self) -> int:
        """Number of CRs in the disc, floor(pi R^2 D)."""
        return int(math.floor(math.pi * self.R**2 * self.density_per_m2))

    @property
    def mean_active(self) -> float:
        return self.max_count * self.activity_p


@dataclass(frozen=True)
class PowerLevels:
    """Noise floor and the PU/CR transmit constants, all linear."""

    noise: float
    pu_scale: float
    cr_scale: float

    def __post_init__(self):
        for name in ("noise", "pu_scale", "cr_scale"):
            if not getattr(self, name) > 0.0:
                raise ConfigError(f"{name} must be strictly positive")


class Purpose(enum.IntEnum):
    COUNT = 0
    PLACEMENT = 1
    SHADOWING = 2
    PU_LINK = 3
    BULK = 4


@dataclass(frozen=True)
class SeedSpec:
    """Counter-based random streams keyed by (purpose, replication).

    Each stream is a Philox generator whose key is the master seed and whose
    counter's two high words hold the purpose tag and the replication index, so
    any replication can be regenerated in isolation and in any order.
    """

    master_seed: int = 20090601

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be a 64-bit unsigned integer")

    def generator(self, purpose: Purpose, index: int) -> np.random.Generator:
        if index < 0:
            raise ValueError("replication index must be nonnegative")
        bitgen = np.random.Philox(key=self.master_seed, counter=[0, 0, int(purpose), int(index)])
        return np.random.Generator(bitgen)


@dataclass(frozen=True, eq=False)
class Realization:
    """One Monte Carlo draw of the PU link and all active CRs."""

    pu_distance: float
    pu_shadow: float
    pu_signal: float
    cr_distances: np.ndarray
    cr_shadows: np.ndarray
    cr_interferences: np.ndarray

    @property
    def n_active(self) -> int:
        return len(self.cr_distances)

    def same_as(self, other: "Realization") -> bool:
        return (
            self.pu_distance == other.pu_distance
            and self.pu_shadow == other.pu_shadow
            and self.pu_signal == other.pu_signal
            and np.array_equal(self.cr_distances, other.cr_distances)
            and np.array_equal(self.cr_shadows, other.cr_shadows)
            and np.array_equal(self.cr_interferences, other.cr_interferences)
        )


def received_power(scale, shadow, distance, gamma):
    """scale * exp(shadow) * distance^-gamma, elementwise."""
    return scale * np.exp(shadow) * np.power(distance, -gamma)


def annulus_distance_from_uniform(u, R0: float, R: float):
    """Inverse of F_R(r) = (r^2 - R0^2) / (R^2 - R0^2)."""
    return np.sqrt(R0**2 + np.asarray(u, dtype=float) * (R**2 - R0**2))


def sample_cr_count(pop: Population, rng: np.random.Generator) -> int:
    return int(rng.binomial(pop.max_count, pop.activity_p))


def sample_annulus_distance(geom: Geometry, rng: np.random.Generator, size=None, outer: float | None = None):
    """Distance with density 2r/(R^2 - R0^2) on [R0, outer]; outer defaults to R."""
    R = geom.R if outer is None else outer
    return annulus_distance_from_uniform(rng.random(size), geom.R0, R)


def sample_shadowing(env: PropagationEnv, rng: np.random.Generator, size=None):
    return env.sigma_x * rng.standard_normal(size)


@dataclass(frozen=True)
class Scenario:
    env: PropagationEnv
    geom: Geometry
    pop: Population
    power: PowerLevels
    seeds: SeedSpec = field(default_factory=SeedSpec)
    replications: int = 10_000
    delta_dB: float = 2.0
    target_sinr_dB: float = 3.0

    @classmethod
    def from_config(cls, config: Mapping[str, float]) -> "Scenario":
        from .analytic import calibrate_power

        cfg = resolve_config(config)
        swept = [k for k, v in cfg.items() if is_sweep(v)]
        if swept:
            raise ConfigError(f"a single scenario cannot sweep {', '.join(swept)}")
        env = PropagationEnv(gamma=cfg["gamma"], sigma_dB=cfg["sigma_dB"])
        geom = Geometry(R=cfg["R_m"], R0=cfg["R0_m"], Rc=cfg["Rc_m"])
        pop = Population(density_per_m2=cfg["density_per_km2"] * 1e-6, activity_p=cfg["activity_p"], R=geom.R)
        noise = cfg["noise"]
        pu = calibrate_power(env, geom, geom.R, CALIBRATION_RELIABILITY, CALIBRATION_SNR_DB, noise)
        cr = calibrate_power(env, geom, geom.Rc, CALIBRATION_RELIABILITY, CALIBRATION_SNR_DB, noise)
        return cls(
            env=env,
            geom=geom,
            pop=pop,
            power=PowerLevels(noise=noise, pu_scale=pu, cr_scale=cr),
            seeds=SeedSpec(int(cfg["master_seed"])),
            replications=int(cfg["replications"]),
            delta_dB=cfg["delta_dB"],
            target_sinr_dB=cfg["target_sinr_dB"],
        )

    def with_seeds(self, master_seed: int) -> "Scenario":
        return replace(self, seeds=SeedSpec(master_seed))


def sample_realization(
    env: PropagationEnv,
    geom: Geometry,
    pop: Population,
    power: PowerLevels,
    seeds: SeedSpec,
    replication_index: int,
) -> Realization:
    n = sample_cr_count(pop, seeds.generator(Purpose.COUNT, replication_index))
    r = sample_annulus_distance(geom, seeds.generator(Purpose.PLACEMENT, replication_index), n)
    x = sample_shadowing(env, seeds.generator(Purpose.SHADOWING, replication_index), n)

    pu_rng = seeds.generator(Purpose.PU_LINK, replication_index)
    r_p = float(sample_annulus_distance(geom, pu_rng))
    x_p = float(sample_shadowing(env, pu_rng))
    return Realization(
        pu_distance=r_p,
        pu_shadow=x_p,
        pu_signal=float(received_power(power.pu_scale, x_p, r_p, env.gamma)),
        cr_distances=r,
        cr_shadows=x,
        cr_interferences=received_power(power.cr_scale, x, r, env.gamma),
    )


def draw(scenario: Scenario, replication_index: int) -> Realization:
    s = scenario
    return sample_realization(s.env, s.geom, s.pop, s.power, s.seeds, replication_index)


# -- config file -------------------------------------------------------------

DEFAULT_CONFIG: dict[str, float] = {
    "R_m": 1000.0,
    "R0_m": 1.0,
    "Rc_m": 50.0,
    "gamma": 3.5,
    "sigma_dB": 8.0,
    "density_per_km2": 1000.0,
    "activity_p": 0.1,
    "master_seed": 20090601,
    "replications": 10_000,
    "delta_dB": 2.0,
    "target_sinr_dB": 3.0,
    "noise": 1.0,
}
INTEGER_KEYS = {"master_seed", "replications"}


def _coerce_scalar(key: str, raw) -> float | int:
    try:
        if key in INTEGER_KEYS:
            if isinstance(raw, int):
                return raw
            try:
                return int(str(raw).strip())
            except ValueError:
                value = float(raw)  # accepts 1e5
                if not value.is_integer():
                    raise
                return int(value)
        return float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def _coerce(key: str, raw):
    """Validate one config entry; comma lists and sequences become sweep tuples."""
    if key not in DEFAULT_CONFIG:
        raise ConfigError(f"unknown config key {key!r}")
    if isinstance(raw, str) and "," in raw:
        raw = [part for part in raw.split(",") if part.strip()]
    if isinstance(raw, (list, tuple)):
        if key in INTEGER_KEYS:
            raise ConfigError(f"{key} cannot be swept")
        if not raw:
            raise ConfigError(f"empty sweep for {key}")
        values = tuple(_coerce_scalar(key, v) for v in raw)
        return values[0] if len(values) == 1 else values
    return _coerce_scalar(key, raw)


def resolve_config(config: Mapping[str, float]) -> dict:
    """Fill defaults and validate key names and value types."""
    resolved = dict(DEFAULT_CONFIG)
    for key, raw in config.items():
        resolved[key] = _coerce(key, raw)
    if resolved["replications"] < 1:
        raise ConfigError("replications must be >= 1")
    for value in np.atleast_1d(resolved["delta_dB"]):
        if value < 0:
            raise ConfigError("delta_dB must be >= 0")
    return resolved


def is_sweep(value) -> bool:
    return isinstance(value, tuple)


def parse_config_text(text: str) -> dict[str, float]:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, float] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = _coerce(key, value)
    return out


def load_config(path: str | Path) -> dict[str, float]:
    return parse_config_text(Path(path).read_text())


def format_config(config: Mapping[str, float]) -> str:
    def fmt(key, value):
        if is_sweep(value):
            return ", ".join(fmt(key, v) for v in value)
        return str(value) if key in INTEGER_KEYS else repr(float(value))

    lines = [f"{key} = {fmt(key, config[key])}" for key in DEFAULT_CONFIG]
    return "\n".join(lines) + "\n"
