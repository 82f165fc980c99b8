"""Experiment configuration: defaults, INI-file loading, validation, and the
config digest embedded in every report.

The file format is flat key = value pairs under per-module sections::

    [experiment]
    kind = bell
    seed = 7
    shots_per_setting = 20000
    runs = 5

    [noise]
    detection_flip_eps = 0.02
    gate_depolarize_p = 0.0
    dephasing_kind = engineered-white
    dephasing_rate_gamma = 0.18

    [readout]
    model = ideal-flip

    [sweep]
    points_per_period = 16

    [bell]
    alpha1 = -0.39269908169872414

    [dfs]
    mode = both
    schedule = fraction
"""

from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass, field, fields, replace

from .analysis import BellSettings
from .noise import AMBIENT_HARMONICS_HZ, DephasingProcess, NoiseConfig
from .readout import ReadoutConfig

SCHEMA_VERSION = "ionsim-report-1"

EXPERIMENTS = ("entangle", "bell", "dfs")


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass(frozen=True)
class SweepConfig:
    """Phase grid for parity fringes and coherence sweeps."""

    points_per_period: int = 16
    start_rad: float = 0.0

    def __post_init__(self):
        if self.points_per_period < 4:
            raise ConfigError("points_per_period must be >= 4")

    def grid(self, period_rad: float) -> tuple[float, ...]:
        step = period_rad / self.points_per_period
        return tuple(self.start_rad + i * step for i in range(self.points_per_period))


@dataclass(frozen=True)
class DfsConfig:
    """Storage-experiment knobs.

    schedule 'fraction' mirrors engineered noise applied for a fraction of a
    fixed delay; schedule 'delay' mirrors a variable storage time under
    ambient-style noise.  mode picks the encoded pipeline, the unencoded
    test state, or both.
    """

    beta: float = math.pi / 4
    alpha: float = 0.0
    mode: str = "both"
    schedule: str = "fraction"
    delay_us: float = 25.0
    fractions: tuple[float, ...] = (0.0, 1 / 7, 2 / 7, 3 / 7, 4 / 7, 5 / 7, 6 / 7, 1.0)
    delays_us: tuple[float, ...] = (0.0, 38.0, 76.0, 114.0, 152.0, 190.0, 228.0, 266.0)
    alpha_prime_points: int = 16

    def __post_init__(self):
        if self.mode not in ("encoded", "test", "both"):
            raise ConfigError(f"dfs mode must be encoded|test|both, got {self.mode!r}")
        if self.schedule not in ("fraction", "delay"):
            raise ConfigError(f"dfs schedule must be fraction|delay, got {self.schedule!r}")
        if self.delay_us < 0:
            raise ConfigError("delay_us must be >= 0")
        if not self.fractions or any(not 0.0 <= f <= 1.0 for f in self.fractions):
            raise ConfigError("fractions must be a non-empty grid inside [0, 1]")
        if not self.delays_us or any(d < 0 for d in self.delays_us):
            raise ConfigError("delays_us must be a non-empty grid of times >= 0")
        if self.alpha_prime_points < 4:
            raise ConfigError("alpha_prime_points must be >= 4")

    def exposures_us(self) -> tuple[float, ...]:
        if self.schedule == "fraction":
            return tuple(f * self.delay_us for f in self.fractions)
        return tuple(self.delays_us)

    def alpha_prime_grid(self) -> tuple[float, ...]:
        step = 2.0 * math.pi / self.alpha_prime_points
        return tuple(i * step for i in range(self.alpha_prime_points))

    def modes(self) -> tuple[str, ...]:
        return ("test", "encoded") if self.mode == "both" else (self.mode,)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "entangle"
    n_ions: int = 2
    shots_per_setting: int = 20000
    runs: int = 5
    seed: int = 1
    analytic: bool = False
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    readout: ReadoutConfig = field(default_factory=ReadoutConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    bell_settings: BellSettings = field(default_factory=BellSettings)
    dfs: DfsConfig = field(default_factory=DfsConfig)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if self.n_ions not in (2, 4):
            raise ConfigError("n_ions must be 2 or 4")
        if self.experiment in ("bell", "dfs") and self.n_ions != 2:
            raise ConfigError(f"{self.experiment} requires n_ions = 2")
        if self.shots_per_setting < 1:
            raise ConfigError("shots_per_setting must be >= 1")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.readout.model == "photon-count" and len(self.readout.thresholds) != self.n_ions:
            raise ConfigError(
                f"photon-count readout needs {self.n_ions} thresholds, "
                f"got {len(self.readout.thresholds)}"
            )

    def digest(self) -> str:
        """sha256 over the canonical key=value rendering (includes the seed)."""
        payload = "\n".join(f"{k}={v}" for k, v in sorted(self.canonical_items()))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def canonical_items(self) -> list[tuple[str, str]]:
        items: list[tuple[str, str]] = [
            ("experiment.kind", self.experiment),
            ("experiment.n_ions", repr(self.n_ions)),
            ("experiment.shots_per_setting", repr(self.shots_per_setting)),
            ("experiment.runs", repr(self.runs)),
            ("experiment.seed", repr(self.seed)),
            ("experiment.analytic", repr(self.analytic)),
            ("noise.detection_flip_eps", repr(self.noise.detection_flip_eps)),
            ("noise.gate_depolarize_p", repr(self.noise.gate_depolarize_p)),
            ("noise.phase_jitter_sigma", repr(self.noise.phase_jitter_sigma)),
            ("readout.model", self.readout.model),
            ("readout.flip_eps", repr(self.readout.flip_eps)),
            ("readout.flip_eps_up", repr(self.readout.flip_eps_up)),
            ("readout.lambda_bright", repr(self.readout.lambda_bright)),
            ("readout.lambda_dark", repr(self.readout.lambda_dark)),
            ("readout.thresholds", repr(self.readout.thresholds)),
            ("sweep.points_per_period", repr(self.sweep.points_per_period)),
            ("sweep.start_rad", repr(self.sweep.start_rad)),
            ("bell.alpha1", repr(self.bell_settings.alpha1)),
            ("bell.delta1", repr(self.bell_settings.delta1)),
            ("bell.beta2", repr(self.bell_settings.beta2)),
            ("bell.gamma2", repr(self.bell_settings.gamma2)),
            ("dfs.beta", repr(self.dfs.beta)),
            ("dfs.alpha", repr(self.dfs.alpha)),
            ("dfs.mode", self.dfs.mode),
            ("dfs.schedule", self.dfs.schedule),
            ("dfs.delay_us", repr(self.dfs.delay_us)),
            ("dfs.fractions", repr(self.dfs.fractions)),
            ("dfs.delays_us", repr(self.dfs.delays_us)),
            ("dfs.alpha_prime_points", repr(self.dfs.alpha_prime_points)),
        ]
        if self.noise.dephasing is None:
            items.append(("noise.dephasing", "none"))
        else:
            d = self.noise.dephasing
            items += [
                ("noise.dephasing_kind", d.kind),
                ("noise.dephasing_rate_gamma", repr(d.rate_gamma)),
                ("noise.dephasing_ambient_amplitudes", repr(d.ambient_amplitudes_rad_per_us)),
            ]
        return items


def _parse_floats(raw: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in raw.replace(",", " ").split())


def _parse_ints(raw: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in raw.replace(",", " ").split())


def load_config(path: str, overrides: dict | None = None) -> ExperimentConfig:
    """Read an INI experiment file; overrides (CLI flags) win over the file."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")
    try:
        return build_config(parser, overrides or {})
    except (ValueError, KeyError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def build_config(parser: configparser.ConfigParser, overrides: dict) -> ExperimentConfig:
    def get(section: str, key: str, cast, default):
        if key in overrides and overrides[key] is not None:
            return overrides[key]
        if parser.has_option(section, key):
            raw = parser.get(section, key)
            return cast(raw)
        return default

    def get_bool(section: str, key: str, default: bool) -> bool:
        if key in overrides and overrides[key] is not None:
            return bool(overrides[key])
        if parser.has_option(section, key):
            return parser.getboolean(section, key)
        return default

    dephasing = None
    kind = get("noise", "dephasing_kind", str, None)
    if kind is not None:
        dephasing = DephasingProcess(
            kind=kind,
            rate_gamma=get("noise", "dephasing_rate_gamma", float, 0.0),
            ambient_amplitudes_rad_per_us=get(
                "noise",
                "dephasing_ambient_amplitudes",
                _parse_floats,
                (0.0,) * len(AMBIENT_HARMONICS_HZ),
            ),
        )

    noise = NoiseConfig(
        dephasing=dephasing,
        detection_flip_eps=get("noise", "detection_flip_eps", float, 0.0),
        gate_depolarize_p=get("noise", "gate_depolarize_p", float, 0.0),
        phase_jitter_sigma=get("noise", "phase_jitter_sigma", float, 0.0),
    )
    flip_eps_up = get("readout", "flip_eps_up", float, None)
    readout = ReadoutConfig(
        model=get("readout", "model", str, "ideal-flip"),
        flip_eps=get("readout", "flip_eps", float, noise.detection_flip_eps),
        flip_eps_up=flip_eps_up,
        lambda_bright=get("readout", "lambda_bright", float, 10.0),
        lambda_dark=get("readout", "lambda_dark", float, 0.1),
        thresholds=get("readout", "thresholds", _parse_ints, ()),
    )
    sweep = SweepConfig(
        points_per_period=get("sweep", "points_per_period", int, 16),
        start_rad=get("sweep", "start_rad", float, 0.0),
    )
    bell = BellSettings(
        alpha1=get("bell", "alpha1", float, -math.pi / 8),
        delta1=get("bell", "delta1", float, 3 * math.pi / 8),
        beta2=get("bell", "beta2", float, -math.pi / 8),
        gamma2=get("bell", "gamma2", float, 3 * math.pi / 8),
    )
    dfs_defaults = DfsConfig()
    dfs = DfsConfig(
        beta=get("dfs", "beta", float, dfs_defaults.beta),
        alpha=get("dfs", "alpha", float, dfs_defaults.alpha),
        mode=get("dfs", "mode", str, dfs_defaults.mode),
        schedule=get("dfs", "schedule", str, dfs_defaults.schedule),
        delay_us=get("dfs", "delay_us", float, dfs_defaults.delay_us),
        fractions=get("dfs", "fractions", _parse_floats, dfs_defaults.fractions),
        delays_us=get("dfs", "delays_us", _parse_floats, dfs_defaults.delays_us),
        alpha_prime_points=get("dfs", "alpha_prime_points", int, dfs_defaults.alpha_prime_points),
    )
    return ExperimentConfig(
        experiment=get("experiment", "kind", str, "entangle"),
        n_ions=get("experiment", "n_ions", int, 2),
        shots_per_setting=get("experiment", "shots_per_setting", int, 20000),
        runs=get("experiment", "runs", int, 5),
        seed=get("experiment", "seed", int, 1),
        analytic=get_bool("experiment", "analytic", False),
        noise=noise,
        readout=readout,
        sweep=sweep,
        bell_settings=bell,
        dfs=dfs,
    )


def default_config(**overrides) -> ExperimentConfig:
    """Programmatic construction with the same override names as the CLI."""
    parser = configparser.ConfigParser()
    return build_config(parser, overrides)


def with_updates(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    return replace(cfg, **changes)
