"""Run configuration: a flat TOML table of scalar keys.

Example::

    scenario = "afc"
    kappa_tau = 0.5
    trials = 100000
    seed = 42

Unknown keys are rejected. See ``FIELD_DOCS`` for the schema.
"""

from __future__ import annotations

import dataclasses
import enum
import math
import sys
from dataclasses import dataclass
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .afc import DEFAULT_MAX_ATTEMPTS, RetryPolicy
from .channel import JITTER_MODELS, ChannelModel, make_jitter
from .errors import ConfigError, ConfigParseError
from .planner import Schedule
from .purification import DEFAULT_STEP_CAP
from .rng import check_seed


class Scenario(enum.Enum):
    CHANNEL = "channel"
    AFC = "afc"
    PURIFY = "purify"
    PLAN = "plan"
    CHAIN = "chain"

    @property
    def stochastic(self) -> bool:
        return self is not Scenario.PLAN


@dataclass(frozen=True)
class SimConfig:
    scenario: Scenario
    trials: int = 1
    seed: int | None = None
    kappa_tau: float | None = None
    kappa: float | None = None
    tau: float | None = None
    l: float | None = None
    l0: float | None = None
    jitter: str = "none"
    omega: float = 0.0
    jitter_amplitude: float = 0.0
    max_attempts: int = DEFAULT_MAX_ATTEMPTS
    overhead: float = 0.0
    t0: float = 0.0
    f_target: float | None = None
    step_cap: int = DEFAULT_STEP_CAP
    barrier: bool = True
    n_segments: int | None = None
    schedule: Schedule = Schedule.DOUBLING
    connection_quality: float = 1.0
    f_working: float | None = None
    repurify_rate: float | None = None
    output_path: str | None = None

    def __post_init__(self):
        validate(self)

    def channel(self) -> ChannelModel:
        """Link model; for ``chain`` this is the whole link, not one segment."""
        jitter = make_jitter(self.jitter, self.omega, self.jitter_amplitude)
        if self.kappa_tau is not None:
            tau = self.tau if self.tau is not None else 1.0
            model = ChannelModel(kappa=self.kappa_tau / tau, tau=tau, l=self.l, l0=self.l0, phase_jitter=jitter)
            if self.kappa is not None and abs(math.exp(-self.kappa * tau) - math.exp(-self.kappa_tau)) > 1e-12:
                raise ConfigError("kappa * tau disagrees with kappa_tau", "kappa")
            return model
        return ChannelModel(self.kappa, self.tau, self.l, self.l0, jitter)

    def policy(self, rng=None) -> RetryPolicy:
        return RetryPolicy(self.max_attempts or None, rng, self.overhead)

    def to_dict(self) -> dict[str, Any]:
        """Echo with enums as their strings and unset keys dropped."""
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            out[f.name] = v.value if isinstance(v, enum.Enum) else v
        return out

    def replace(self, **changes) -> "SimConfig":
        return from_mapping({**self.to_dict(), **changes})


FIELD_DOCS = {
    "scenario": "one of channel, afc, purify, plan, chain",
    "trials": "number of Monte Carlo trials (>= 1)",
    "seed": "integer in [0, 2**64); required by stochastic scenarios",
    "kappa_tau": "loss exponent per transfer; alternative to kappa and tau",
    "kappa": "fiber loss rate (with tau)",
    "tau": "photon transfer time (default 1 with kappa_tau)",
    "l": "fiber length (with l0)",
    "l0": "half length, the distance over which the amplitude drops by exp(-1/2)",
    "jitter": "phase model: none, drift (omega * t) or sine (jitter_amplitude * sin(omega * t))",
    "omega": "jitter angular frequency",
    "jitter_amplitude": "sine jitter amplitude in radians",
    "max_attempts": "AFC retry cap; 0 retries without limit",
    "overhead": "extra time between AFC attempts",
    "t0": "start time of the first attempt",
    "f_target": "target fidelity (purify: required; plan: end-to-end; chain: per-segment purification)",
    "step_cap": "purification step cap per pair",
    "barrier": "rebuild the pair when it falls below its first fidelity",
    "n_segments": "segment count (chain: required; plan: optional override)",
    "schedule": "sequential or doubling",
    "connection_quality": "per-connection multiplier on 2F - 1, in [0, 1]",
    "f_working": "plan: working fidelity for the re-purification stand-in",
    "repurify_rate": "plan: exponential purification rate for the stand-in",
    "output_path": "CSV output path",
}

_FIELDS = {f.name: f for f in dataclasses.fields(SimConfig)}
FLOAT_FIELDS = {"kappa_tau", "kappa", "tau", "l", "l0", "omega", "jitter_amplitude", "overhead", "t0",
           "f_target", "connection_quality", "f_working", "repurify_rate"}
INT_FIELDS = {"trials", "seed", "max_attempts", "step_cap", "n_segments"}


def _coerce(name: str, value: Any) -> Any:
    if name in FLOAT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name} must be a number, got {value!r}", name)
        value = float(value)
        if not math.isfinite(value):
            raise ConfigError(f"{name} must be finite", name)
        return value
    if name in INT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name} must be an integer, got {value!r}", name)
        return value
    if name == "barrier":
        if not isinstance(value, bool):
            raise ConfigError(f"barrier must be true or false, got {value!r}", name)
        return value
    if name in ("scenario", "schedule"):
        enum_type = Scenario if name == "scenario" else Schedule
        if isinstance(value, enum_type):
            return value
        try:
            return enum_type(str(value).lower())
        except ValueError:
            choices = ", ".join(e.value for e in enum_type)
            raise ConfigError(f"{name} must be one of {choices}, got {value!r}", name) from None
    if not isinstance(value, str):
        raise ConfigError(f"{name} must be a string, got {value!r}", name)
    return value


def from_mapping(data: Mapping[str, Any]) -> SimConfig:
    unknown = sorted(set(data) - set(_FIELDS))
    if unknown:
        raise ConfigError(f"unknown key {unknown[0]!r}", unknown[0])
    if "scenario" not in data:
        raise ConfigError("missing required key 'scenario'", "scenario")
    return SimConfig(**{k: _coerce(k, v) for k, v in data.items()})


def parse_config(text: str) -> SimConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        msg = getattr(exc, "msg", str(exc))
        raise ConfigParseError(msg, getattr(exc, "lineno", None), getattr(exc, "colno", None)) from None
    nested = [k for k, v in data.items() if isinstance(v, (dict, list))]
    if nested:
        raise ConfigError(f"key {nested[0]!r}: only flat scalar values are allowed", nested[0])
    return from_mapping(data)


def load_config(path: str) -> SimConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _positive(cfg: SimConfig, name: str, allow_zero: bool = False) -> None:
    v = getattr(cfg, name)
    if v is not None and (v < 0 or (v == 0 and not allow_zero)):
        raise ConfigError(f"{name} must be {'non-negative' if allow_zero else 'positive'}, got {v}", name)


def validate(cfg: SimConfig) -> None:
    if cfg.trials < 1:
        raise ConfigError("trials must be >= 1", "trials")
    for name in ("kappa_tau", "kappa", "tau", "l", "l0", "repurify_rate"):
        _positive(cfg, name)
    for name in ("overhead", "max_attempts", "jitter_amplitude"):
        _positive(cfg, name, allow_zero=True)
    if cfg.step_cap < 1:
        raise ConfigError("step_cap must be >= 1", "step_cap")
    if cfg.n_segments is not None and cfg.n_segments < 1:
        raise ConfigError("n_segments must be >= 1", "n_segments")
    if cfg.jitter not in JITTER_MODELS:
        raise ConfigError(f"jitter must be one of {', '.join(JITTER_MODELS)}, got {cfg.jitter!r}", "jitter")
    if not 0.0 <= cfg.connection_quality <= 1.0:
        raise ConfigError("connection_quality must lie in [0, 1]", "connection_quality")
    for name in ("f_target", "f_working"):
        v = getattr(cfg, name)
        if v is not None and not 0.5 < v < 1.0:
            raise ConfigError(f"{name} must lie in (1/2, 1), got {v}", name)
    if (cfg.f_working is None) != (cfg.repurify_rate is None):
        raise ConfigError("f_working and repurify_rate must be given together", "f_working")
    if cfg.seed is not None:
        check_seed(cfg.seed)

    sc = cfg.scenario
    if sc is Scenario.PLAN:
        for name in ("l", "l0"):
            if getattr(cfg, name) is None:
                raise ConfigError(f"plan needs {name}", name)
    if sc is Scenario.PURIFY and cfg.f_target is None:
        raise ConfigError("purify needs f_target", "f_target")
    if sc is Scenario.CHAIN and cfg.n_segments is None:
        raise ConfigError("chain needs n_segments", "n_segments")
    if sc in (Scenario.CHAIN, Scenario.PLAN) and cfg.schedule is Schedule.DOUBLING and cfg.n_segments is not None:
        if cfg.n_segments & (cfg.n_segments - 1):
            raise ConfigError("doubling needs a power-of-two n_segments", "n_segments")
    if sc is not Scenario.PLAN and not any(
        getattr(cfg, k) is not None for k in ("kappa_tau", "kappa", "tau", "l", "l0")
    ):
        raise ConfigError("channel needs kappa_tau, (kappa, tau) or (l, l0)", "kappa_tau")
    if any(getattr(cfg, k) is not None for k in ("kappa_tau", "kappa", "tau", "l", "l0")):
        cfg.channel()
