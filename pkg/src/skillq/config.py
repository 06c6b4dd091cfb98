"""JSON configuration files for the CLI.

A config document holds up to six sections — ``single``, ``multi``,
``reservation``, ``euler``, ``sim``, ``schedule`` — each optional and
validated strictly: unknown keys anywhere are rejected so that typos
fail loudly instead of silently falling back to defaults.  Rates may be
written as numbers or as exact-fraction strings like "2/3".

Three ready-made documents (example1.json .. example3.json) ship with
the package and can be named directly on the command line.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

from .errors import ConfigError, DomainError, SkillqError
from .inversion import DEFAULT_EULER, EulerParams
from .multi_level import MultiLevelParams, ReservationVector
from .single_level import Schedule, Segment, SingleLevelParams

BUNDLED = ("example1.json", "example2.json", "example3.json")

_SINGLE_KEYS = {"lambda", "mu", "theta", "k", "ell", "beta", "gamma"}
_MULTI_KEYS = {"lambda", "mu", "mu_up", "theta", "k", "gamma", "ell", "beta"}
_RESERVATION_KEYS = {"n2", "n3", "n4"}
_EULER_KEYS = {"a_disc", "n_terms", "m_euler"}
_SIM_KEYS = {"policy", "y", "replications", "seed"}
_SEGMENT_KEYS = {"params", "duration"}
_TOP_KEYS = {"single", "multi", "reservation", "euler", "sim", "schedule"}

_POLICIES = ("reservation", "global_fcfs", "delayed_transfer")


def _number(value: Any, where: str) -> float:
    """Accept JSON numbers and exact-fraction strings like "1/3"."""
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(Fraction(value))
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"{where}: cannot parse {value!r} as a number") from None
    raise ConfigError(f"{where}: expected a number, got {type(value).__name__}")


def _integer(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    return value


def _check_keys(section: dict, allowed: set, where: str) -> None:
    if not isinstance(section, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown key {sorted(unknown)[0]!r}")


def _vector(section: dict, key: str, width: int, where: str) -> tuple:
    if key not in section:
        raise ConfigError(f"{where}: missing key {key!r}")
    value = section[key]
    if not isinstance(value, list) or len(value) != width:
        raise ConfigError(f"{where}.{key}: expected a list of {width} entries")
    return tuple(_number(v, f"{where}.{key}[{i}]") for i, v in enumerate(value))


def _single_params(section: dict, where: str) -> SingleLevelParams:
    _check_keys(section, _SINGLE_KEYS, where)
    for key in ("lambda", "mu", "theta", "k", "ell"):
        if key not in section:
            raise ConfigError(f"{where}: missing key {key!r}")
    try:
        return SingleLevelParams(
            lam=_number(section["lambda"], f"{where}.lambda"),
            mu=_number(section["mu"], f"{where}.mu"),
            theta=_number(section["theta"], f"{where}.theta"),
            k=_integer(section["k"], f"{where}.k"),
            ell=_integer(section["ell"], f"{where}.ell"),
            beta=_number(section.get("beta", 0.0), f"{where}.beta"),
            gamma=_number(section.get("gamma", 1.0), f"{where}.gamma"),
        )
    except DomainError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _multi_params(section: dict) -> MultiLevelParams:
    where = "multi"
    _check_keys(section, _MULTI_KEYS, where)
    for key in ("lambda", "mu", "mu_up", "theta", "k", "ell"):
        if key not in section:
            raise ConfigError(f"{where}: missing key {key!r}")
    k = section["k"]
    if not isinstance(k, list) or len(k) != 4:
        raise ConfigError(f"{where}.k: expected a list of 4 entries")
    try:
        return MultiLevelParams(
            lam=_vector(section, "lambda", 4, where),
            mu=_vector(section, "mu", 4, where),
            mu_up=_vector(section, "mu_up", 3, where),
            theta=_vector(section, "theta", 4, where),
            k=tuple(_integer(v, f"{where}.k[{i}]") for i, v in enumerate(k)),
            gamma=_vector(section, "gamma", 4, where) if "gamma" in section else (1.0, 1.0, 1.0, 1.0),
            ell=_integer(section["ell"], f"{where}.ell"),
            beta=_number(section.get("beta", 0.0), f"{where}.beta"),
        )
    except DomainError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


@dataclass(frozen=True)
class SimSettings:
    policy: str
    y: float
    replications: int
    seed: int


@dataclass
class Config:
    """A parsed configuration document."""

    single: SingleLevelParams | None = None
    multi: MultiLevelParams | None = None
    reservation: ReservationVector | None = None
    euler: EulerParams = DEFAULT_EULER
    sim: SimSettings | None = None
    schedule: Schedule | None = None

    def require(self, section: str):
        value = getattr(self, section)
        if value is None:
            raise ConfigError(f"this command needs a {section!r} section in the config file")
        return value


def parse(document: Any) -> Config:
    """Validate a decoded JSON document into a Config."""
    _check_keys(document, _TOP_KEYS, "config")
    cfg = Config()

    if "single" in document:
        cfg.single = _single_params(document["single"], "single")
    if "multi" in document:
        cfg.multi = _multi_params(document["multi"])
    if "reservation" in document:
        section = document["reservation"]
        _check_keys(section, _RESERVATION_KEYS, "reservation")
        try:
            cfg.reservation = ReservationVector(
                n2=_integer(section.get("n2", 0), "reservation.n2"),
                n3=_integer(section.get("n3", 0), "reservation.n3"),
                n4=_integer(section.get("n4", 0), "reservation.n4"),
            )
        except DomainError as exc:
            raise ConfigError(f"reservation: {exc}") from exc
    if "euler" in document:
        section = document["euler"]
        _check_keys(section, _EULER_KEYS, "euler")
        try:
            cfg.euler = EulerParams(
                a_disc=_number(section.get("a_disc", DEFAULT_EULER.a_disc), "euler.a_disc"),
                n_terms=_integer(section.get("n_terms", DEFAULT_EULER.n_terms), "euler.n_terms"),
                m_euler=_integer(section.get("m_euler", DEFAULT_EULER.m_euler), "euler.m_euler"),
            )
        except DomainError as exc:
            raise ConfigError(f"euler: {exc}") from exc
    if "sim" in document:
        section = document["sim"]
        _check_keys(section, _SIM_KEYS, "sim")
        policy = section.get("policy", "reservation")
        if policy not in _POLICIES:
            raise ConfigError(f"sim.policy: expected one of {_POLICIES}, got {policy!r}")
        y = _number(section.get("y", 0.0), "sim.y")
        if y < 0:
            raise ConfigError("sim.y: must be nonnegative")
        replications = _integer(section.get("replications", 2000), "sim.replications")
        if replications < 1:
            raise ConfigError("sim.replications: must be at least 1")
        cfg.sim = SimSettings(
            policy=policy,
            y=y,
            replications=replications,
            seed=_integer(section.get("seed", 0), "sim.seed"),
        )
    if "schedule" in document:
        section = document["schedule"]
        if not isinstance(section, list) or not section:
            raise ConfigError("schedule: expected a nonempty list of segments")
        segments = []
        for i, entry in enumerate(section):
            where = f"schedule[{i}]"
            _check_keys(entry, _SEGMENT_KEYS, where)
            if "params" not in entry or "duration" not in entry:
                raise ConfigError(f"{where}: needs 'params' and 'duration'")
            try:
                segments.append(
                    Segment(
                        params=_single_params(entry["params"], f"{where}.params"),
                        duration=_number(entry["duration"], f"{where}.duration"),
                    )
                )
            except DomainError as exc:
                raise ConfigError(f"{where}: {exc}") from exc
        try:
            cfg.schedule = Schedule(tuple(segments))
        except DomainError as exc:
            raise ConfigError(f"schedule: {exc}") from exc
    return cfg


def load(path_or_name: str) -> Config:
    """Load a config from a path, or from the bundled examples by name."""
    path = Path(path_or_name)
    if path.exists():
        text = path.read_text()
    elif path_or_name in BUNDLED:
        text = resources.files("skillq.data").joinpath(path_or_name).read_text()
    else:
        raise ConfigError(f"config file {path_or_name!r} not found")
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path_or_name}: invalid JSON ({exc})") from exc
    try:
        return parse(document)
    except ConfigError:
        raise
    except SkillqError as exc:
        raise ConfigError(str(exc)) from exc
