"""Experiment configuration files.

Grammar (one setting per line)::

    # comment
    key = value

A value is read as a JSON literal when it parses as one (numbers, strings in
double quotes, lists, ``true``/``false``/``null``); otherwise it is kept as
a bare string.  Fractions are written as strings, e.g. ``"3/2"`` or bare
``3/2``.  Keys may appear once.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .cayley import GroupSpec, parse_group_expr, parse_group_spec
from .errors import ConfigError

EXPERIMENTS = ("profile", "catalog", "certify", "middle", "exitpoints", "counterexample",
               "lemma-suite")

COMMON_KEYS = {"experiment", "group", "group_file", "radius", "margin", "seed", "node_budget",
               "vertex_budget", "threads", "label"}

EXPERIMENT_KEYS = {
    "profile": {"paths", "start", "grid"},
    "catalog": {"D", "local_params", "weak_morse", "catalog_file"},
    "certify": {"D", "local_params", "weak_morse", "paths", "start", "combing"},
    "middle": {"paths", "start", "t", "c"},
    "exitpoints": {"instances"},
    "counterexample": {"cycle", "D", "weak_morse"},
    "lemma-suite": {"reverse_inclusion", "concatenation", "exit_points", "qg_stay"},
}

NEEDS_GROUP = {"profile", "catalog", "certify", "middle"}


def parse_config_text(text: str) -> dict:
    out: dict = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key.replace("_", "").isalnum():
            raise ConfigError(f"line {n}: bad key {key!r}")
        if key in out:
            raise ConfigError(f"line {n}: duplicate key {key!r}")
        if " #" in value and not value.startswith(("[", "{", '"')):
            value = value.split(" #", 1)[0].strip()
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError:
            out[key] = value
    return out


@dataclass
class ExperimentConfig:
    kind: str
    settings: dict
    group: GroupSpec | None = None
    base_dir: Path = field(default_factory=Path)

    @property
    def seed(self) -> int:
        return int(self.settings.get("seed", 0))

    def get(self, key, default=None):
        return self.settings.get(key, default)

    def echo(self) -> dict:
        return dict(sorted(self.settings.items()))


def _positive_int(settings, key):
    if key in settings:
        v = settings[key]
        if not isinstance(v, int) or isinstance(v, bool) or v <= 0:
            raise ConfigError(f"{key} must be a positive integer")


def load_config(path: str | Path, seed_override: int | None = None) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    return config_from_text(text, path.parent, seed_override)


def config_from_text(text: str, base_dir: Path = Path("."),
                     seed_override: int | None = None) -> ExperimentConfig:
    settings = parse_config_text(text)
    kind = settings.get("experiment")
    if kind not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {', '.join(EXPERIMENTS)}")
    unknown = set(settings) - COMMON_KEYS - EXPERIMENT_KEYS[kind]
    if unknown:
        raise ConfigError(f"unknown keys for {kind}: {', '.join(sorted(unknown))}")
    if seed_override is not None:
        settings["seed"] = seed_override
    seed = settings.setdefault("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
        raise ConfigError("seed must be an integer in [0, 2^64)")
    for key in ("node_budget", "vertex_budget", "threads"):
        _positive_int(settings, key)
    for key in ("radius", "margin"):
        if key in settings and (not isinstance(settings[key], int) or settings[key] < 0):
            raise ConfigError(f"{key} must be a non-negative integer")
    group = None
    if "group" in settings and "group_file" in settings:
        raise ConfigError("give either group or group_file, not both")
    try:
        if "group" in settings:
            group = parse_group_expr(str(settings["group"]))
        elif "group_file" in settings:
            gpath = base_dir / str(settings["group_file"])
            if not gpath.exists():
                raise ConfigError(f"group file {gpath} does not exist")
            group = parse_group_spec(gpath.read_text())
    except ConfigError:
        raise
    except ValueError as err:
        raise ConfigError(f"bad group: {err}") from None
    if kind in NEEDS_GROUP and group is None:
        raise ConfigError(f"{kind} needs group or group_file")
    if kind in NEEDS_GROUP and "radius" not in settings:
        raise ConfigError(f"{kind} needs radius")
    return ExperimentConfig(kind, settings, group, base_dir)
