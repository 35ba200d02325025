"""Run configuration: flat ``key = value`` files with dotted section keys.

Vectors are comma-separated numbers.  Where a design vector is expected,
``zeros``, ``profile:<name>`` (2-D strip profiles) and ``file:<path>``
(single-column CSV) are accepted as well.  Relative paths resolve against
the directory of the config file.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

import numpy as np

from . import scenarios
from .errors import ConfigError
from .io import config_hash, parse_config_text, read_vector
from .optimize import OptimizeOptions

KNOWN_KEYS = {
    "scenario", "seed", "grid.n",
    "solver.nu", "solver.beta", "solver.cfl", "solver.t_end", "solver.dt_policy",
    "design.initial",
    "target.source", "target.design", "target.dir", "target.modes",
    "objective.kind", "objective.m", "objective.lambda",
    "forward.times", "forward.ic", "forward.design",
    "gradcheck.point", "gradcheck.components", "gradcheck.h", "gradcheck.threshold",
    "gradcheck.workers",
    "optimize.max_iter", "optimize.gtol", "optimize.ftol", "optimize.armijo",
    "optimize.backtrack", "optimize.max_backtracks", "optimize.memory",
}

SCENARIOS = {"burgers1d": scenarios.burgers1d, "burgers2d": scenarios.burgers2d}
CANNED_SUFFIX = ".cfg"


def canned_names():
    root = resources.files("mcfi") / "configs"
    return sorted(p.name[:-len(CANNED_SUFFIX)] for p in root.iterdir()
                  if p.name.endswith(CANNED_SUFFIX))


def resolve_config_path(name):
    """A filesystem path, or the name of one of the shipped example configs."""
    if os.path.exists(name):
        return os.path.abspath(name)
    stem = name[:-len(CANNED_SUFFIX)] if name.endswith(CANNED_SUFFIX) else name
    path = resources.files("mcfi") / "configs" / (stem + CANNED_SUFFIX)
    if path.is_file():
        return str(path)
    raise ConfigError(f"config {name!r} not found (shipped configs: {', '.join(canned_names())})")


def _float(raw, key):
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None


def _int(raw, key):
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def _floats(raw, key):
    try:
        return np.array([float(t) for t in raw.split(",") if t.strip()])
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated numbers, got {raw!r}") from None


@dataclass
class RunConfig:
    values: dict
    base_dir: str = "."
    seed: int = 0
    design: object = None
    grid: object = None
    solver: object = None
    scenario: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_file(cls, path, seed=None):
        path = resolve_config_path(path)
        with open(path) as fh:
            text = fh.read()
        return cls.from_text(text, os.path.dirname(path), seed)

    @classmethod
    def from_text(cls, text, base_dir=".", seed=None):
        try:
            values = parse_config_text(text)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        unknown = sorted(set(values) - KNOWN_KEYS)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        cfg = cls(values, base_dir)
        cfg.seed = seed if seed is not None else _int(values.get("seed", "0"), "seed")
        cfg._build()
        return cfg

    # -- accessors --------------------------------------------------------

    def get(self, key, default=None):
        return self.values.get(key, default)

    def number(self, key, default):
        raw = self.values.get(key)
        return default if raw is None else _float(raw, key)

    def integer(self, key, default):
        raw = self.values.get(key)
        return default if raw is None else _int(raw, key)

    def path(self, raw):
        return raw if os.path.isabs(raw) else os.path.join(self.base_dir, raw)

    @property
    def hash(self):
        return config_hash({**self.values, "seed": self.seed})

    def _build(self):
        name = self.values.get("scenario")
        if name not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {sorted(SCENARIOS)}, got {name!r}")
        self.scenario = name
        overrides = {}
        for k in ("nu", "beta", "cfl", "t_end"):
            if f"solver.{k}" in self.values:
                overrides[k] = self.number(f"solver.{k}", None)
        if "solver.dt_policy" in self.values:
            overrides["dt_policy"] = self.values["solver.dt_policy"]
        kw = {}
        if "grid.n" in self.values:
            kw["n"] = self.integer("grid.n", None)
        try:
            self.design, self.grid, self.solver = SCENARIOS[name](**kw, **overrides)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def design_vector(self, key, default="zeros"):
        """Parse a design-vector valued key."""
        raw = self.values.get(key, default)
        if raw is None:
            raise ConfigError(f"{key} is required")
        raw = raw.strip()
        n = self.design.n_vars
        if raw == "zeros":
            x = np.zeros(n)
        elif raw.startswith("profile:"):
            if self.scenario != "burgers2d":
                raise ConfigError(f"{key}: profiles are defined for the 2-D strips only")
            x = scenarios.strip_profile(raw.split(":", 1)[1].strip(), self.design)
        elif raw.startswith("file:"):
            p = self.path(raw.split(":", 1)[1].strip())
            if not os.path.exists(p):
                raise ConfigError(f"{key}: file {p} does not exist")
            x = read_vector(p)
        else:
            x = _floats(raw, key)
        if x.shape != (n,):
            raise ConfigError(f"{key}: expected {n} values, got {x.size}")
        return x

    def vector(self, key, default=None):
        raw = self.values.get(key)
        return default if raw is None else _floats(raw, key)

    def components(self, key="gradcheck.components"):
        """0-based indices from a 1-based list, or None for all components."""
        raw = self.values.get(key, "all").strip()
        if raw == "all":
            return None
        idx = [_int(t.strip(), key) - 1 for t in raw.split(",") if t.strip()]
        bad = [i + 1 for i in idx if not 0 <= i < self.design.n_vars]
        if bad:
            raise ConfigError(f"{key}: component(s) {bad} out of range 1..{self.design.n_vars}")
        return idx

    def optimize_options(self):
        d = OptimizeOptions()
        try:
            return OptimizeOptions(
                max_iter=self.integer("optimize.max_iter", d.max_iter),
                gtol=self.number("optimize.gtol", d.gtol),
                ftol=self.number("optimize.ftol", d.ftol),
                armijo=self.number("optimize.armijo", d.armijo),
                backtrack=self.number("optimize.backtrack", d.backtrack),
                max_backtracks=self.integer("optimize.max_backtracks", d.max_backtracks),
                memory=self.integer("optimize.memory", d.memory))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def objective_kind(self):
        return self.values.get("objective.kind", "quadratic_mode")

    @property
    def objective_m(self):
        return self.integer("objective.m", 1)

    @property
    def objective_lambda(self):
        return self.number("objective.lambda", 1.0)

    @property
    def target_source(self):
        src = self.values.get("target.source", "design")
        if src not in ("design", "file"):
            raise ConfigError(f"target.source must be 'design' or 'file', got {src!r}")
        return src

    @property
    def target_dir(self) -> Optional[str]:
        raw = self.values.get("target.dir")
        return None if raw is None else self.path(raw)
