"""Run configuration: JSON with sections grid, family, sampler, inequality, tolerances."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, asdict
from pathlib import Path

from ..exceptions import ConfigurationError
from ..field import Grid
from ..geometry import SamplerPolicy
from .domain import DomainFamily, omega_grid
from .families import FunctionFamily
from .inequalities import LabOptions

__all__ = ["RunConfig", "load_config", "parse_grid", "parse_box", "SECTIONS"]

SECTIONS = ("grid", "family", "sampler", "inequality", "tolerances", "domain")

DEFAULT_TOLERANCES = {
    "drift": 0.25,
    "dilation_factor": 2.0,
    "held_out_margin": 1.5,
    "held_out_count": 50,
    "held_out_seed_offset": 1000,
    "mt2ato": 1e-8,
    "lemma5.1": 1e-8,
}


def parse_grid(text: str) -> tuple[int, ...]:
    """``"256x256"`` -> ``(256, 256)``."""
    try:
        dims = tuple(int(p) for p in str(text).lower().split("x"))
    except ValueError as exc:
        raise ConfigurationError(f"bad grid spec {text!r}; expected NxM[xK...]") from exc
    if len(dims) < 2 or min(dims) < 2:
        raise ConfigurationError(f"bad grid spec {text!r}; need >= 2 axes of >= 2 points")
    return dims


def parse_box(text: str, ndim: int) -> tuple[tuple, tuple]:
    """``"-8,8,-2,2"`` (lower, upper per axis) -> ``((-8,-2), (8,2))``."""
    try:
        v = [float(p) for p in str(text).split(",")]
    except ValueError as exc:
        raise ConfigurationError(f"bad box spec {text!r}") from exc
    if len(v) != 2 * ndim:
        raise ConfigurationError(f"box needs {2 * ndim} numbers (lo,hi per axis), got {len(v)}")
    lo, hi = tuple(v[0::2]), tuple(v[1::2])
    if any(a >= b for a, b in zip(lo, hi)):
        raise ConfigurationError("box lower bounds must be below upper bounds")
    return lo, hi


def _build(cls, section: dict, name: str):
    known = {f.name for f in fields(cls)}
    unknown = set(section) - known
    if unknown:
        raise ConfigurationError(f"unknown keys in [{name}]: {', '.join(sorted(unknown))}")
    kw = {k: tuple(v) if isinstance(v, list) else v for k, v in section.items()}
    try:
        return cls(**kw)
    except TypeError as exc:
        raise ConfigurationError(f"bad [{name}] section: {exc}") from exc


@dataclass
class RunConfig:
    grid: dict = field(default_factory=lambda: {"dims": [256, 256], "lower": [-8.0, -2.0],
                                                "upper": [8.0, 2.0], "anisotropy": "parabolic"})
    family: dict = field(default_factory=dict)
    sampler: dict = field(default_factory=dict)
    inequality: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    domain: dict = field(default_factory=lambda: {"points": 65, "T": 1.0})
    seed: int | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        unknown = set(d) - set(SECTIONS) - {"seed"}
        if unknown:
            raise ConfigurationError(f"unknown config sections: {', '.join(sorted(unknown))}")
        cfg = cls()
        for k in SECTIONS:
            if k in d:
                if not isinstance(d[k], dict):
                    raise ConfigurationError(f"config section {k!r} must be an object")
                getattr(cfg, k).update(d[k]) if k in ("grid", "domain") else setattr(cfg, k, dict(d[k]))
        cfg.seed = d.get("seed")
        cfg.make_grid()
        cfg.make_family()
        cfg.make_options()
        return cfg

    def as_dict(self) -> dict:
        return asdict(self)

    # --- builders --------------------------------------------------------

    def make_grid(self) -> Grid:
        g = self.grid
        dims = tuple(int(x) for x in g["dims"])
        if len(g["lower"]) != len(dims) or len(g["upper"]) != len(dims):
            raise ConfigurationError("grid lower/upper must match dims")
        return Grid.regular(dims, g["lower"], g["upper"], g.get("anisotropy", "parabolic"),
                            periodic=bool(g.get("periodic", True)))

    def make_domain_grid(self) -> Grid:
        n = len(self.grid["dims"]) - 1
        return omega_grid(n, float(self.domain.get("T", 1.0)), int(self.domain.get("points", 65)),
                          self.grid.get("anisotropy", "parabolic"))

    def make_family(self) -> FunctionFamily:
        fam = dict(self.family)
        if self.seed is not None:
            fam["seed"] = int(self.seed)
        return _build(FunctionFamily, fam, "family")

    def make_domain_family(self, count: int | None = None) -> DomainFamily:
        d = {k: v for k, v in self.domain.items() if k not in ("points",)}
        d.setdefault("n", len(self.grid["dims"]) - 1)
        if self.seed is not None:
            d["seed"] = int(self.seed)
        elif "seed" in self.family:
            d.setdefault("seed", int(self.family["seed"]))
        if count is not None:
            d["count"] = count
        return _build(DomainFamily, d, "domain")

    def make_policy(self) -> SamplerPolicy:
        pol = dict(self.sampler)
        if self.seed is not None:
            pol["seed"] = int(self.seed)
        return _build(SamplerPolicy, pol, "sampler")

    def make_options(self) -> LabOptions:
        ineq = dict(self.inequality)
        ineq["policy"] = self.make_policy()
        tol = self.tol
        ineq.setdefault("mt2ato_tol", tol["mt2ato"])
        ineq.setdefault("lemma51_tol", tol["lemma5.1"])
        opt = _build(LabOptions, ineq, "inequality")
        if opt.m < 1 or not 0 < opt.gamma <= 1:
            raise ConfigurationError("need m >= 1 and gamma in (0, 1]")
        return opt

    @property
    def tol(self) -> dict:
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigurationError(f"unknown tolerances: {', '.join(sorted(unknown))}")
        return {**DEFAULT_TOLERANCES, **self.tolerances}


def load_config(path) -> RunConfig:
    """Reads a JSON config file."""
    p = Path(path)
    try:
        data = json.loads(p.read_text())
    except FileNotFoundError as exc:
        raise ConfigurationError(f"config file not found: {p}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigurationError("config root must be a JSON object")
    return RunConfig.from_dict(data)
