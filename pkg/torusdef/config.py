"""Run configurations: one YAML/JSON document per run, discriminated on ``mode``."""

import importlib.resources
import os
from functools import cached_property
from pathlib import Path
from typing import Annotated, Literal, NamedTuple

import yaml
from pydantic import BaseModel, Field, TypeAdapter, ValidationError, field_validator
from sympy import isprime

from torusdef.defring import GroupSpec, LatticeSpec, LocalFieldPreset, build_group
from torusdef.errors import ConfigError
from torusdef.extmodel import DEFAULT_BUDGET
from torusdef.gmod import FiniteGroup, GModule, TwoCocycle
from torusdef.intlin import FgAbGroup, identity

WORKERS_ENV = "TORUSDEF_WORKERS"

Matrix = list[list[int]]


def resolve_workers(workers: int | None) -> int:
    """Explicit count, else $TORUSDEF_WORKERS, else 1"""
    if workers is not None:
        return max(1, workers)
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError as e:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from e
    return 1


class ModuleSpec(BaseModel):
    """A = sum of Z/f over invariant_factors (0 stands for Z) with a G-action"""

    invariant_factors: list[int]
    action: Literal["trivial"] | list[Matrix]

    @field_validator("invariant_factors")
    @classmethod
    def _non_negative(cls, v: list[int]) -> list[int]:
        if any(f < 0 for f in v):
            raise ValueError("invariant factors must be non-negative")
        return v

    def build(self, group: FiniteGroup) -> GModule:
        n = len(self.invariant_factors)
        underlying = FgAbGroup.from_invariants(self.invariant_factors)
        if self.action == "trivial":
            return GModule(group, underlying, [identity(n)] * group.order)
        if len(self.action) != group.order:
            raise ConfigError(f"a.action needs {group.order} matrices, got {len(self.action)}")
        for g, mat in enumerate(self.action):
            if len(mat) != n or any(len(row) != n for row in mat):
                raise ConfigError(f"a.action[{g}] must be {n}x{n}")
        return GModule(group, underlying, self.action)


class AbstractInputs(NamedTuple):
    delta: FiniteGroup
    a_module: GModule
    kappa: TwoCocycle
    lattice: GModule


class AbstractConfig(BaseModel):
    mode: Literal["abstract"]
    delta: GroupSpec
    a: ModuleSpec
    kappa: list[list[list[int]]]
    lattice: LatticeSpec
    p: int
    coefficient_moduli: list[int] = Field(default_factory=list)
    budget: int = DEFAULT_BUDGET
    workers: int | None = None

    @field_validator("p")
    @classmethod
    def _prime(cls, v: int) -> int:
        if not isprime(v):
            raise ValueError(f"{v} is not a prime")
        return v

    @field_validator("coefficient_moduli")
    @classmethod
    def _moduli(cls, v: list[int]) -> list[int]:
        if any(n < 2 for n in v):
            raise ValueError("coefficient moduli must be at least 2")
        return v

    def worker_count(self) -> int:
        return resolve_workers(self.workers)

    @cached_property
    def inputs(self) -> AbstractInputs:
        delta = build_group(self.delta)
        a_module = self.a.build(delta)
        n = a_module.ambient_rank
        o = delta.order
        if len(self.kappa) < o:
            raise ConfigError(f"kappa is missing the pair ({len(self.kappa)}, 0)")
        if len(self.kappa) > o:
            raise ConfigError(f"kappa has {len(self.kappa)} rows, the group has {o} elements")
        for d, row in enumerate(self.kappa):
            if len(row) < o:
                raise ConfigError(f"kappa is missing the pair ({d}, {len(row)})")
            if len(row) > o:
                raise ConfigError(f"kappa row {d} has {len(row)} entries, expected {o}")
            for c, value in enumerate(row):
                if len(value) != n:
                    raise ConfigError(
                        f"kappa({d}, {c}) needs {n} coordinates, got {len(value)}"
                    )
        kappa = TwoCocycle(a_module, self.kappa)
        kappa.require_valid()
        return AbstractInputs(delta, a_module, kappa, self.lattice.build(delta))

    def check(self) -> None:
        self.inputs  # noqa: B018


class LocalConfig(LocalFieldPreset):
    mode: Literal["local"]

    def check(self) -> None:
        pass


class VerifyConfig(BaseModel):
    mode: Literal["verify"]
    grid: Literal["small", "full"] = "small"
    budget: int = DEFAULT_BUDGET
    seed: int = 0
    workers: int | None = None

    def check(self) -> None:
        if self.budget < 1:
            raise ConfigError("budget must be positive")

    def worker_count(self) -> int:
        return resolve_workers(self.workers)


class ComponentsConfig(BaseModel):
    mode: Literal["components"]
    mu: list[int]
    basepoint: bool = False

    def check(self) -> None:
        pass


Config = Annotated[
    AbstractConfig | LocalConfig | VerifyConfig | ComponentsConfig,
    Field(discriminator="mode"),
]

_ADAPTER: TypeAdapter[Config] = TypeAdapter(Config)


def _describe(e: ValidationError) -> str:
    lines = []
    for err in e.errors():
        loc = ".".join(str(part) for part in err["loc"]) or "<root>"
        lines.append(f"{loc}: {err['msg']}")
    return "Invalid config:\n  " + "\n  ".join(lines)


def parse_config(text: str) -> Config:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"Config is not valid YAML/JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError("Config must be a mapping with a 'mode' field")
    try:
        config = _ADAPTER.validate_python(data)
    except ValidationError as e:
        raise ConfigError(_describe(e)) from e
    config.check()
    return config


def load_config(path: Path) -> Config:
    return parse_config(path.read_text())


def list_presets() -> dict[str, str]:
    """Bundled preset name -> mode"""
    presets = {}
    for entry in importlib.resources.files("torusdef.data.presets").iterdir():
        path = Path(str(entry))
        if path.suffix == ".yaml":
            data = yaml.safe_load(entry.read_text())
            presets[path.stem] = data.get("mode", "?")
    return dict(sorted(presets.items()))


def load_preset(name: str) -> Config:
    entry = importlib.resources.files("torusdef.data.presets").joinpath(f"{name}.yaml")
    if not entry.is_file():
        raise ConfigError(f"Preset '{name}' not found. Available: {list(list_presets())}")
    return parse_config(entry.read_text())
