"""Run configuration: pydantic schema plus YAML/JSON loading with line-anchored errors.

Schema version 1::

    schema_version: 1
    task: solve                 # solve | check-classes | obstacle-demo | residual-scan
    seed: 0                     # optional; falls back to $VIMO_SEED, then 0
    instance:
      dim: 1
      operator: {kind: identity}
      phi: {kind: l1, weight: 1.0}
      K: {kind: whole}
      f: [2.0]
    solver: {method: extragradient, tol: 1.0e-7}
    checks: {battery: [monotone]}
    obstacle: {dimension: 1, nodes: 17, coefficients: {kind: constant}, f: -1.0}
    scan: {points: [[0.0], [1.0]]}
    output: {records: out.jsonl, csv: trace.csv}
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

SCHEMA_VERSION = 1
SEED_ENV = "VIMO_SEED"

Vec = list[float]


class ConfigError(Exception):
    """Schema or usage error; the message carries the file position when known."""


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


OperatorKind = Literal[
    "identity", "negative_identity", "linear", "rotation", "constant", "power", "cubic", "constant_box",
    "abs_subdifferential", "ball", "finite_set", "step", "reciprocal", "sum", "scaled",
]


class OperatorConfig(_Model):
    kind: OperatorKind
    matrix: Optional[list[Vec]] = None
    angle: Optional[float] = None
    value: Optional[Vec] = None
    p: Optional[float] = None
    lo: Optional[Vec] = None
    hi: Optional[Vec] = None
    center: Optional[Vec] = None
    radius: Optional[float] = Field(default=None, ge=0)
    points: Optional[list[Vec]] = None
    terms: Optional[list["OperatorConfig"]] = None
    scale: Optional[float] = None
    of: Optional["OperatorConfig"] = None

    @model_validator(mode="after")
    def _required(self):
        need = {"linear": ["matrix"], "constant": ["value"], "power": ["p"], "constant_box": ["lo", "hi"],
                "ball": ["center", "radius"], "finite_set": ["points"], "sum": ["terms"],
                "scaled": ["scale", "of"]}.get(self.kind, [])
        missing = [k for k in need if getattr(self, k) is None]
        if missing:
            raise ValueError(f"operator kind {self.kind!r} needs {', '.join(missing)}")
        return self


class PhiConfig(_Model):
    kind: Literal["zero", "l1", "half_squared", "hinge", "box_indicator"] = "zero"
    weight: float = Field(default=1.0, ge=0)
    lo: Optional[Vec] = None
    hi: Optional[Vec] = None


class SetConfig(_Model):
    kind: Literal["whole", "box", "ball", "polytope"] = "whole"
    lo: Optional[Vec] = None
    hi: Optional[Vec] = None
    center: Optional[Vec] = None
    radius: Optional[float] = Field(default=None, gt=0)
    G: Optional[list[Vec]] = None
    h: Optional[Vec] = None

    @model_validator(mode="after")
    def _required(self):
        need = {"box": ["lo", "hi"], "ball": ["center", "radius"], "polytope": ["G", "h"]}.get(self.kind, [])
        missing = [k for k in need if getattr(self, k) is None]
        if missing:
            raise ValueError(f"set kind {self.kind!r} needs {', '.join(missing)}")
        return self


class InstanceConfig(_Model):
    dim: int = Field(ge=1)
    operator: OperatorConfig
    phi: PhiConfig = PhiConfig()
    K: SetConfig = SetConfig()
    f: Vec
    name: str = "instance"


class SolverConfig(_Model):
    method: Literal["extragradient", "lift", "galerkin", "truncation"] = "extragradient"
    tol: float = Field(default=1e-7, gt=0)
    step: float = Field(default=0.1, gt=0)
    max_iter: int = Field(default=10000, ge=1)
    probes: int = Field(default=256, ge=0)
    y0: Optional[Vec] = None
    radii: Optional[Vec] = None
    strides: Optional[list[int]] = None


class ModulusConfig(_Model):
    kind: Literal["zero", "power"] = "zero"
    exponent: float = 2.0
    scale: float = 1.0


CheckName = Literal["monotone", "semibounded_variation", "radial_semicontinuity", "coercivity",
                    "local_boundedness", "pseudomonotone_implication"]


class ChecksConfig(_Model):
    battery: list[CheckName] = ["monotone"]
    modulus: ModulusConfig = ModulusConfig()
    R: Optional[float] = Field(default=None, gt=0)
    pairs: int = Field(default=200, ge=1)
    triples: int = Field(default=40, ge=1)
    radius: float = Field(default=1.0, gt=0)
    y0: Optional[Vec] = None


class CoefficientConfig(_Model):
    kind: Literal["constant", "default"] = "constant"
    value: float = Field(default=1.0, gt=0)
    p: float = 2.0


class ObstacleConfig(_Model):
    dimension: Literal[1, 2] = 1
    nodes: int = Field(default=17, ge=3)
    coefficients: CoefficientConfig = CoefficientConfig()
    f: Union[float, Vec] = -1.0
    include_nonsmooth: Optional[bool] = None
    galerkin: bool = False
    strides: list[int] = [8, 4, 2, 1]
    complementarity_tol: float = Field(default=1e-5, gt=0)


class ScanConfig(_Model):
    points: Optional[list[Vec]] = None
    lo: Optional[Vec] = None
    hi: Optional[Vec] = None
    count: int = Field(default=5, ge=1)

    @model_validator(mode="after")
    def _one(self):
        if self.points is None and (self.lo is None or self.hi is None):
            raise ValueError("scan needs either points or lo and hi")
        return self


class OutputConfig(_Model):
    records: Optional[str] = None
    csv: Optional[str] = None
    format: Literal["table", "records", "csv"] = "table"


Task = Literal["solve", "check-classes", "obstacle-demo", "residual-scan"]


class RunConfig(_Model):
    schema_version: Literal[1]
    task: Task
    seed: Optional[int] = Field(default=None, ge=0)
    instance: Optional[InstanceConfig] = None
    solver: SolverConfig = SolverConfig()
    checks: ChecksConfig = ChecksConfig()
    obstacle: ObstacleConfig = ObstacleConfig()
    scan: Optional[ScanConfig] = None
    output: OutputConfig = OutputConfig()

    @model_validator(mode="after")
    def _task_needs(self):
        if self.task in ("solve", "check-classes", "residual-scan") and self.instance is None:
            raise ValueError(f"task {self.task!r} needs an instance")
        if self.task == "residual-scan" and self.scan is None:
            raise ValueError("task 'residual-scan' needs a scan block")
        return self

    def resolved_seed(self) -> int:
        if self.seed is not None:
            return self.seed
        env = os.environ.get(SEED_ENV)
        if env is None:
            return 0
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV}={env!r} is not an integer") from exc


# ---------------------------------------------------------------------------
# loading


def _node_at(node, loc):
    """Follow a pydantic error location through a composed YAML node tree."""
    for key in loc:
        if isinstance(node, yaml.MappingNode):
            nxt = None
            for k, v in node.value:
                if k.value == str(key):
                    nxt = v
                    break
            if nxt is None:
                return node
            node = nxt
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
        else:
            return node
    return node


def _format_errors(exc: ValidationError, root, path) -> str:
    lines = []
    for err in exc.errors():
        loc = tuple(err["loc"])
        where = ".".join(str(p) for p in loc) or "<root>"
        pos = ""
        if root is not None:
            mark = _node_at(root, loc).start_mark
            pos = f"line {mark.line + 1}, column {mark.column + 1}: "
        lines.append(f"{path}: {pos}{where}: {err['msg']}")
    return "\n".join(lines)


def parse_config(text: str, path: str = "<config>") -> RunConfig:
    """Parse YAML or JSON text (JSON is a YAML subset) into a :class:`RunConfig`."""
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        pos = f"line {mark.line + 1}, column {mark.column + 1}: " if mark is not None else ""
        raise ConfigError(f"{path}: {pos}cannot parse: {getattr(exc, 'problem', exc)}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: line 1: top level must be a mapping")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc, root, path)) from exc


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read: {exc.strerror}") from exc
    return parse_config(text, str(path))


def schema_json() -> str:
    """JSON schema of the configuration, for documentation."""
    return json.dumps(RunConfig.model_json_schema(), indent=2, sort_keys=True)
