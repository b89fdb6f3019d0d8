"""JSON experiment configuration, validated with pydantic.

Every key is checked before any computation; unknown keys are rejected and
all defaults are materialised so the canonical form can be echoed into the
report.
"""
from __future__ import annotations

import dataclasses
import json
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, create_model, field_validator, model_validator

from .asymptotics import Thresholds
from .trigpoly import NAMED_SYMBOLS, TrigPolynomial

KINDS = (
    "model-spectrum",
    "landau-levels",
    "toeplitz-spectrum",
    "bochner-sweep",
    "toeplitz-sweep",
    "localization",
    "algebra-defects",
)
Kind = Literal[
    "model-spectrum",
    "landau-levels",
    "toeplitz-spectrum",
    "bochner-sweep",
    "toeplitz-sweep",
    "localization",
    "algebra-defects",
]


class ConfigError(ValueError):
    """Configuration could not be read or failed validation."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class Coefficient(_Strict):
    k: tuple[int, int]
    re: float
    im: float = 0.0


def _coeff_dict(coeffs: list[Coefficient]) -> dict[tuple[int, int], complex]:
    out: dict[tuple[int, int], complex] = {}
    for c in coeffs:
        out[c.k] = out.get(c.k, 0j) + complex(c.re, c.im)
    return out


class FieldSpec(_Strict):
    family: Optional[Literal["constant", "single_well", "double_well", "custom"]] = None
    m: int = Field(1, strict=True, ge=1)
    epsilon: float = Field(0.1, ge=0.0)
    coefficients: Optional[list[Coefficient]] = None

    @model_validator(mode="after")
    def _family_or_coefficients(self):
        if self.coefficients is not None and self.family not in (None, "custom"):
            raise ValueError("'family' and 'coefficients' are mutually exclusive")
        if self.family is None:
            self.family = "custom" if self.coefficients is not None else "constant"
        if self.family == "custom" and not self.coefficients:
            raise ValueError("custom field requires 'coefficients'")
        return self

    def build(self):
        from .torus import build_field

        coeffs = _coeff_dict(self.coefficients) if self.coefficients else None
        return build_field(self.family, self.m, self.epsilon, coeffs)


class SymbolSpec(_Strict):
    name: Optional[str] = None
    coefficients: Optional[list[Coefficient]] = None

    @model_validator(mode="after")
    def _one_of(self):
        if (self.name is None) == (self.coefficients is None):
            raise ValueError("a symbol needs exactly one of 'name' or 'coefficients'")
        if self.name is not None and self.name not in NAMED_SYMBOLS:
            raise ValueError(f"unknown symbol {self.name!r}; known: {sorted(NAMED_SYMBOLS)}")
        return self

    def build(self) -> TrigPolynomial:
        if self.name is not None:
            return NAMED_SYMBOLS[self.name]()
        return TrigPolynomial.from_dict(_coeff_dict(self.coefficients))


def _symbol(value):
    return {"name": value} if isinstance(value, str) else value


class WellSpec(_Strict):
    Q: list[list[float]] = [[1.0, 0.0], [0.0, 1.0]]
    a: list[float] = [1.0]
    shift: float = 0.0
    label: Optional[str] = None


class GridSpec(_Strict):
    override: Optional[int] = Field(None, ge=8)
    order: Literal[2, 4, 6, 8] = 4
    refine: bool = True


class LocalizationSpec(_Strict):
    deltas: list[float] = [0.1, 0.2, 0.3]
    alphas: list[float] = [0.25, 0.5]
    moment_orders: list[int] = [1, 2]
    check_delta: float = 0.2
    degenerate_k: Optional[int] = Field(None, ge=1)
    c_list: list[float] = [0.0, 0.25, 0.5]
    kernel_decay: bool = False
    decay_pairs: int = Field(400, ge=10)


ThresholdSpec = create_model(
    "ThresholdSpec",
    __config__=ConfigDict(extra="forbid"),
    **{f.name: (type(f.default), f.default) for f in dataclasses.fields(Thresholds)},
)


class ExperimentConfig(_Strict):
    kind: Kind
    field: FieldSpec = FieldSpec()
    p: list[int] = []
    levels: int = Field(4, ge=1)
    grid: GridSpec = GridSpec()
    h: SymbolSpec = SymbolSpec(name="well")
    f: SymbolSpec = SymbolSpec(name="cos_x1")
    g: SymbolSpec = SymbolSpec(name="cos_x2")
    wells: list[WellSpec] = [WellSpec()]
    localization: LocalizationSpec = LocalizationSpec()
    thresholds: ThresholdSpec = ThresholdSpec()  # type: ignore[valid-type]
    seed: int = 0
    output: Optional[str] = None

    @model_validator(mode="before")
    @classmethod
    def _shorthands(cls, data):
        if not isinstance(data, dict):
            return data
        data = dict(data)
        fld = data.get("field")
        if isinstance(fld, str):
            fld = {"family": fld}
            for key in ("m", "epsilon"):
                if key in data:
                    fld[key] = data.pop(key)
            data["field"] = fld
        for key in ("h", "f", "g"):
            if key in data:
                data[key] = _symbol(data[key])
        return data

    @field_validator("p")
    @classmethod
    def _positive_p(cls, v):
        if any(p < 1 for p in v):
            raise ValueError("every p must be a positive integer")
        return sorted(v)

    def thresholds_obj(self) -> Thresholds:
        return Thresholds(**self.thresholds.model_dump())

    def canonical(self) -> dict:
        return self.model_dump(mode="json")


def _format_errors(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        loc = ".".join(str(x) for x in err["loc"]) or "<root>"
        lines.append(f"{loc}: {err['msg']}")
    return "; ".join(lines)


def parse_config_data(data: dict, kind: str | None = None) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    data = dict(data)
    if kind is not None:
        if data.setdefault("kind", kind) != kind:
            raise ConfigError(f"config kind {data['kind']!r} does not match subcommand {kind!r}")
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc)) from None


def parse_config(path, kind: str | None = None) -> ExperimentConfig:
    """Read and validate a JSON config file; errors name the offending key path."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return parse_config_data(data, kind)

