"""
Run configuration: a JSON document validated by pydantic models.

Unknown keys are rejected everywhere; game parameters are checked against the
registered constructor's parameter table. Errors are raised as ConfigError
with the offending field path and, when it can be located, its line.
"""

import json
import logging
import re
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    StrictBool,
    StrictFloat,
    StrictInt,
    ValidationError,
    field_validator,
    model_validator,
)

from .analyzers.structure import FDConfig
from .errors import ConfigError
from .games import REGISTRY, merge_params

logger = logging.getLogger("eqkit.config")

ANALYSES = (
    "existence",
    "uniqueness_evidence",
    "solve",
    "basins",
    "mixed",
    "correlated",
    "efficiency",
    "normalized_eq",
)
AnalysisName = Literal[
    "existence",
    "uniqueness_evidence",
    "solve",
    "basins",
    "mixed",
    "correlated",
    "efficiency",
    "normalized_eq",
]

# numbers must be JSON numbers, never numeric strings
PositiveNumber = Annotated[StrictFloat, Field(gt=0)]


def _has_string(value: Any) -> bool:
    if isinstance(value, str):
        return True
    if isinstance(value, (list, tuple)):
        return any(_has_string(v) for v in value)
    return False


class GameConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str
    params: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("name")
    @classmethod
    def known_game(cls, value: str) -> str:
        if value not in REGISTRY:
            raise ValueError(f"unknown game {value!r}; available: {', '.join(REGISTRY)}")
        return value

    @model_validator(mode="after")
    def known_params(self) -> "GameConfig":
        unknown = sorted(set(self.params) - set(REGISTRY[self.name].defaults))
        if unknown:
            raise ValueError(
                f"unknown parameter(s) {unknown} for game {self.name!r}; "
                f"accepted: {sorted(REGISTRY[self.name].defaults)}"
            )
        defaults = REGISTRY[self.name].defaults
        quoted = sorted(k for k, v in self.params.items() if _has_string(v) and not isinstance(defaults[k], str))
        if quoted:
            raise ValueError(f"parameter(s) {quoted} for game {self.name!r} must be numbers, not strings")
        return self


class ConstraintConfig(BaseModel):
    """Linear shared constraint sum_i c_i s_i <= total with weights r."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    total: StrictFloat
    weights: Optional[Tuple[PositiveNumber, ...]] = None
    coefficients: Optional[Tuple[StrictFloat, ...]] = None


class Settings(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    grid_points: StrictInt = Field(101, ge=2)
    deviation_points: StrictInt = Field(101, ge=2)
    br_points: StrictInt = Field(101, ge=3)
    br_max_iter: StrictInt = Field(500, ge=1)
    br_tol: PositiveNumber = 1e-6
    simultaneous: StrictBool = False
    start: Optional[Tuple[StrictFloat, ...]] = None
    basin_resolution: StrictInt = Field(21, ge=2)
    basin_deviation_points: StrictInt = Field(21, ge=2)
    basin_workers: StrictInt = Field(1, ge=0)
    fd_step: PositiveNumber = 1e-4
    fd_resolution: StrictInt = Field(9, ge=3)
    fd_pairs: StrictInt = Field(200, ge=1)
    line_points: StrictInt = Field(101, ge=3)
    potential_samples: StrictInt = Field(1000, ge=1)
    standard_samples: StrictInt = Field(100, ge=1)
    alpha_max: StrictFloat = Field(4.0, gt=1.0)
    tolerance: StrictFloat = Field(1e-6, ge=0.0)
    dsc_convention: Literal["rosen", "literal"] = "rosen"
    dsc_weights: Optional[Tuple[PositiveNumber, ...]] = None
    ce_iterations: StrictInt = Field(20000, ge=1)
    max_grid_cells: StrictInt = Field(250_000, ge=1)
    constraint: Optional[ConstraintConfig] = None


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    game: GameConfig
    analyses: Tuple[AnalysisName, ...] = Field(min_length=1)
    seed: StrictInt = 0
    output_dir: str = "eqkit-out"
    settings: Settings = Field(default_factory=Settings)

    @field_validator("game", mode="before")
    @classmethod
    def game_shorthand(cls, value: Any) -> Any:
        return {"name": value} if isinstance(value, str) else value

    def fd_config(self) -> FDConfig:
        s = self.settings
        return FDConfig(
            step=s.fd_step,
            resolution=s.fd_resolution,
            pair_count=s.fd_pairs,
            seed=self.seed,
            line_points=s.line_points,
            tolerance=s.tolerance,
            potential_samples=s.potential_samples,
            standard_samples=s.standard_samples,
            alpha_max=s.alpha_max,
            dsc_convention=s.dsc_convention,
        )

    def game_params(self) -> Dict[str, Any]:
        return merge_params(self.game.name, self.game.params)

    def echo(self) -> Dict[str, Any]:
        """JSON-ready copy that parses back into an equal config."""
        return self.model_dump(mode="json")


def _locate(text: str, key: Union[str, int, None]) -> Optional[int]:
    if not isinstance(key, str):
        return None
    match = re.search(rf'"{re.escape(key)}"\s*:', text)
    if match is None:
        return None
    return text.count("\n", 0, match.start()) + 1


def _field_path(loc: Tuple[Any, ...]) -> str:
    return ".".join(str(part) for part in loc if not str(part).startswith("function-"))


def parse_config(text: str, seed: Optional[int] = None, output_dir: Optional[str] = None) -> RunConfig:
    """Validate a JSON configuration; ``seed`` and ``output_dir`` override the file."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Malformed JSON: {e.msg}", line=e.lineno)
    if not isinstance(data, dict):
        raise ConfigError("The configuration must be a JSON object")
    if seed is not None:
        data["seed"] = seed
    if output_dir is not None:
        data["output_dir"] = output_dir

    try:
        config = RunConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        loc = tuple(first.get("loc", ()))
        named = [part for part in loc if isinstance(part, str) and not part.startswith("function-")]
        raise ConfigError(
            f"{first.get('msg', 'invalid value')} (input: {first.get('input')!r})",
            field=_field_path(loc) or None,
            line=_locate(text, named[-1] if named else None),
        )
    logger.debug(f"Parsed configuration for game {config.game.name} with analyses {list(config.analyses)}")
    return config


def load_config(path: Union[str, Path], seed: Optional[int] = None, output_dir: Optional[str] = None) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read configuration {path}: {e}")
    return parse_config(text, seed=seed, output_dir=output_dir)


def analysis_names() -> List[str]:
    return list(ANALYSES)
