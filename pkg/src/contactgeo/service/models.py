"""Request and response schemas of the analysis service.

Structure documents mirror the JSON input format:
{"chart": {"coords": [...], "domain": {coord: [lo, hi]}, "excluded": [...]},
 "frame": [[expr, ...], ...], "signature": [1, -1, ...], "tasks": [...]}
with expressions in the engine grammar.
"""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from ..symexpr import DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_TOLERANCE

ENGINE_VERSION = "0.1.0"


class ChartModel(BaseModel):
    coords: list[str] = Field(min_length=2)
    domain: dict[str, tuple[float, float]] = Field(default_factory=dict)
    excluded: list[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _domain_keys(self):
        unknown = set(self.domain) - set(self.coords)
        if unknown:
            raise ValueError(f"domain lists unknown coordinates {sorted(unknown)}")
        return self


class TaskModel(BaseModel):
    model_config = {"extra": "allow"}

    task: str


class StructureDoc(BaseModel):
    chart: ChartModel
    frame: list[list[str]] = Field(min_length=2)
    signature: list[int]
    tasks: list[TaskModel] = Field(default_factory=list)

    @field_validator("signature")
    @classmethod
    def _signs(cls, v):
        if any(s not in (-1, 1) for s in v):
            raise ValueError("signature entries must be +1 or -1")
        return v

    @model_validator(mode="after")
    def _shape(self):
        d = len(self.chart.coords)
        for row in self.frame:
            if len(row) != d:
                raise ValueError("each frame field needs one component per coordinate")
        if len(self.signature) != len(self.frame):
            raise ValueError("signature length must match the frame length")
        return self


class EngineSettings(BaseModel):
    seed: int = DEFAULT_SEED
    samples: int = Field(default=DEFAULT_SAMPLES, ge=1)
    tol: float = Field(default=DEFAULT_TOLERANCE, gt=0)


class StructureSelector(EngineSettings):
    structure: Optional[StructureDoc] = None
    builtin: Optional[str] = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.structure is None) == (self.builtin is None):
            raise ValueError("provide exactly one of 'structure' or 'builtin'")
        return self


class InvariantsRequest(StructureSelector):
    pass


class CurvatureRequest(StructureSelector):
    c: str = "1"


class EWRequest(StructureSelector):
    epsilon: str = "0"
    c: Optional[str] = None

    @model_validator(mode="after")
    def _allow_family(self):
        # The coordinate deformation family is metric data, not a frame
        # structure; it is addressed as a pseudo-builtin.
        return self


class MapSpec(BaseModel):
    components: list[str]
    inverse: list[str]


class IsometryRequest(StructureSelector):
    map: Optional[MapSpec] = None
    translation: Optional[list[str]] = None
    family_case: Optional[Literal[1, 2, 3]] = None
    family_index: Optional[str] = None
    theta: str = "1"
    include_algebra: bool = True
    include_frequencies: bool = True

    @model_validator(mode="after")
    def _mode(self):
        chosen = [
            x is not None for x in (self.map, self.translation, self.family_case)
        ]
        if sum(chosen) != 1:
            raise ValueError(
                "provide exactly one of 'map', 'translation' or 'family_case'"
            )
        return self


class LiftRequest(EngineSettings):
    coords: list[str] = Field(min_length=2)
    domain: dict[str, tuple[float, float]] = Field(default_factory=dict)
    excluded: list[str] = Field(default_factory=list)
    frame: list[list[str]]
    signature: list[int]
    theta: list[str]
    fibre_coord: str = "z"


class SelftestRequest(EngineSettings):
    criteria: Optional[list[str]] = None


class VerdictModel(BaseModel):
    kind: str
    max_abs: Optional[float] = None
    witness_point: Optional[dict[str, float]] = None
    witness_value: Optional[float] = None
    samples_used: int = 0

    @classmethod
    def from_zero(cls, v) -> "VerdictModel":
        return cls(
            kind=v.kind,
            max_abs=v.max_abs,
            witness_point=v.witness_point,
            witness_value=v.witness_value,
            samples_used=v.samples_used,
        )


class Report(BaseModel):
    task: str
    engine_version: str = ENGINE_VERSION
    seed: int
    samples: int
    tolerance: float
    ok: bool
    failures: list[str] = Field(default_factory=list)
    results: dict[str, Any] = Field(default_factory=dict)
    timing_ms: Optional[float] = None


class BatchReport(BaseModel):
    task: str = "batch"
    engine_version: str = ENGINE_VERSION
    ok: bool
    reports: list[Report]
