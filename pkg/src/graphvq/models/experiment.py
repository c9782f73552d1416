"""Experiment configuration - what the benchmark harness runs"""

from pathlib import Path
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from .build_config import CalibrationSpec, SequenceConfig, SyntheticVocabSpec
from .search_params import MethodSpec

FeatureSubset = Literal["all", "matched"]
HintSource = Literal["none", "truth", "ratio"]

# grid values per parameter name; None means "unset" (e.g. T = local minimum)
ParamGrid = Dict[str, List[Optional[int]]]


class ExperimentConfig(BaseModel):
    """
    One benchmark experiment: a vocabulary, a frame sequence, the methods to
    compare and the parameter grids to sweep them over.

    Vocabulary and sequence come either from files (vocab_path, dataset_path) or
    from embedded synthetic recipes (synthetic_vocab, sequence), so a preset can
    be fully self-contained.
    """

    id: str = Field(..., description="Unique identifier for this experiment")
    name: str = Field(..., description="Human-readable name")
    description: Optional[str] = None

    # Vocabulary source
    vocab_path: Optional[Path] = None
    synthetic_vocab: Optional[SyntheticVocabSpec] = None

    # Sequence source
    dataset_path: Optional[Path] = None
    sequence: Optional[SequenceConfig] = None
    calibration: Optional[CalibrationSpec] = Field(
        None, description="Calibrate the carry noise before generating the sequence"
    )

    # Methods
    methods: List[MethodSpec] = Field(..., min_length=1)
    grids: Dict[str, ParamGrid] = Field(
        default_factory=dict, description="Sweep grid per method name"
    )
    target_accuracy: Optional[float] = Field(
        None, gt=0.0, le=1.0, description="Report each method at the sweep point nearest this"
    )

    # Protocol
    feature_subsets: List[FeatureSubset] = Field(default_factory=lambda: ["all", "matched"])
    hint_source: HintSource = "truth"
    ratio: float = Field(default=0.8, gt=0.0, lt=1.0, description="Distance-ratio threshold")
    seeds: List[int] = Field(default_factory=lambda: [0], min_length=1)
    threads: Optional[int] = Field(None, ge=1)

    output_path: Optional[Path] = None

    @field_validator("id")
    @classmethod
    def validate_id(cls, v: str) -> str:
        """Ids are used as file names"""
        if not v.replace("-", "").replace("_", "").isalnum():
            raise ValueError("ID must contain only alphanumeric characters, hyphens, and underscores")
        return v

    @field_validator("seeds")
    @classmethod
    def validate_seeds(cls, v: List[int]) -> List[int]:
        for seed in v:
            if not 0 <= seed < 2**64:
                raise ValueError(f"Seed must be a 64-bit unsigned integer, got {seed}")
        return v

    @field_validator("feature_subsets")
    @classmethod
    def validate_subsets(cls, v: List[FeatureSubset]) -> List[FeatureSubset]:
        if not v:
            raise ValueError("At least one feature subset is required")
        return list(dict.fromkeys(v))

    @model_validator(mode="after")
    def validate_sources(self) -> "ExperimentConfig":
        if (self.vocab_path is None) == (self.synthetic_vocab is None):
            raise ValueError("Exactly one of vocab_path or synthetic_vocab must be set")
        if (self.dataset_path is None) == (self.sequence is None):
            raise ValueError("Exactly one of dataset_path or sequence must be set")
        if self.calibration is not None and self.sequence is None:
            raise ValueError("calibration needs an embedded sequence recipe")

        known = {spec.method for spec in self.methods}
        if len(known) != len(self.methods):
            raise ValueError("Each method may appear only once")
        for method, grid in self.grids.items():
            if method not in known:
                raise ValueError(f"Grid given for method '{method}' which is not in methods")
            spec = next(s for s in self.methods if s.method == method)
            for param, values in grid.items():
                if param == "method" or param not in type(spec).model_fields:
                    raise ValueError(f"Method '{method}' has no parameter '{param}'")
                if not values:
                    raise ValueError(f"Grid for {method}.{param} is empty")
        return self

    def method_spec(self, method: str) -> MethodSpec:
        for spec in self.methods:
            if spec.method == method:
                return spec
        raise KeyError(method)


class ExperimentOverrides(BaseModel):
    """CLI overrides applied on top of a loaded experiment"""

    vocab_path: Optional[Path] = None
    dataset_path: Optional[Path] = None
    seeds: Optional[List[int]] = None
    hint_source: Optional[HintSource] = None
    output_path: Optional[Path] = None

    def apply(self, cfg: ExperimentConfig) -> ExperimentConfig:
        data = cfg.model_dump()
        if self.vocab_path is not None:
            data["vocab_path"] = self.vocab_path
            data["synthetic_vocab"] = None
        if self.dataset_path is not None:
            data["dataset_path"] = self.dataset_path
            data["sequence"] = None
            data["calibration"] = None
        for key in ("seeds", "hint_source", "output_path"):
            value = getattr(self, key)
            if value is not None:
                data[key] = value
        return ExperimentConfig.model_validate(data)
