"""Configuration models for vocabulary training and synthetic data generation"""

from typing import Optional

from pydantic import BaseModel, Field


class KMeansConfig(BaseModel):
    """Lloyd k-means with k-means++ seeding"""

    C: int = Field(..., ge=1, description="Number of clusters")
    max_iters: int = Field(default=100, ge=1)
    tol: float = Field(default=1e-4, ge=0.0, description="Relative objective decrease to stop")
    seed: int = Field(default=0, ge=0, lt=2**64)


class TrainingSetConfig(BaseModel):
    """
    SIFT-like synthetic descriptors: a Gaussian mixture on a low-dimensional
    latent space, mapped linearly into `dim` dimensions plus ambient noise.

    Centres are standard normal. A cluster_spread well below 1 separates the
    components into islands that a k-NN graph cannot bridge.
    """

    count: int = Field(..., ge=1)
    dim: int = Field(default=128, ge=1)
    clusters: int = Field(default=64, ge=1, description="Latent mixture components")
    intrinsic_dim: int = Field(default=12, ge=1)
    cluster_spread: float = Field(
        default=1.0, ge=0.0, description="Component std-dev relative to the centre spread"
    )
    ambient_noise: float = Field(default=0.02, ge=0.0)
    seed: int = Field(default=0, ge=0, lt=2**64)


class SequenceConfig(BaseModel):
    """Synthetic image sequence with controlled inter-frame feature overlap"""

    num_frames: int = Field(..., ge=1)
    features_per_frame: int = Field(default=316, ge=1, description="Mean features per frame")
    size_spread: float = Field(
        default=0.0, ge=0.0, description="Relative std-dev of frame size around the mean"
    )
    overlap: float = Field(
        default=0.13, ge=0.0, le=1.0, description="Expected fraction carried from previous frame"
    )
    carry_noise_sigma: float = Field(
        default=0.0, ge=0.0, description="Per-component Gaussian noise on carried features"
    )
    anchored_fraction: float = Field(
        default=0.7, ge=0.0, le=1.0, description="Fresh features drawn near vocabulary words"
    )
    anchor_noise_ratio: float = Field(
        default=1.0,
        ge=0.0,
        description="Noise norm around anchor words, relative to the median word spacing",
    )
    dim: int = Field(default=128, ge=1, description="Feature dimension when no vocabulary is given")
    seed: int = Field(default=0, ge=0, lt=2**64)


class SyntheticVocabSpec(BaseModel):
    """Build a vocabulary from synthetic training data instead of loading one"""

    training: TrainingSetConfig
    clusters: int = Field(..., ge=2)
    graph_k: int = Field(..., ge=1)
    max_iters: int = Field(default=25, ge=1)
    tol: float = Field(default=1e-4, ge=0.0)
    seed: int = Field(default=0, ge=0, lt=2**64)


class CalibrationSpec(BaseModel):
    """Pick the carry noise so that linked pairs share their true word at `target`"""

    target: float = Field(default=0.64, gt=0.0, lt=1.0)
    samples: int = Field(default=4000, ge=100)
    iterations: int = Field(default=24, ge=1, description="Bisection steps")
    seed: Optional[int] = Field(default=None, ge=0, lt=2**64)
    reference_vocab: Optional[SyntheticVocabSpec] = Field(
        None,
        description="Calibrate against this vocabulary instead of the experiment's own, "
        "so one noise level can be carried across vocabulary sizes",
    )
