"""Search parameter models - one spec per search method"""

from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, Field


class GnnsParams(BaseModel):
    """
    Parameters of one graph nearest neighbor search.

    T absent means the walk stops at a local minimum instead of after a fixed
    number of greedy steps.
    """

    K: int = Field(default=1, ge=1, description="Neighbors to return")
    R: int = Field(default=1, ge=1, description="Random restarts")
    T: Optional[int] = Field(default=None, ge=1, description="Greedy steps (None: local minimum)")
    E: int = Field(default=1, ge=1, description="Expansions per step, at most the graph degree")
    seed: int = Field(default=0, ge=0, lt=2**64)

    model_config = {"frozen": True}


# Method specs used by the benchmark harness and CLI. `method` is the discriminator.


class LinearSpec(BaseModel):
    """Exhaustive scan"""

    method: Literal["linear"] = "linear"


class KdSpec(BaseModel):
    """Randomized KD-tree forest with best-bin-first search"""

    method: Literal["kd"] = "kd"
    trees: int = Field(default=1, ge=1, description="Number of randomized trees")
    checks: int = Field(default=200, ge=1, description="Leaf points evaluated per query")


class HkmSpec(BaseModel):
    """Hierarchical k-means tree with priority search"""

    method: Literal["hkm"] = "hkm"
    branching: int = Field(default=8, ge=2, description="Branching factor")
    iterations: int = Field(default=3, ge=1, description="k-means iterations per split")
    checks: int = Field(default=40, ge=1, description="Leaf points evaluated per query")


class GnnsSpec(BaseModel):
    """Graph nearest neighbor search from random starts"""

    method: Literal["gnns"] = "gnns"
    E: Optional[int] = Field(default=None, ge=1, description="Expansions (None: graph degree)")
    R: int = Field(default=1, ge=1)
    T: Optional[int] = Field(default=None, ge=1)


class SgnnsSpec(BaseModel):
    """Graph search warm-started from the previous frame's word for matched features"""

    method: Literal["sgnns"] = "sgnns"
    E: Optional[int] = Field(default=None, ge=1, description="Expansions (None: graph degree)")
    R: int = Field(default=1, ge=1, description="Restarts for unhinted features only")
    T: Optional[int] = Field(default=None, ge=1)


MethodSpec = Annotated[
    Union[LinearSpec, KdSpec, HkmSpec, GnnsSpec, SgnnsSpec], Field(discriminator="method")
]

METHOD_LABELS = {
    "linear": "Linear",
    "kd": "KD",
    "hkm": "HKM",
    "gnns": "GNNS",
    "sgnns": "SGNNS",
}

METHOD_SPECS = {
    "linear": LinearSpec,
    "kd": KdSpec,
    "hkm": HkmSpec,
    "gnns": GnnsSpec,
    "sgnns": SgnnsSpec,
}
