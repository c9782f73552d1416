"""
Synthetic image sequences, ratio-test matching and hint propagation.

A sequence stands in for the frames of a moving camera: each frame carries a
binomial share of the previous frame's features (with additive Gaussian
noise) and fills the rest with fresh features. Carried features are recorded
as ground-truth links (current index, previous index), which either feed the
sequential graph search directly or serve as the oracle for the ratio-test
matcher.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial.distance import cdist

from graphvq.core.errors import FormatError, ParameterError
from graphvq.core.parallel import ordered_map
from graphvq.core.vectors import Rng, VectorStore
from graphvq.models.build_config import SequenceConfig, TrainingSetConfig

logger = logging.getLogger(__name__)

LinkSource = Literal["truth", "ratio"]

DATASET_FORMAT = "gvq-sequence"
DATASET_VERSION = 1
DEFAULT_RATIO = 0.8


def _empty_links() -> np.ndarray:
    return np.zeros((0, 2), dtype=np.int64)


def synthetic_descriptors(cfg: TrainingSetConfig) -> VectorStore:
    """
    SIFT-like training descriptors.

    Points are drawn from a Gaussian mixture on an `intrinsic_dim`-dimensional
    latent space, mapped linearly into `dim` dimensions, plus isotropic ambient
    noise. Component centres are standard normal; with the default
    cluster_spread of 1.0 neighbouring components overlap, so the density has
    no empty gaps and the k-NN graph over a vocabulary trained on it is
    connected. Deterministic per seed.
    """
    gen = Rng(cfg.seed).generator
    centers = gen.normal(size=(cfg.clusters, cfg.intrinsic_dim))
    labels = gen.integers(0, cfg.clusters, size=cfg.count)
    latent = centers[labels] + cfg.cluster_spread * gen.normal(size=(cfg.count, cfg.intrinsic_dim))
    projection = gen.normal(size=(cfg.intrinsic_dim, cfg.dim)) / np.sqrt(cfg.intrinsic_dim)
    points = latent @ projection + cfg.ambient_noise * gen.normal(size=(cfg.count, cfg.dim))

    logger.info(
        f"Generated {cfg.count} training descriptors (dim {cfg.dim}, "
        f"{cfg.clusters} latent clusters, seed {cfg.seed})"
    )
    return VectorStore(points.astype(np.float32), dim=cfg.dim)


class FreshFeatureModel:
    """
    World model for features seen for the first time.

    With a vocabulary, an `anchored_fraction` of features are noisy copies of
    uniformly chosen words (noise norm about anchor_noise_ratio times the median
    word spacing); the rest are uniform in the vocabulary's bounding box.
    Without one, every feature is uniform in the unit cube of dimension cfg.dim.
    """

    def __init__(self, cfg: SequenceConfig, vocab=None):
        self.anchored_fraction = cfg.anchored_fraction
        if vocab is None:
            self.dim = cfg.dim
            self.words = None
            self.low = np.zeros(cfg.dim)
            self.high = np.ones(cfg.dim)
            self.anchor_sigma = 0.0
        else:
            words = vocab.words.data64
            self.dim = vocab.words.dim
            self.words = words
            self.low = words.min(axis=0)
            self.high = words.max(axis=0)
            spacing = vocab.median_word_spacing()
            self.anchor_sigma = cfg.anchor_noise_ratio * spacing / np.sqrt(self.dim)

    def sample(self, gen: np.random.Generator, count: int) -> np.ndarray:
        out = gen.uniform(self.low, self.high, size=(count, self.dim))
        if self.words is not None and count:
            anchored = gen.random(count) < self.anchored_fraction
            picks = gen.integers(0, self.words.shape[0], size=int(anchored.sum()))
            noise = gen.normal(size=(picks.size, self.dim)) * self.anchor_sigma
            out[anchored] = self.words[picks] + noise
        return out


@dataclass
class SequenceDataset:
    """
    Ordered frames of features plus the ground-truth carry links.

    truth_links[t] is an (m, 2) array of (index in frame t, index in frame t-1);
    truth_links[0] is always empty.
    """

    frames: List[np.ndarray]
    truth_links: List[np.ndarray]
    config: Optional[SequenceConfig] = None
    _ratio_links: Dict[float, Tuple[List[np.ndarray], int]] = field(
        default_factory=dict, init=False, repr=False, compare=False
    )

    def __post_init__(self):
        if len(self.frames) != len(self.truth_links):
            raise ParameterError(
                f"{len(self.frames)} frames but {len(self.truth_links)} link lists"
            )
        for t, links in enumerate(self.truth_links):
            if links.size == 0:
                continue
            if t == 0:
                raise ParameterError("The first frame cannot link to a previous frame")
            if (
                links[:, 0].min() < 0
                or links[:, 0].max() >= len(self.frames[t])
                or links[:, 1].min() < 0
                or links[:, 1].max() >= len(self.frames[t - 1])
            ):
                raise ParameterError(f"Truth links of frame {t} reference missing features")

    @property
    def num_frames(self) -> int:
        return len(self.frames)

    @property
    def dim(self) -> int:
        return int(self.frames[0].shape[1]) if self.frames else 0

    @property
    def frame_sizes(self) -> List[int]:
        return [int(f.shape[0]) for f in self.frames]

    @property
    def num_features(self) -> int:
        return sum(self.frame_sizes)

    def links(
        self,
        source: LinkSource = "truth",
        ratio: float = DEFAULT_RATIO,
        threads: Optional[int] = None,
    ) -> List[np.ndarray]:
        """Per-frame links, either the recorded ground truth or ratio-test matches"""
        if source == "truth":
            return self.truth_links
        if source == "ratio":
            return self.ratio_links(ratio, threads=threads)[0]
        raise ParameterError(f"Unknown link source: {source}")

    def ratio_links(
        self, ratio: float = DEFAULT_RATIO, threads: Optional[int] = None
    ) -> Tuple[List[np.ndarray], int]:
        """Ratio-test links for every frame pair and the matcher's distance evaluations"""
        if ratio not in self._ratio_links:
            pairs = list(range(1, self.num_frames))
            matches = ordered_map(
                lambda t: match_frames(self.frames[t - 1], self.frames[t], ratio),
                pairs,
                threads=threads,
            )
            links = [_empty_links()] + [m.links for m in matches]
            evaluations = sum(m.evaluations for m in matches)
            self._ratio_links[ratio] = (links, evaluations)
            logger.info(
                f"Ratio-test matching (ratio={ratio}) linked "
                f"{sum(len(l) for l in links)} features over {self.num_frames} frames"
            )
        return self._ratio_links[ratio]

    def matched_mask(
        self, frame: int, source: LinkSource = "truth", ratio: float = DEFAULT_RATIO
    ) -> np.ndarray:
        """True for features of `frame` that have a match in the previous frame"""
        mask = np.zeros(len(self.frames[frame]), dtype=bool)
        links = self.links(source, ratio)[frame]
        mask[links[:, 0]] = True
        return mask

    def save(self, directory: Union[str, Path]) -> Path:
        """
        Write frames as frames/NNNNNN.gvq vector blocks and a dataset.json sidecar
        holding the config, frame sizes and truth links.
        """
        directory = Path(directory)
        frames_dir = directory / "frames"
        frames_dir.mkdir(parents=True, exist_ok=True)
        for t, frame in enumerate(self.frames):
            with open(frames_dir / f"{t:06d}.gvq", "wb") as fh:
                VectorStore(frame, dim=self.dim).write_to(fh)

        sidecar = {
            "format": DATASET_FORMAT,
            "version": DATASET_VERSION,
            "dim": self.dim,
            "config": self.config.model_dump(mode="json") if self.config else None,
            "frame_sizes": self.frame_sizes,
            "truth_links": [links.tolist() for links in self.truth_links],
        }
        with open(directory / "dataset.json", "w") as fh:
            json.dump(sidecar, fh)
        logger.info(f"Saved {self.num_frames} frames to {directory}")
        return directory

    @classmethod
    def load(cls, directory: Union[str, Path]) -> "SequenceDataset":
        """
        Raises:
            FileNotFoundError: missing directory or sidecar
            FormatError: unknown format/version, or frames disagreeing with the sidecar
        """
        directory = Path(directory)
        sidecar_path = directory / "dataset.json"
        if not sidecar_path.exists():
            raise FileNotFoundError(f"Dataset sidecar not found: {sidecar_path}")

        try:
            with open(sidecar_path, "r") as fh:
                sidecar = json.load(fh)
        except json.JSONDecodeError as e:
            raise FormatError(f"Invalid dataset sidecar {sidecar_path}: {e}")
        if sidecar.get("format") != DATASET_FORMAT:
            raise FormatError(f"{sidecar_path} is not a sequence dataset")
        if sidecar.get("version") != DATASET_VERSION:
            raise FormatError(f"Unsupported dataset version {sidecar.get('version')}")

        frames = []
        for t, size in enumerate(sidecar["frame_sizes"]):
            path = directory / "frames" / f"{t:06d}.gvq"
            if not path.exists():
                raise FileNotFoundError(f"Frame file not found: {path}")
            with open(path, "rb") as fh:
                store = VectorStore.read_from(fh)
            if store.count != size or store.dim != sidecar["dim"]:
                raise FormatError(
                    f"Frame {t} holds {store.count}x{store.dim} vectors, "
                    f"sidecar says {size}x{sidecar['dim']}"
                )
            frames.append(store.data64.copy())

        links = [
            np.asarray(l, dtype=np.int64).reshape(-1, 2) for l in sidecar["truth_links"]
        ]
        config = SequenceConfig(**sidecar["config"]) if sidecar.get("config") else None
        dataset = cls(frames=frames, truth_links=links, config=config)
        logger.info(f"Loaded {dataset.num_frames} frames from {directory}")
        return dataset


def _frame_size(gen: np.random.Generator, cfg: SequenceConfig) -> int:
    if cfg.size_spread == 0:
        return cfg.features_per_frame
    size = gen.normal(cfg.features_per_frame, cfg.size_spread * cfg.features_per_frame)
    return max(1, int(round(size)))


def generate(cfg: SequenceConfig, vocab=None) -> SequenceDataset:
    """
    Generate a synthetic sequence.

    Frame 0 is all fresh. Frame t carries Binomial(size_t, overlap) features of
    frame t-1 (at most as many as frame t-1 holds), each with N(0, sigma^2)
    added per component; carried features come first, in previous-frame order,
    and the remainder is fresh. Deterministic per seed.
    """
    rng = Rng(cfg.seed)
    world = FreshFeatureModel(cfg, vocab)
    frames: List[np.ndarray] = []
    links: List[np.ndarray] = []

    for t in range(cfg.num_frames):
        gen = rng.child(t).generator
        size = _frame_size(gen, cfg)
        if t == 0:
            frames.append(world.sample(gen, size).astype(np.float32).astype(np.float64))
            links.append(_empty_links())
            continue

        prev = frames[-1]
        carried = min(int(gen.binomial(size, cfg.overlap)), prev.shape[0])
        source = np.sort(gen.choice(prev.shape[0], size=carried, replace=False))
        carried_feats = prev[source]
        if cfg.carry_noise_sigma > 0:
            carried_feats = carried_feats + cfg.carry_noise_sigma * gen.normal(
                size=carried_feats.shape
            )
        fresh = world.sample(gen, size - carried)
        # frames are stored as float32 blocks; keep the in-memory copy identical
        frame = np.vstack([carried_feats, fresh]).astype(np.float32).astype(np.float64)
        frames.append(frame)
        links.append(np.column_stack([np.arange(carried), source]).astype(np.int64))

    carried_total = sum(len(l) for l in links)
    logger.info(
        f"Generated {cfg.num_frames} frames ({sum(f.shape[0] for f in frames)} features, "
        f"{carried_total} carried, overlap={cfg.overlap}, sigma={cfg.carry_noise_sigma})"
    )
    return SequenceDataset(frames=frames, truth_links=links, config=cfg)


@dataclass
class FrameMatches:
    """Ratio-test links between two frames and the distances it took"""

    links: np.ndarray
    evaluations: int


def match_frames(prev: np.ndarray, curr: np.ndarray, ratio: float = DEFAULT_RATIO) -> FrameMatches:
    """
    Link current features to previous ones with the distance-ratio test.

    A current feature links to its nearest previous feature when d1 < ratio*d2
    (d2 the second-nearest distance) and that previous feature's nearest current
    feature is the same one (mutual best). Needs at least two previous
    features. The evaluations are reported but never charged to a
    quantization meter.

    Raises:
        ParameterError: ratio outside (0, 1)
    """
    if not 0.0 < ratio < 1.0:
        raise ParameterError(f"ratio must be in (0, 1), got {ratio}")
    prev = np.asarray(prev, dtype=np.float64)
    curr = np.asarray(curr, dtype=np.float64)
    if prev.shape[0] < 2 or curr.shape[0] == 0:
        return FrameMatches(links=_empty_links(), evaluations=prev.shape[0] * curr.shape[0])

    dists = cdist(curr, prev, "euclidean")
    order = np.argsort(dists, axis=1, kind="stable")[:, :2]
    rows = np.arange(curr.shape[0])
    d1 = dists[rows, order[:, 0]]
    d2 = dists[rows, order[:, 1]]
    nearest_prev = order[:, 0]
    nearest_curr = np.argmin(dists, axis=0)

    passes = (d1 < ratio * d2) & (nearest_curr[nearest_prev] == rows)
    links = np.column_stack([rows[passes], nearest_prev[passes]]).astype(np.int64)
    return FrameMatches(links=links, evaluations=int(dists.size))


def propagate_hints(
    links: np.ndarray, prev_words: Sequence[int], num_current: int
) -> List[Optional[int]]:
    """Hint for current feature i: the previous word of its linked feature, else None"""
    hints: List[Optional[int]] = [None] * num_current
    prev_words = np.asarray(prev_words, dtype=np.int64)
    for curr_idx, prev_idx in np.asarray(links, dtype=np.int64).reshape(-1, 2):
        if not 0 <= prev_idx < prev_words.size:
            raise ParameterError(f"Link references previous feature {prev_idx} out of range")
        hints[int(curr_idx)] = int(prev_words[prev_idx])
    return hints
