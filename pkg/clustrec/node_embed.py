"""
Node features for clustrec similarity graphs.

Weighted DeepWalk: random walks whose next step is drawn in proportion to the
edge weight, followed by skip-gram training with negative sampling.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
from gensim.models import Word2Vec

from .graph_utils import SimilarityGraph
from .seeding import derive_seed
from .store import pack_arrays, unpack_arrays

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WalkCorpus:
    """Random walks ordered by start node, then walk index."""
    walks: List[List[int]]
    num_walks: int
    walk_length: int
    seed: int
    node_count: int


@dataclass(frozen=True)
class NodeFeatureMatrix:
    """Row i holds the embedding of node i."""
    X: np.ndarray
    seed: int
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def to_bytes(self) -> bytes:
        return pack_arrays({"dim": self.dim, "seed": self.seed, "params": self.params}, {"X": self.X})

    @classmethod
    def from_bytes(cls, payload: bytes) -> "NodeFeatureMatrix":
        header, arrays = unpack_arrays(payload)
        return cls(X=arrays["X"], seed=int(header["seed"]), params=header["params"])


def generate_walks(
    g: SimilarityGraph,
    num_walks: int = 10,
    walk_length: int = 40,
    seed: int = 0
) -> WalkCorpus:
    """
    Weight-biased random walks from every node.

    Each start node draws from its own stream seeded by (seed, node). A walk at an
    isolated node is just [node].
    """
    transitions: List[Tuple[np.ndarray, np.ndarray]] = []
    for node in range(g.n):
        neighbours, weights = g.neighbors(node)
        transitions.append((neighbours, np.cumsum(weights)))

    walks: List[List[int]] = []
    for start in range(g.n):
        rng = np.random.default_rng([seed, start])
        for _ in range(num_walks):
            walk = [start]
            current = start
            while len(walk) < walk_length:
                neighbours, cumulative = transitions[current]
                if neighbours.size == 0:
                    break
                draw = rng.random() * cumulative[-1]
                step = min(int(np.searchsorted(cumulative, draw, side="right")), neighbours.size - 1)
                current = int(neighbours[step])
                walk.append(current)
            walks.append(walk)

    return WalkCorpus(walks=walks, num_walks=num_walks, walk_length=walk_length, seed=seed, node_count=g.n)


def context_pairs(walk: Sequence[int], window: int) -> List[Tuple[int, int]]:
    """(center, context) pairs within +-window positions of each center."""
    pairs = []
    for i, center in enumerate(walk):
        for j in range(max(0, i - window), min(len(walk), i + window + 1)):
            if j != i:
                pairs.append((center, walk[j]))
    return pairs


def train_skipgram(
    c: WalkCorpus,
    dim: int = 64,
    window: int = 5,
    negatives: int = 5,
    epochs: int = 5,
    lr: float = 0.025,
    seed: int = 0
) -> NodeFeatureMatrix:
    """
    Skip-gram with negative sampling over a walk corpus.

    Training is single-threaded so that the result depends only on the seed. Vectors
    start from gensim's initialization, uniform in [-1/dim, 1/dim], not [-0.5/dim, 0.5/dim].
    """
    if not c.walks:
        raise ValueError("Cannot train on an empty walk corpus")
    sentences = [[str(node) for node in walk] for walk in c.walks]
    model = Word2Vec(
        sentences=sentences,
        vector_size=dim,
        window=window,
        min_count=1,
        sg=1,
        hs=0,
        negative=negatives,
        ns_exponent=0.75,
        alpha=lr,
        min_alpha=lr * 1e-4,
        sample=0,
        shrink_windows=False,
        epochs=epochs,
        seed=seed,
        workers=1
    )
    X = np.zeros((c.node_count, dim))
    for node in range(c.node_count):
        token = str(node)
        if token in model.wv.key_to_index:
            X[node] = model.wv[token]

    params = {
        "num_walks": c.num_walks,
        "walk_length": c.walk_length,
        "walk_seed": c.seed,
        "dim": dim,
        "window": window,
        "negatives": negatives,
        "epochs": epochs,
        "lr": lr,
        "pairs": sum(len(context_pairs(walk, window)) for walk in c.walks),
    }
    return NodeFeatureMatrix(X=X.astype(float), seed=seed, params=params)


class DeepWalkEmbedder:
    """Weighted DeepWalk with fixed hyperparameters."""

    def __init__(
        self,
        num_walks: int = 10,
        walk_length: int = 40,
        dim: int = 64,
        window: int = 5,
        negatives: int = 5,
        epochs: int = 5,
        lr: float = 0.025,
        master_seed: int = 0
    ):
        self.num_walks = num_walks
        self.walk_length = walk_length
        self.dim = dim
        self.window = window
        self.negatives = negatives
        self.epochs = epochs
        self.lr = lr
        self.master_seed = master_seed

    @classmethod
    def from_config(cls, config) -> "DeepWalkEmbedder":
        return cls(
            num_walks=config.walk_count,
            walk_length=config.walk_length,
            dim=config.node_dim,
            window=config.walk_window,
            negatives=config.walk_negatives,
            epochs=config.walk_epochs,
            lr=config.walk_lr,
            master_seed=config.master_seed
        )

    def embed(self, g: SimilarityGraph, name: str) -> NodeFeatureMatrix:
        """Node features of one dataset graph; seeds derive from the dataset name."""
        walk_seed = derive_seed(self.master_seed, "walks", name)
        corpus = generate_walks(g, self.num_walks, self.walk_length, walk_seed)
        features = train_skipgram(
            corpus,
            dim=self.dim,
            window=self.window,
            negatives=self.negatives,
            epochs=self.epochs,
            lr=self.lr,
            seed=derive_seed(self.master_seed, "skipgram", name)
        )
        logger.debug(f"DeepWalk on {name}: {len(corpus.walks)} walks, dim={self.dim}")
        return features
