"""
Graph convolutional embedder for clustrec.

This module trains a supervised graph classifier over dataset graphs labelled with
their best clustering algorithm. The mean readout of the last convolution layer is
the graph embedding used as meta-features.

Layer rule: H(l+1) = ReLU(F H(l) W(l)) with F = B^-1/2 (Z + I) B^-1/2.
Everything runs in float64 on the CPU.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import torch
import torch.nn.functional as nnf
from torch import nn

from .errors import DimensionMismatch, SingleClassCorpus
from .graph_utils import SimilarityGraph
from .node_embed import NodeFeatureMatrix
from .store import pack_arrays, unpack_arrays

logger = logging.getLogger(__name__)

DTYPE = torch.float64


def normalize_adjacency(Z: np.ndarray) -> np.ndarray:
    """Symmetric normalization of Z with self-loops added."""
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
        raise DimensionMismatch(f"Adjacency must be square, got shape {Z.shape}")
    Zt = Z + np.eye(Z.shape[0])
    degrees = Zt.sum(axis=1)
    return Zt / np.sqrt(np.outer(degrees, degrees))


@dataclass
class LabeledGraph:
    """Dataset graph with node features and its best-algorithm label."""
    name: str
    Z: np.ndarray
    X: np.ndarray
    label: Optional[str] = None

    def __post_init__(self):
        self.Z = np.asarray(self.Z, dtype=float)
        self.X = np.asarray(self.X, dtype=float)
        if self.Z.shape[0] != self.Z.shape[1] or self.X.shape[0] != self.Z.shape[0]:
            raise DimensionMismatch(
                f"Graph {self.name}: adjacency {self.Z.shape} does not match features {self.X.shape}"
            )

    @classmethod
    def from_parts(
        cls,
        graph: SimilarityGraph,
        features: NodeFeatureMatrix,
        label: Optional[str] = None,
        name: Optional[str] = None
    ) -> "LabeledGraph":
        return cls(name=name or graph.name, Z=graph.dense(), X=features.X, label=label)


@dataclass(frozen=True)
class GraphEmbedding:
    """Readout vector of one dataset graph."""
    name: str
    measure: str
    vector: np.ndarray

    def to_bytes(self) -> bytes:
        return pack_arrays({"name": self.name, "measure": self.measure}, {"vector": self.vector})

    @classmethod
    def from_bytes(cls, payload: bytes) -> "GraphEmbedding":
        header, arrays = unpack_arrays(payload)
        return cls(name=header["name"], measure=header["measure"], vector=arrays["vector"])


def _uniform_(tensor: torch.Tensor, fan_in: int, fan_out: int, generator: torch.Generator):
    bound = float(np.sqrt(6.0 / (fan_in + fan_out)))
    with torch.no_grad():
        tensor.uniform_(-bound, bound, generator=generator)


class GraphConvolution(nn.Module):
    """One propagation step without bias."""

    def __init__(self, in_features: int, out_features: int, generator: torch.Generator):
        super().__init__()
        self.weight = nn.Parameter(torch.empty(in_features, out_features, dtype=DTYPE))
        _uniform_(self.weight, in_features, out_features, generator)

    def forward(self, F: torch.Tensor, H: torch.Tensor) -> torch.Tensor:
        return torch.relu(F @ H @ self.weight)


class GraphConvClassifier(nn.Module):
    """Stacked graph convolutions, mean readout and a linear classifier."""

    def __init__(self, input_dim: int, emb: int, layers: int, n_classes: int, seed: int = 0):
        super().__init__()
        generator = torch.Generator().manual_seed(int(seed))
        widths = [input_dim] + [emb] * layers
        self.convs = nn.ModuleList(
            GraphConvolution(widths[i], widths[i + 1], generator) for i in range(layers)
        )
        self.classifier = nn.Linear(emb, n_classes, dtype=DTYPE)
        _uniform_(self.classifier.weight, emb, n_classes, generator)
        with torch.no_grad():
            self.classifier.bias.zero_()

    def forward(self, F: torch.Tensor, X: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        H = X
        for conv in self.convs:
            H = conv(F, H)
        embedding = H.mean(dim=0)
        return H, embedding, self.classifier(embedding)


@dataclass
class GcnModel:
    """Trained classifier plus its architecture record and loss history."""
    module: GraphConvClassifier
    classes: List[str]
    architecture: Dict[str, Any]
    history: List[float] = field(default_factory=list)
    stopped_epoch: int = -1

    @property
    def input_dim(self) -> int:
        return int(self.architecture["input_dim"])

    @property
    def emb(self) -> int:
        return int(self.architecture["emb"])

    def to_bytes(self) -> bytes:
        """Architecture header plus one dense block per parameter tensor."""
        state = {name: tensor.detach().numpy() for name, tensor in self.module.state_dict().items()}
        header = {
            "architecture": self.architecture,
            "classes": self.classes,
            "history": self.history,
            "stopped_epoch": self.stopped_epoch,
        }
        return pack_arrays(header, state)

    @classmethod
    def from_bytes(cls, payload: bytes) -> "GcnModel":
        header, arrays = unpack_arrays(payload)
        architecture = header["architecture"]
        module = GraphConvClassifier(
            input_dim=architecture["input_dim"],
            emb=architecture["emb"],
            layers=architecture["layers"],
            n_classes=len(header["classes"]),
            seed=architecture["seed"]
        )
        module.load_state_dict({name: torch.from_numpy(np.array(array)) for name, array in arrays.items()})
        return cls(
            module=module,
            classes=list(header["classes"]),
            architecture=architecture,
            history=list(header["history"]),
            stopped_epoch=int(header["stopped_epoch"])
        )


def _tensors(g: LabeledGraph) -> Tuple[torch.Tensor, torch.Tensor]:
    F = torch.from_numpy(normalize_adjacency(g.Z))
    X = torch.from_numpy(np.array(g.X, dtype=float))
    return F, X


def forward(model: GcnModel, g: LabeledGraph) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Node representations, graph embedding and class logits of one graph.

    Raises:
        DimensionMismatch: If the node features do not have the model's input width
    """
    if g.X.shape[1] != model.input_dim:
        raise DimensionMismatch(f"Graph {g.name} has {g.X.shape[1]} node features, model expects {model.input_dim}")
    F, X = _tensors(g)
    with torch.no_grad():
        H, embedding, logits = model.module(F, X)
    return H.numpy(), embedding.numpy(), logits.numpy()


def corpus_loss(
    module: GraphConvClassifier,
    inputs: Sequence[Tuple[torch.Tensor, torch.Tensor]],
    targets: torch.Tensor
) -> torch.Tensor:
    """Mean softmax cross-entropy over every graph."""
    logits = torch.stack([module(F, X)[2] for F, X in inputs])
    return nnf.cross_entropy(logits, targets)


def train_gcnn(
    graphs: Sequence[LabeledGraph],
    layers: int = 4,
    emb: int = 300,
    lr: float = 0.006,
    max_epochs: int = 60,
    patience: int = 10,
    seed: int = 0,
    classes: Optional[Sequence[str]] = None
) -> GcnModel:
    """
    Train the graph classifier on full batches of labelled graphs.

    Epochs are counted from 0. Training stops once `patience` consecutive epochs
    bring no strict improvement over the best loss, or after max_epochs.

    Args:
        graphs: Labelled graphs sharing one node-feature width
        layers: Number of convolution layers
        emb: Width of every convolution layer and of the embedding
        lr: Adam learning rate
        max_epochs: Upper bound on epochs
        patience: Early-stopping patience
        seed: Parameter initialization seed
        classes: Class order; defaults to the sorted distinct labels

    Returns:
        Trained model with its loss history

    Raises:
        SingleClassCorpus: If fewer than two distinct labels are present
        DimensionMismatch: If node-feature widths differ
    """
    labels = [g.label for g in graphs]
    if any(label is None for label in labels):
        raise SingleClassCorpus("Every training graph needs a label")
    if len(set(labels)) < 2:
        raise SingleClassCorpus(f"Need at least 2 distinct labels, got {sorted(set(labels))}")

    classes = list(classes) if classes is not None else sorted(set(labels))
    missing = set(labels) - set(classes)
    if missing:
        raise SingleClassCorpus(f"Labels outside the class list: {sorted(missing)}")

    widths = {g.X.shape[1] for g in graphs}
    if len(widths) != 1:
        raise DimensionMismatch(f"Node feature widths differ across graphs: {sorted(widths)}")
    input_dim = widths.pop()

    start_time = time.time()
    module = GraphConvClassifier(input_dim, emb, layers, len(classes), seed)
    optimizer = torch.optim.Adam(module.parameters(), lr=lr, betas=(0.9, 0.999), eps=1e-8)
    inputs = [_tensors(g) for g in graphs]
    targets = torch.tensor([classes.index(label) for label in labels], dtype=torch.long)

    history: List[float] = []
    best_loss = float("inf")
    stale = 0
    stopped = max_epochs - 1

    module.train()
    for epoch in range(max_epochs):
        optimizer.zero_grad()
        loss = corpus_loss(module, inputs, targets)
        loss.backward()
        value = float(loss.item())
        history.append(value)

        if value < best_loss:
            best_loss = value
            stale = 0
        else:
            stale += 1
            if stale >= patience:
                stopped = epoch
                logger.info(f"Early stopping at epoch {epoch} (best loss {best_loss:.6f})")
                break
        optimizer.step()

    module.eval()
    architecture = {
        "input_dim": input_dim,
        "emb": emb,
        "layers": layers,
        "n_classes": len(classes),
        "lr": lr,
        "max_epochs": max_epochs,
        "patience": patience,
        "seed": seed,
        "readout": "mean",
    }
    logger.info(
        f"Trained GCN on {len(graphs)} graphs, {len(classes)} classes: "
        f"{len(history)} epochs, final loss {history[-1]:.6f} ({time.time() - start_time:.2f}s)"
    )
    return GcnModel(module=module, classes=classes, architecture=architecture, history=history, stopped_epoch=stopped)


def training_accuracy(model: GcnModel, graphs: Sequence[LabeledGraph]) -> float:
    """Fraction of graphs whose arg-max class is their label."""
    hits = 0
    for g in graphs:
        _, _, logits = forward(model, g)
        hits += int(model.classes[int(np.argmax(logits))] == g.label)
    return hits / len(graphs) if graphs else 0.0


def embed_all(model: GcnModel, graphs: Sequence[LabeledGraph], measure: str = "") -> List[GraphEmbedding]:
    """Readout embedding of every graph, in input order."""
    embeddings = []
    for g in graphs:
        _, vector, _ = forward(model, g)
        embeddings.append(GraphEmbedding(name=g.name, measure=measure, vector=vector.copy()))
    return embeddings
