"""
Pydantic models for clustrec.

This module contains the record types shared across the package: identifiers and
orientations of validity indices, algorithm capability records, preprocessing
provenance, artifact keys, recommendations and evaluation results.
Numeric containers that wrap numpy arrays live next to the code that produces them.
"""

from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator


class IndexId(str, Enum):
    """Internal clustering validity indices."""
    BEZDEK_PAL = "bezdek_pal"
    DUNN = "dunn"
    CALINSKI_HARABASZ = "calinski_harabasz"
    SILHOUETTE = "silhouette"
    MILLIGAN_COOPER = "milligan_cooper"
    DAVIES_BOULDIN = "davies_bouldin"
    HANDL_KNOWLES_KELL = "handl_knowles_kell"
    HUBERT_LEVIN = "hubert_levin"
    SD_SCAT = "sd_scat"
    XIE_BENI = "xie_beni"


AVERAGE_RANKING = "average_ranking"


class Orientation(str, Enum):
    """Whether larger or smaller index values are better."""
    MAXIMIZE = "maximize"
    MINIMIZE = "minimize"


class ColumnKind(str, Enum):
    """Kinds of raw dataset columns."""
    NUMERIC = "numeric"
    NOMINAL = "nominal"
    LABEL = "label"


class DropReason(str, Enum):
    """Why preprocessing removed a column."""
    LABEL = "label"
    CONSTANT = "constant"
    IDENTIFIER = "identifier"
    MISSING = "missing"


class FeatureKind(str, Enum):
    """Meta-feature families fed to the ranker."""
    MARCO_GE = "marco_ge"
    DISTANCE = "distance"
    CAD = "cad"


class ArtifactKind(str, Enum):
    """Kinds of persisted artifacts."""
    PERF_TABLE = "perf_table"
    GRAPH = "graph"
    NODE_FEATURES = "node_features"
    EMBEDDING = "embedding"
    GCNN_MODEL = "gcnn_model"
    RANKER_MODEL = "ranker_model"
    REPORT = "report"


class AlgorithmSpec(BaseModel):
    """Capability record of a clustering algorithm."""
    model_config = ConfigDict(frozen=True)

    id: str = Field(..., description="Short algorithm symbol, e.g. KM")
    ordinal: int = Field(..., ge=0, description="Stable ordinal used as the M_a ranker feature")
    deterministic: bool
    needs_k: bool
    density_based: bool = False
    family: str = Field(default="", description="Algorithm family")
    description: str = ""


class IndexSpec(BaseModel):
    """Identifier and orientation of a validity index."""
    model_config = ConfigDict(frozen=True)

    id: IndexId
    orientation: Orientation
    description: str = ""


class IndexScore(BaseModel):
    """Value of a validity index for one clustering solution."""
    model_config = ConfigDict(frozen=True)

    value: float = float("nan")
    defined: bool = True
    reason: Optional[str] = None


class Provenance(BaseModel):
    """Record of every preprocessing action applied to a dataset."""
    source: str = ""
    source_hash: str = ""
    kept: List[str] = Field(default_factory=list)
    dropped: Dict[str, DropReason] = Field(default_factory=dict)
    encoded: List[str] = Field(default_factory=list)
    imputed: Dict[str, int] = Field(default_factory=dict)
    rows: int = 0

    def to_text(self) -> str:
        """Serialize to a structured text record."""
        return self.model_dump_json(indent=2)


class ArtifactKey(BaseModel):
    """Address of a stored artifact."""
    model_config = ConfigDict(frozen=True)

    kind: ArtifactKind
    identifier: str
    config_hash: str

    @field_validator("identifier", "config_hash")
    @classmethod
    def validate_component(cls, v: str) -> str:
        """Reject values that would escape the store layout."""
        if not v or "/" in v or "\\" in v or v in {".", ".."}:
            raise ValueError(f"Invalid key component: {v!r}")
        return v

    @property
    def prefix(self) -> str:
        return f"{self.kind.value}/{self.identifier}/{self.config_hash}"


class StoredReceipt(BaseModel):
    """Result of a store write."""
    key: ArtifactKey
    path: str
    checksum: str
    size: int


class RankedAlgorithm(BaseModel):
    """One entry of a recommendation."""
    algorithm: str
    ordinal: int
    score: float
    typical_k: Optional[float] = None


class RankedRecommendation(BaseModel):
    """Clustering algorithms ordered best first for one dataset."""
    dataset: str
    measure: str
    items: List[RankedAlgorithm] = Field(default_factory=list)

    @property
    def order(self) -> List[str]:
        return [item.algorithm for item in self.items]


class PopularityVector(BaseModel):
    """Algorithms ranked by how often each was best across a corpus."""
    measure: str
    order: List[str]
    counts: Dict[str, int]


class FoldResult(BaseModel):
    """Outcome of one leave-one-out fold for one method."""
    dataset: str
    method: str
    predicted: List[str] = Field(default_factory=list)
    actual_ranks: Dict[str, float] = Field(default_factory=dict)
    src: float = float("nan")
    reciprocal_rank: float = float("nan")
    top1_hit: bool = False
    training_groups: List[str] = Field(default_factory=list)
    training_groups_hash: str = ""
    split_features: List[int] = Field(default_factory=list)
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


class MethodSummary(BaseModel):
    """Aggregate leave-one-out results of one method."""
    method: str
    measure: str
    mean_src: float
    mean_mrr: float
    top1_hits: int
    n_folds: int
    failed_folds: int
    mrr_at_k: List[float] = Field(default_factory=list)


class SignificanceResult(BaseModel):
    """Result of one significance test."""
    test: str
    metric: str
    comparison: str
    statistic: float
    p_value: float
