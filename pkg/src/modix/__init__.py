"""Information-driven positional index rescaling for multimodal sequences.

Estimates per-modality information contributions from raw token embeddings,
derives an adaptive visual positional stride from their ratio, reconstructs
real-valued rotary position indices, and ships a rotary-attention harness
that measures the resulting attention reallocation.
"""

from .contribution import (
    AnalysisConfig,
    ContributionReport,
    InterScores,
    IntraScores,
    NormalizationMode,
    analyze,
    covariance_summary,
    directional_scores,
    entropy_proxy,
    fuse_contributions,
    inter_contributions,
    intra_contributions,
    pathway_scores,
    similarity_matrix,
)
from .harness import AttentionDiagnostics, ContentMode, HarnessSpec, harness_layout, run_harness
from .oracle import oracle_pipeline
from .rope import PairLayout, RotaryConfig, attention_score, rotate, rotate_rows
from .seqio import (
    GeneratorSpec,
    Modality,
    MultimodalSequence,
    SequenceMeta,
    generate_synthetic,
    load_sequence,
    save_sequence,
)
from .stride import PositionPlan, compute_stride, plan, reconstruct_indices

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig",
    "AttentionDiagnostics",
    "ContentMode",
    "ContributionReport",
    "GeneratorSpec",
    "HarnessSpec",
    "InterScores",
    "IntraScores",
    "Modality",
    "MultimodalSequence",
    "NormalizationMode",
    "PairLayout",
    "PositionPlan",
    "RotaryConfig",
    "SequenceMeta",
    "analyze",
    "attention_score",
    "compute_stride",
    "covariance_summary",
    "directional_scores",
    "entropy_proxy",
    "fuse_contributions",
    "generate_synthetic",
    "harness_layout",
    "inter_contributions",
    "intra_contributions",
    "load_sequence",
    "oracle_pipeline",
    "pathway_scores",
    "plan",
    "reconstruct_indices",
    "rotate",
    "rotate_rows",
    "run_harness",
    "save_sequence",
    "similarity_matrix",
    "__version__",
]
