"""Single-layer attention simulator for stride-reallocation experiments.

A verification instrument, not an inference engine: per-token query/key
content is synthetic, rotation uses the configured rotary parameters at the
supplied (possibly rescaled) positions, and row-softmax attention weights
are reduced into per-modality attention mass. In tied-content mode every
token shares one random unit vector, so differences in attention are caused
by positional geometry alone; that is the regime in which widening the
visual stride must shift attention mass away from vision.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, LengthMismatchError, ValidationError
from .rope import RotaryConfig, rotate_rows
from .seqio import Modality
from .stride import PositionPlan


class ContentMode(enum.Enum):
    TIED = "tied"
    RANDOM = "random"


@dataclass(frozen=True)
class HarnessSpec:
    n_t: int
    n_v: int
    head_dim: int = 64
    content_mode: ContentMode = ContentMode.TIED
    causal: bool = False
    seeds: tuple[int, ...] = (0,)

    def __post_init__(self):
        if self.n_t < 0 or self.n_v < 0 or self.n_t + self.n_v < 1:
            raise ValidationError("token counts must be non-negative with at least one token")
        if self.head_dim < 2 or self.head_dim % 2 != 0:
            raise ValidationError(f"head_dim must be a positive even integer, got {self.head_dim}")
        if len(self.seeds) == 0:
            raise ValidationError("at least one seed is required")
        seeds = tuple(int(s) for s in self.seeds)
        if any(s < 0 for s in seeds):
            raise ValidationError("seeds must be non-negative")
        object.__setattr__(self, "seeds", seeds)


@dataclass(frozen=True)
class AttentionDiagnostics:
    """Attention weights of one simulated run plus per-modality reductions."""

    rows: np.ndarray
    per_query_mass: dict[Modality, np.ndarray]
    total_mass: dict[Modality, float]
    scale: float
    seed: int
    layout: tuple[tuple[Modality, int], ...]

    def last_text_query_mass(self, modality: Modality) -> float:
        """Attention mass the final text query spends on ``modality``."""
        labels = modality_labels(self.layout)
        text_positions = np.flatnonzero(labels == Modality.TEXT.value)
        if text_positions.size == 0:
            raise ValidationError("layout contains no text tokens")
        return float(self.per_query_mass[modality][text_positions[-1]])


def modality_labels(layout) -> np.ndarray:
    """Per-token modality tags, expanded from a (modality, count) layout."""
    return np.repeat([modality.value for modality, _ in layout],
                     [count for _, count in layout])


def harness_layout(spec: HarnessSpec) -> tuple[tuple[Modality, int], ...]:
    """Segment layout used by the simulator.

    Causal runs place vision first so that text queries attend backward
    onto vision tokens; non-causal runs use the canonical text-first order.
    """
    if spec.causal:
        ordered = ((Modality.VISION, spec.n_v), (Modality.TEXT, spec.n_t))
    else:
        ordered = ((Modality.TEXT, spec.n_t), (Modality.VISION, spec.n_v))
    return tuple((modality, count) for modality, count in ordered if count > 0)


def run_harness(spec: HarnessSpec, plan: PositionPlan, cfg: RotaryConfig,
                seed: int | None = None) -> AttentionDiagnostics:
    """Simulate one attention layer at the plan's positions for one seed."""
    if cfg.head_dim != spec.head_dim:
        raise DimensionMismatchError(
            f"rotary head_dim {cfg.head_dim} differs from harness head_dim {spec.head_dim}"
        )
    counts = {Modality.TEXT: 0, Modality.VISION: 0}
    for modality, count in plan.layout:
        counts[modality] += count
    if counts[Modality.TEXT] != spec.n_t or counts[Modality.VISION] != spec.n_v:
        raise LengthMismatchError(
            f"plan layout has (n_t={counts[Modality.TEXT]}, n_v={counts[Modality.VISION]}), "
            f"harness expects (n_t={spec.n_t}, n_v={spec.n_v})"
        )
    n = spec.n_t + spec.n_v
    if plan.n_tokens != n:
        raise LengthMismatchError(f"plan has {plan.n_tokens} indices, harness expects {n}")

    run_seed = spec.seeds[0] if seed is None else int(seed)
    if run_seed < 0:
        raise ValidationError("seed must be non-negative")
    rng = np.random.default_rng(run_seed)
    if spec.content_mode is ContentMode.TIED:
        shared = rng.standard_normal(spec.head_dim)
        shared /= np.linalg.norm(shared)
        queries = keys = np.tile(shared, (n, 1))
    else:
        queries = rng.standard_normal((n, spec.head_dim))
        queries /= np.linalg.norm(queries, axis=1, keepdims=True)
        keys = rng.standard_normal((n, spec.head_dim))
        keys /= np.linalg.norm(keys, axis=1, keepdims=True)

    scale = 1.0 / math.sqrt(spec.head_dim)
    rotated_q = rotate_rows(queries, plan.indices, cfg)
    rotated_k = rotate_rows(keys, plan.indices, cfg)
    logits = (rotated_q @ rotated_k.T) * scale
    if spec.causal:
        logits = np.where(np.triu(np.ones((n, n), dtype=bool), 1), -np.inf, logits)

    logits = logits - logits.max(axis=1, keepdims=True)
    weights = np.exp(logits)
    weights /= weights.sum(axis=1, keepdims=True)

    labels = modality_labels(plan.layout)
    per_query = {
        m: weights[:, labels == m.value].sum(axis=1) if (labels == m.value).any()
        else np.zeros(n)
        for m in Modality
    }
    totals = {m: float(per_query[m].sum()) for m in Modality}
    return AttentionDiagnostics(rows=weights, per_query_mass=per_query, total_mass=totals,
                                scale=scale, seed=run_seed, layout=plan.layout)


def run_seed_sweep(spec: HarnessSpec, plan: PositionPlan,
                   cfg: RotaryConfig) -> list[AttentionDiagnostics]:
    """One diagnostics record per configured seed, in seed order."""
    return [run_harness(spec, plan, cfg, seed) for seed in spec.seeds]


def mean_last_text_query_mass(runs, modality: Modality) -> float:
    """Seed-averaged attention mass of the final text query on ``modality``."""
    values = [run.last_text_query_mass(modality) for run in runs]
    return float(sum(values) / len(values))
