"""Adaptive visual stride and positional index reconstruction.

The visual stride is the ratio of unified text to vision contributions;
text always keeps stride 1 to preserve the pretrained positional structure
of the language backbone. Indices are rebuilt piecewise: within a segment
consecutive tokens advance by that segment's stride, and each segment
continues from the last index of the previous one. Indices are real-valued
by design; rounding would destroy the stride semantics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contribution import AnalysisConfig, ContributionReport, analyze
from .errors import EmptyLayoutError, InvalidStrideError, ZeroContributionError
from .seqio import Modality, MultimodalSequence

# optional guard against extreme strides; disabled unless passed explicitly
DEFAULT_STRIDE_BOUNDS = (0.1, 10.0)


@dataclass(frozen=True)
class PositionPlan:
    """Per-modality strides plus the reconstructed index vector."""

    delta_text: float
    delta_vision: float
    indices: np.ndarray
    layout: tuple[tuple[Modality, int], ...]

    def __post_init__(self):
        indices = np.ascontiguousarray(np.asarray(self.indices, dtype=np.float64))
        indices.flags.writeable = False
        object.__setattr__(self, "indices", indices)

    @property
    def n_tokens(self) -> int:
        return int(self.indices.shape[0])


def compute_stride(report: ContributionReport,
                   bounds: tuple[float, float] | None = None) -> float:
    """Visual stride = C~_text / C~_vision, optionally clamped into ``bounds``."""
    c_text = report.c_tilde[Modality.TEXT]
    c_vision = report.c_tilde[Modality.VISION]
    if c_text <= 0 or c_vision <= 0:
        raise ZeroContributionError(
            f"unified contributions must be positive, got ({c_text}, {c_vision})"
        )
    delta = c_text / c_vision
    if bounds is not None:
        lo, hi = bounds
        delta = min(max(delta, lo), hi)
    return float(delta)


def reconstruct_indices(layout, delta_vision: float) -> PositionPlan:
    """Rebuild the positional index vector for an ordered segment layout.

    The first token sits at index 0. Within a run, text advances by exactly
    1 and vision by ``delta_vision``; the first token of every later segment
    sits at the previous segment's last index plus the new segment's stride.
    For the canonical [text; vision] layout this reduces to p_i = i for
    i < n_t and p_i = (n_t - 1) + delta_vision * (i - n_t + 1) afterwards.
    """
    if not (np.isfinite(delta_vision) and delta_vision > 0):
        raise InvalidStrideError(f"delta_vision must be finite and positive, got {delta_vision}")
    layout = tuple((modality, int(count)) for modality, count in layout)
    if len(layout) == 0:
        raise EmptyLayoutError("layout must contain at least one segment")
    if any(count < 1 for _, count in layout):
        raise EmptyLayoutError("every layout segment needs a positive token count")

    pieces = []
    last = None
    for modality, count in layout:
        step = 1.0 if modality is Modality.TEXT else float(delta_vision)
        if last is None:
            piece = step * np.arange(count, dtype=np.float64)
        else:
            piece = last + step * np.arange(1, count + 1, dtype=np.float64)
        pieces.append(piece)
        last = float(piece[-1])

    indices = np.concatenate(pieces) if len(pieces) > 1 else pieces[0]
    return PositionPlan(delta_text=1.0, delta_vision=float(delta_vision),
                        indices=indices, layout=layout)


def plan(seq: MultimodalSequence, config: AnalysisConfig | None = None,
         bounds: tuple[float, float] | None = None) -> tuple[ContributionReport, PositionPlan]:
    """Analyze a sequence and reconstruct its adjusted position indices."""
    report = analyze(seq, config)
    delta = compute_stride(report, bounds)
    return report, reconstruct_indices(seq.layout, delta)
