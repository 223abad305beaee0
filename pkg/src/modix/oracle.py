"""Brute-force re-implementation of the full pipeline, used as a test oracle.

Everything here is deliberately naive and shares no computation with the
main path: covariance by explicit O(n d^2) accumulation over Python lists,
the log-determinant through an eigendecomposition of the regularized
covariance only, cosine similarity through explicit n_t x n_v loops, and
index reconstruction by stepwise accumulation. Sizes are capped so the
loops stay cheap.
"""

from __future__ import annotations

import math

import numpy as np

from .contribution import (
    AnalysisConfig,
    ContributionReport,
    InterScores,
    IntraScores,
    NormalizationMode,
)
from .errors import NonPositiveEntropyError, OracleSizeExceededError
from .seqio import Modality, MultimodalSequence
from .stride import PositionPlan

MAX_TOKENS = 256
MAX_DIM = 64


def _pooled_rows(seq: MultimodalSequence, modality: Modality) -> list[list[float]]:
    rows: list[list[float]] = []
    for seg_modality, matrix in seq.segments:
        if seg_modality is modality:
            for row in matrix:
                rows.append([float(x) for x in row])
    return rows


def _entropy(rows: list[list[float]], epsilon: float) -> float:
    n = len(rows)
    d = len(rows[0])
    mean = [sum(row[j] for row in rows) / n for j in range(d)]
    centered = [[row[j] - mean[j] for j in range(d)] for row in rows]
    cov = [[0.0] * d for _ in range(d)]
    for row in centered:
        for i in range(d):
            left = row[i]
            for j in range(d):
                cov[i][j] += left * row[j]
    regularized = np.array(cov, dtype=np.float64) / n + epsilon * np.eye(d)
    eigenvalues = np.linalg.eigvalsh(regularized)
    return 0.5 * sum(math.log(val) for val in eigenvalues)


def _intra(h_text: float, h_vision: float, mode: NormalizationMode) -> tuple[float, float]:
    # normalization constants are repeated literally on purpose: the oracle
    # must catch a wrong constant in the main path, not inherit it
    if mode is NormalizationMode.RAW_RATIO:
        if h_text <= 0 or h_vision <= 0:
            raise NonPositiveEntropyError("raw-ratio normalization requires positive entropies")
        return h_text / (h_text + h_vision), h_vision / (h_text + h_vision)
    lo = min(h_text, h_vision)
    spread = max(h_text, h_vision) - lo
    if spread < 1e-12:
        return 0.5, 0.5
    a = (h_text - lo) / spread + 0.1
    b = (h_vision - lo) / spread + 0.1
    return a / (a + b), b / (a + b)


def _unit(row: list[float]) -> list[float]:
    norm = math.sqrt(sum(x * x for x in row))
    if norm == 0.0:
        return [0.0] * len(row)
    return [x / norm for x in row]


def _directional(text: list[list[float]], vision: list[list[float]]) -> tuple[float, float]:
    unit_text = [_unit(row) for row in text]
    unit_vision = [_unit(row) for row in vision]
    sim = [[min(1.0, max(-1.0, sum(a * b for a, b in zip(t, v)))) for v in unit_vision]
           for t in unit_text]
    row_max_mean = sum(max(row) for row in sim) / len(sim)
    col_max_mean = sum(max(sim[i][j] for i in range(len(sim))) for j in range(len(sim[0]))) / len(sim[0])
    return row_max_mean, col_max_mean


def oracle_pipeline(seq: MultimodalSequence,
                    config: AnalysisConfig | None = None) -> tuple[ContributionReport, PositionPlan]:
    """Recompute analysis and index reconstruction the slow, obvious way."""
    cfg = config or AnalysisConfig()
    if seq.n_tokens > MAX_TOKENS or seq.d > MAX_DIM:
        raise OracleSizeExceededError(
            f"oracle accepts at most {MAX_TOKENS} tokens and dimension {MAX_DIM}, "
            f"got N={seq.n_tokens}, d={seq.d}"
        )

    text = _pooled_rows(seq, Modality.TEXT)
    vision = _pooled_rows(seq, Modality.VISION)

    h_text = _entropy(text, cfg.epsilon)
    h_vision = _entropy(vision, cfg.epsilon)
    i_text, i_vision = _intra(h_text, h_vision, cfg.normalization_mode)
    intra = IntraScores(
        h={Modality.TEXT: h_text, Modality.VISION: h_vision},
        i_intra={Modality.TEXT: i_text, Modality.VISION: i_vision},
        epsilon=cfg.epsilon,
        normalization_mode=cfg.normalization_mode,
    )

    s_text, s_vision = _directional(text, vision)
    clamped_text = max(s_text, cfg.clamp_floor)
    clamped_vision = max(s_vision, cfg.clamp_floor)
    inter = InterScores(
        s_text=s_text,
        s_vision=s_vision,
        i_inter={Modality.TEXT: clamped_text / (clamped_text + clamped_vision),
                 Modality.VISION: clamped_vision / (clamped_text + clamped_vision)},
        clamp_floor=cfg.clamp_floor,
    )

    fused = {}
    for m in Modality:
        a = max(intra.i_intra[m], 1e-9)
        b = max(inter.i_inter[m], 1e-9)
        fused[m] = math.pow(a, cfg.alpha) * math.pow(b, 1.0 - cfg.alpha)
    total = fused[Modality.TEXT] + fused[Modality.VISION]
    report = ContributionReport(
        intra=intra, inter=inter, alpha=cfg.alpha,
        c=fused, c_tilde={m: fused[m] / total for m in Modality},
    )

    delta = report.c_tilde[Modality.TEXT] / report.c_tilde[Modality.VISION]
    indices = []
    for modality, count in seq.layout:
        step = 1.0 if modality is Modality.TEXT else delta
        for _ in range(count):
            indices.append(0.0 if not indices else indices[-1] + step)
    plan = PositionPlan(delta_text=1.0, delta_vision=delta,
                        indices=np.array(indices, dtype=np.float64), layout=seq.layout)
    return report, plan
