"""Per-modality information contribution estimation.

Two pathways are computed from raw embeddings and fused:

* intra-modal: half the log-determinant of each modality's regularized
  empirical covariance, a Gaussian differential-entropy proxy for how much
  variation the modality carries internally;
* inter-modal: mean-of-max cross-modal cosine alignment, measuring how
  strongly each modality interacts with the other.

A geometric mean with weight ``alpha`` fuses the two normalized scores into
unified contributions that sum to one across modalities. The text/vision
ratio of those contributions later becomes the visual positional stride.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import (
    AlphaOutOfRangeError,
    DimensionMismatchError,
    EmptySegmentError,
    FactorizationError,
    NonFiniteValueError,
    NonPositiveContributionError,
    NonPositiveEntropyError,
    ValidationError,
)
from .seqio import Modality, MultimodalSequence

DEFAULT_ALPHA = 0.5
DEFAULT_EPSILON = 1e-6
DEFAULT_CLAMP_FLOOR = 1e-6
DEFAULT_GRAM_THRESHOLD = 512

# shift applied after min-max rescaling of entropies, before normalization
SHIFT_FLOOR = 0.1
# spread below which the two entropies are treated as tied
SPREAD_CUTOFF = 1e-12
# floor applied to normalized contributions before exponentiation
FUSION_FLOOR = 1e-9


class NormalizationMode(enum.Enum):
    RAW_RATIO = "raw"
    SHIFT_MINMAX = "shift"


@dataclass(frozen=True)
class AnalysisConfig:
    alpha: float = DEFAULT_ALPHA
    epsilon: float = DEFAULT_EPSILON
    normalization_mode: NormalizationMode = NormalizationMode.SHIFT_MINMAX
    clamp_floor: float = DEFAULT_CLAMP_FLOOR
    gram_threshold: int = DEFAULT_GRAM_THRESHOLD

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise AlphaOutOfRangeError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not self.epsilon > 0:
            raise ValidationError(f"epsilon must be positive, got {self.epsilon}")
        if not self.clamp_floor > 0:
            raise ValidationError(f"clamp_floor must be positive, got {self.clamp_floor}")
        if self.gram_threshold < 0:
            raise ValidationError(f"gram_threshold must be non-negative, got {self.gram_threshold}")


@dataclass(frozen=True)
class CovarianceSummary:
    """Covariance statistics of one modality, in direct or Gram form.

    ``sigma`` is the d x d covariance with the 1/n estimator, materialized
    only when d is at or below the Gram threshold. Above the threshold only
    the spectrum is kept: for n < d the eigenvalues of the n x n Gram matrix
    (1/n) E~ E~^T, whose nonzero part equals the covariance spectrum, and
    for n >= d the eigenvalues of the covariance itself.
    """

    modality: Modality
    n: int
    mean: np.ndarray
    sigma: np.ndarray | None
    gram_eigenvalues: np.ndarray | None

    @property
    def d(self) -> int:
        return self.mean.shape[0]


@dataclass(frozen=True)
class IntraScores:
    h: dict[Modality, float]
    i_intra: dict[Modality, float]
    epsilon: float
    normalization_mode: NormalizationMode


@dataclass(frozen=True)
class InterScores:
    s_text: float
    s_vision: float
    i_inter: dict[Modality, float]
    clamp_floor: float


@dataclass(frozen=True)
class ContributionReport:
    intra: IntraScores
    inter: InterScores
    alpha: float
    c: dict[Modality, float]
    c_tilde: dict[Modality, float]


def covariance_summary(seg: np.ndarray, modality: Modality,
                       gram_threshold: int = DEFAULT_GRAM_THRESHOLD) -> CovarianceSummary:
    """Mean and covariance of one modality's embedding rows.

    Uses the biased 1/n estimator. When d exceeds ``gram_threshold`` the
    d x d matrix is not stored; only eigenvalues are kept, computed from
    the cheaper of the Gram (n < d) and covariance (n >= d) forms.
    """
    seg = np.asarray(seg, dtype=np.float64)
    if seg.ndim != 2 or seg.shape[0] < 1:
        raise EmptySegmentError(f"{modality.value} segment must have at least one row")
    if not np.isfinite(seg).all():
        raise NonFiniteValueError(f"{modality.value} segment contains non-finite values")

    n, d = seg.shape
    mean = seg.mean(axis=0)
    centered = seg - mean

    if d <= gram_threshold:
        sigma = centered.T @ centered / n
        sigma = (sigma + sigma.T) / 2.0
        return CovarianceSummary(modality, n, mean, sigma, None)

    if n < d:
        gram = centered @ centered.T / n
    else:
        gram = centered.T @ centered / n
    gram = (gram + gram.T) / 2.0
    eigenvalues = np.clip(np.linalg.eigvalsh(gram), 0.0, None)
    return CovarianceSummary(modality, n, mean, None, eigenvalues)


def entropy_proxy(cov: CovarianceSummary, epsilon: float = DEFAULT_EPSILON) -> float:
    """Entropy proxy H = (1/2) log det(Sigma + epsilon I).

    The direct path factors Sigma + epsilon I with a Cholesky decomposition
    (strictly positive definite after regularization) and falls back to a
    symmetric eigendecomposition with eigenvalues clamped at zero. The
    spectral path evaluates (1/2) [sum_i log(lambda_i + eps) + (d - r) log eps]
    over the r stored eigenvalues, the remaining d - r directions being exact
    zeros of a rank-deficient covariance.
    """
    if not epsilon > 0:
        raise ValidationError(f"epsilon must be positive, got {epsilon}")

    if cov.gram_eigenvalues is not None:
        lam = cov.gram_eigenvalues
        r = lam.shape[0]
        return 0.5 * (float(np.log(lam + epsilon).sum()) + (cov.d - r) * float(np.log(epsilon)))

    regularized = cov.sigma + epsilon * np.eye(cov.d)
    try:
        chol = np.linalg.cholesky(regularized)
        return float(np.log(np.diag(chol)).sum())
    except np.linalg.LinAlgError:
        pass
    try:
        lam = np.clip(np.linalg.eigvalsh(cov.sigma), 0.0, None)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(
            f"covariance of {cov.modality.value} admits neither Cholesky nor eigendecomposition"
        ) from exc
    return 0.5 * float(np.log(lam + epsilon).sum())


def intra_contributions(h_text: float, h_vision: float,
                        mode: NormalizationMode = NormalizationMode.SHIFT_MINMAX,
                        epsilon: float = DEFAULT_EPSILON) -> IntraScores:
    """Normalize the two entropy proxies into intra-modal contributions.

    ``RAW_RATIO`` divides each H by their sum and is only defined when both
    are positive; log-determinants of regularized covariances are routinely
    negative, where the raw ratio would invert the ordering. The default
    ``SHIFT_MINMAX`` rescales both entropies to [0, 1] over their spread,
    adds a floor of 0.1, and normalizes, which preserves the ordering for
    any sign. A spread below 1e-12 is treated as a tie.
    """
    if not (np.isfinite(h_text) and np.isfinite(h_vision)):
        raise NonFiniteValueError("entropy proxies must be finite")

    if mode is NormalizationMode.RAW_RATIO:
        if h_text <= 0 or h_vision <= 0:
            raise NonPositiveEntropyError(
                f"raw-ratio normalization requires positive entropies, got ({h_text}, {h_vision})"
            )
        total = h_text + h_vision
        weights = (h_text / total, h_vision / total)
    else:
        lo = min(h_text, h_vision)
        spread = max(h_text, h_vision) - lo
        if spread < SPREAD_CUTOFF:
            weights = (0.5, 0.5)
        else:
            shifted_text = (h_text - lo) / spread + SHIFT_FLOOR
            shifted_vision = (h_vision - lo) / spread + SHIFT_FLOOR
            total = shifted_text + shifted_vision
            weights = (shifted_text / total, shifted_vision / total)

    return IntraScores(
        h={Modality.TEXT: float(h_text), Modality.VISION: float(h_vision)},
        i_intra={Modality.TEXT: weights[0], Modality.VISION: weights[1]},
        epsilon=epsilon,
        normalization_mode=mode,
    )


def similarity_matrix(text: np.ndarray, vision: np.ndarray) -> np.ndarray:
    """Cross-modal cosine similarity matrix of shape (n_t, n_v).

    Rows are L2-normalized first; a zero-norm row is kept as the zero
    vector, so its similarities are zero (padding rows occur in real dumps).
    """
    text = np.asarray(text, dtype=np.float64)
    vision = np.asarray(vision, dtype=np.float64)
    if text.ndim != 2 or vision.ndim != 2:
        raise DimensionMismatchError("similarity inputs must be 2-dimensional")
    if text.shape[0] < 1 or vision.shape[0] < 1:
        raise EmptySegmentError("similarity inputs must each have at least one row")
    if text.shape[1] != vision.shape[1]:
        raise DimensionMismatchError(
            f"embedding dimensions differ: text {text.shape[1]}, vision {vision.shape[1]}"
        )
    if not (np.isfinite(text).all() and np.isfinite(vision).all()):
        raise NonFiniteValueError("similarity inputs contain non-finite values")

    def unit_rows(mat):
        norms = np.linalg.norm(mat, axis=1, keepdims=True)
        return np.divide(mat, norms, out=np.zeros_like(mat), where=norms > 0)

    sim = unit_rows(text) @ unit_rows(vision).T
    return np.clip(sim, -1.0, 1.0)


def directional_scores(sim: np.ndarray) -> tuple[float, float]:
    """Mean-of-max interaction scores (text-to-vision, vision-to-text)."""
    sim = np.asarray(sim, dtype=np.float64)
    if sim.ndim != 2 or sim.size == 0:
        raise EmptySegmentError("similarity matrix must be non-empty")
    return float(sim.max(axis=1).mean()), float(sim.max(axis=0).mean())


def inter_contributions(s_text: float, s_vision: float,
                        clamp_floor: float = DEFAULT_CLAMP_FLOOR) -> InterScores:
    """Normalize directional scores into inter-modal contributions.

    Cosine scores can be non-positive; each is clamped below at
    ``clamp_floor`` before taking the ratio so the contributions stay
    positive. When both scores clamp the result is an even split.
    """
    if not clamp_floor > 0:
        raise ValidationError(f"clamp_floor must be positive, got {clamp_floor}")
    for name, value in (("s_text", s_text), ("s_vision", s_vision)):
        if not np.isfinite(value) or abs(value) > 1.0 + 1e-9:
            raise ValidationError(f"{name} must be a cosine score in [-1, 1], got {value}")

    clamped_text = max(float(s_text), clamp_floor)
    clamped_vision = max(float(s_vision), clamp_floor)
    total = clamped_text + clamped_vision
    return InterScores(
        s_text=float(s_text),
        s_vision=float(s_vision),
        i_inter={Modality.TEXT: clamped_text / total, Modality.VISION: clamped_vision / total},
        clamp_floor=clamp_floor,
    )


def fuse_contributions(intra: IntraScores, inter: InterScores,
                       alpha: float = DEFAULT_ALPHA) -> ContributionReport:
    """Fuse the two pathways with a geometric mean and renormalize.

    C_m = (I_m^intra)^alpha * (I_m^inter)^(1-alpha), then divided by the
    sum over modalities. Inputs are floored at 1e-9 before exponentiation
    so the endpoints alpha in {0, 1} stay well-defined.
    """
    if not 0.0 <= alpha <= 1.0:
        raise AlphaOutOfRangeError(f"alpha must lie in [0, 1], got {alpha}")

    for name, scores in (("i_intra", intra.i_intra), ("i_inter", inter.i_inter)):
        values = [scores[m] for m in Modality]
        if any(v < 0 for v in values):
            raise NonPositiveContributionError(f"{name} has a negative entry: {values}")
        if abs(sum(values) - 1.0) > 1e-9:
            raise NonPositiveContributionError(f"{name} must sum to 1, got {sum(values)!r}")

    fused = {}
    for m in Modality:
        a = max(intra.i_intra[m], FUSION_FLOOR)
        b = max(inter.i_inter[m], FUSION_FLOOR)
        fused[m] = a ** alpha * b ** (1.0 - alpha)
    total = sum(fused[m] for m in Modality)
    unified = {m: fused[m] / total for m in Modality}
    return ContributionReport(intra=intra, inter=inter, alpha=float(alpha), c=fused, c_tilde=unified)


def pathway_scores(seq: MultimodalSequence,
                   config: AnalysisConfig | None = None) -> tuple[IntraScores, InterScores]:
    """Evaluate both pathways on a sequence, before fusion.

    All text segments are pooled into one matrix and likewise for vision;
    the statistics are defined per modality, not per segment.
    """
    cfg = config or AnalysisConfig()
    text = seq.pooled(Modality.TEXT)
    vision = seq.pooled(Modality.VISION)

    h_text = entropy_proxy(covariance_summary(text, Modality.TEXT, cfg.gram_threshold), cfg.epsilon)
    h_vision = entropy_proxy(covariance_summary(vision, Modality.VISION, cfg.gram_threshold), cfg.epsilon)
    intra = intra_contributions(h_text, h_vision, cfg.normalization_mode, cfg.epsilon)

    s_text, s_vision = directional_scores(similarity_matrix(text, vision))
    inter = inter_contributions(s_text, s_vision, cfg.clamp_floor)
    return intra, inter


def analyze(seq: MultimodalSequence, config: AnalysisConfig | None = None) -> ContributionReport:
    """Run the full contribution pipeline on one sequence."""
    cfg = config or AnalysisConfig()
    intra, inter = pathway_scores(seq, cfg)
    return fuse_contributions(intra, inter, cfg.alpha)
