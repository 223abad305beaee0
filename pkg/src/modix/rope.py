"""Rotary position encoding over real-valued indices.

Each consecutive pair of vector components is rotated by angle
``theta_k * p`` where ``theta_k = base^(-2(k-1)/head_dim)`` is the standard
geometric frequency schedule and ``p`` is the (possibly fractional) position.
Rotations are applied with elementwise sin/cos; no rotation matrix is ever
materialized. Because rotations compose additively, attention scores built
from rotated queries and keys depend only on the relative offset p_k - p_q.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, ValidationError

DEFAULT_BASE = 10000.0


class PairLayout(enum.Enum):
    """How vector components pair into rotation planes.

    INTERLEAVED pairs (0,1), (2,3), ...; HALF_SPLIT pairs component i with
    i + head_dim/2, as some implementations lay out memory. The choice is a
    memory convention only; all rotation algebra holds for both.
    """

    INTERLEAVED = "interleaved"
    HALF_SPLIT = "half"


@dataclass(frozen=True)
class RotaryConfig:
    head_dim: int
    base: float = DEFAULT_BASE
    pair_layout: PairLayout = PairLayout.INTERLEAVED
    frequencies: np.ndarray | None = None

    def __post_init__(self):
        if self.head_dim < 2 or self.head_dim % 2 != 0:
            raise ValidationError(f"head_dim must be a positive even integer, got {self.head_dim}")
        if not (np.isfinite(self.base) and self.base > 0):
            raise ValidationError(f"base must be finite and positive, got {self.base}")
        if self.frequencies is None:
            k = np.arange(self.head_dim // 2, dtype=np.float64)
            freqs = self.base ** (-2.0 * k / self.head_dim)
        else:
            freqs = np.asarray(self.frequencies, dtype=np.float64)
            if freqs.shape != (self.head_dim // 2,):
                raise DimensionMismatchError(
                    f"frequencies must have length head_dim/2 = {self.head_dim // 2}"
                )
            # explicit overrides may zero frequencies (the infinite-base limit)
            if (freqs < 0).any() or (np.diff(freqs) > 0).any():
                raise ValidationError("frequencies must be non-negative and non-increasing")
        freqs = np.ascontiguousarray(freqs)
        freqs.flags.writeable = False
        object.__setattr__(self, "frequencies", freqs)


@dataclass(frozen=True)
class RotatedVector:
    values: np.ndarray
    position: float


def rotate_rows(matrix: np.ndarray, positions: np.ndarray, cfg: RotaryConfig) -> np.ndarray:
    """Rotate each row of ``matrix`` at its own position. Vectorized core."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[1] != cfg.head_dim:
        raise DimensionMismatchError(
            f"expected rows of length {cfg.head_dim}, got shape {matrix.shape}"
        )
    positions = np.asarray(positions, dtype=np.float64).reshape(-1)
    if positions.shape[0] != matrix.shape[0]:
        raise DimensionMismatchError("one position is required per row")

    angles = positions[:, None] * cfg.frequencies[None, :]
    cos, sin = np.cos(angles), np.sin(angles)
    half = cfg.head_dim // 2
    if cfg.pair_layout is PairLayout.INTERLEAVED:
        first, second = matrix[:, 0::2], matrix[:, 1::2]
    else:
        first, second = matrix[:, :half], matrix[:, half:]
    rot_first = first * cos - second * sin
    rot_second = first * sin + second * cos
    out = np.empty_like(matrix)
    if cfg.pair_layout is PairLayout.INTERLEAVED:
        out[:, 0::2], out[:, 1::2] = rot_first, rot_second
    else:
        out[:, :half], out[:, half:] = rot_first, rot_second
    return out


def rotate(v: np.ndarray, p: float, cfg: RotaryConfig) -> RotatedVector:
    """Rotate one vector to position ``p``. Norm-preserving; rotate(v, 0) = v."""
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if v.shape[0] != cfg.head_dim:
        raise DimensionMismatchError(f"expected length {cfg.head_dim}, got {v.shape[0]}")
    return RotatedVector(values=rotate_rows(v[None, :], [p], cfg)[0], position=float(p))


def attention_score(q: np.ndarray, k: np.ndarray, p_q: float, p_k: float,
                    cfg: RotaryConfig) -> float:
    """Unnormalized attention logit between a rotated query and key.

    Equals the plain dot product when p_q == p_k and, up to rounding, the
    score of the unrotated query against the key rotated by p_k - p_q.
    """
    rq = rotate(q, p_q, cfg).values
    rk = rotate(k, p_k, cfg).values
    return float(rq @ rk)
