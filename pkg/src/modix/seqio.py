"""Multimodal embedding sequences and the MEMB container format.

MEMB v1 layout (little-endian throughout):

    magic    4 bytes   b"MEMB"
    version  u32       1
    d        u32       embedding dimension shared by all segments
    count    u32       number of segments
    per segment header:
        modality  u8   0 = text, 1 = vision
        reserved  3 bytes, zero
        n_tokens  u64
    payloads: all segments concatenated in header order,
              each n_tokens x d float32 row-major

Values are stored as float32; everything in memory is float64. Trailing
bytes after the declared payloads are rejected.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ContainerError,
    DimensionMismatchError,
    EmptySegmentError,
    InvalidGeneratorSpecError,
    InvalidSequenceError,
    MagicMismatchError,
    NonFiniteValueError,
    TrailingDataError,
    TruncatedPayloadError,
    UnsupportedVersionError,
)

MAGIC = b"MEMB"
VERSION = 1

_HEADER = struct.Struct("<4sIII")
_SEGMENT_HEADER = struct.Struct("<B3sQ")


class Modality(enum.Enum):
    TEXT = "text"
    VISION = "vision"


_MODALITY_CODE = {Modality.TEXT: 0, Modality.VISION: 1}
_CODE_MODALITY = {code: m for m, code in _MODALITY_CODE.items()}


def as_embedding_matrix(values, *, name: str = "matrix") -> np.ndarray:
    """Validate and normalize one segment of embeddings.

    Returns a read-only float64 C-contiguous array with at least one row
    and one column and only finite values.
    """
    arr = np.array(values, dtype=np.float64, order="C")  # owned copy, never aliases caller memory
    if arr.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise EmptySegmentError(f"{name} must have at least one row and one column")
    if not np.isfinite(arr).all():
        raise NonFiniteValueError(f"{name} contains NaN or infinite values")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class SequenceMeta:
    source_id: str = ""
    generator: str | None = None
    seed: int | None = None


@dataclass(frozen=True)
class MultimodalSequence:
    """Ordered modality segments of token embeddings sharing one dimension."""

    segments: tuple[tuple[Modality, np.ndarray], ...]
    meta: SequenceMeta = field(default_factory=SequenceMeta)

    def __post_init__(self):
        if len(self.segments) == 0:
            raise InvalidSequenceError("sequence must contain at least one segment")
        normalized = []
        for i, (modality, matrix) in enumerate(self.segments):
            if not isinstance(modality, Modality):
                raise InvalidSequenceError(f"segment {i} has invalid modality {modality!r}")
            normalized.append((modality, as_embedding_matrix(matrix, name=f"segment {i}")))
        dims = {m.shape[1] for _, m in normalized}
        if len(dims) != 1:
            raise DimensionMismatchError(f"segments disagree on embedding dimension: {sorted(dims)}")
        present = {modality for modality, _ in normalized}
        if present != set(Modality):
            missing = ", ".join(m.value for m in Modality if m not in present)
            raise InvalidSequenceError(f"sequence must contain every modality; missing: {missing}")
        object.__setattr__(self, "segments", tuple(normalized))

    @property
    def d(self) -> int:
        return self.segments[0][1].shape[1]

    @property
    def n_tokens(self) -> int:
        return sum(m.shape[0] for _, m in self.segments)

    @property
    def layout(self) -> tuple[tuple[Modality, int], ...]:
        return tuple((modality, m.shape[0]) for modality, m in self.segments)

    def count(self, modality: Modality) -> int:
        return sum(m.shape[0] for mod, m in self.segments if mod is modality)

    def pooled(self, modality: Modality) -> np.ndarray:
        """All rows of one modality, concatenated in segment order."""
        parts = [m for mod, m in self.segments if mod is modality]
        return np.vstack(parts) if len(parts) > 1 else parts[0]


def save_sequence(seq: MultimodalSequence, path) -> None:
    """Write a sequence as a MEMB v1 container.

    Values are narrowed to float32; inputs whose magnitude overflows
    float32 are rejected rather than silently saturated.
    """
    payloads = []
    for i, (_, matrix) in enumerate(seq.segments):
        with np.errstate(over="ignore"):
            as32 = matrix.astype(np.float32)
        if not np.isfinite(as32).all():
            raise NonFiniteValueError(f"segment {i} overflows float32 storage")
        payloads.append(as32.tobytes(order="C"))

    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, seq.d, len(seq.segments)))
        for modality, matrix in seq.segments:
            fh.write(_SEGMENT_HEADER.pack(_MODALITY_CODE[modality], b"\x00\x00\x00", matrix.shape[0]))
        for payload in payloads:
            fh.write(payload)


def load_sequence(path) -> MultimodalSequence:
    """Read and validate a MEMB v1 container."""
    with open(path, "rb") as fh:
        data = fh.read()

    if len(data) < _HEADER.size:
        raise TruncatedPayloadError(f"{path}: file shorter than the fixed header")
    magic, version, d, count = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise MagicMismatchError(f"{path}: expected magic {MAGIC!r}, found {magic!r}")
    if version != VERSION:
        raise UnsupportedVersionError(f"{path}: unsupported container version {version}")
    if d < 1:
        raise ContainerError(f"{path}: header declares embedding dimension {d}")
    if count < 1:
        raise ContainerError(f"{path}: header declares {count} segments")

    offset = _HEADER.size
    headers = []
    for i in range(count):
        if offset + _SEGMENT_HEADER.size > len(data):
            raise TruncatedPayloadError(f"{path}: segment header {i} extends past end of file")
        code, reserved, n_tokens = _SEGMENT_HEADER.unpack_from(data, offset)
        offset += _SEGMENT_HEADER.size
        if code not in _CODE_MODALITY:
            raise ContainerError(f"{path}: segment {i} has unknown modality code {code}")
        if reserved != b"\x00\x00\x00":
            raise ContainerError(f"{path}: segment {i} has nonzero reserved bytes")
        if n_tokens < 1:
            raise ContainerError(f"{path}: segment {i} declares {n_tokens} tokens")
        headers.append((_CODE_MODALITY[code], n_tokens))

    segments = []
    for i, (modality, n_tokens) in enumerate(headers):
        nbytes = n_tokens * d * 4
        if offset + nbytes > len(data):
            raise TruncatedPayloadError(
                f"{path}: segment {i} declares {n_tokens}x{d} float32 values past end of file"
            )
        raw = np.frombuffer(data, dtype="<f4", count=n_tokens * d, offset=offset)
        offset += nbytes
        values = raw.astype(np.float64).reshape(n_tokens, d)
        if not np.isfinite(values).all():
            raise NonFiniteValueError(f"{path}: segment {i} contains non-finite values")
        segments.append((modality, values))
    if offset != len(data):
        raise TrailingDataError(f"{path}: {len(data) - offset} trailing bytes after declared payloads")

    return MultimodalSequence(tuple(segments), meta=SequenceMeta(source_id=str(path)))


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters for the synthetic-sequence generator."""

    n_t: int
    n_v: int
    d: int
    text_scale: float = 1.0
    vision_rank: int = 1
    noise: float = 0.0
    seed: int = 0


def parse_generator_spec(text: str) -> GeneratorSpec:
    """Parse a comma-separated ``key=value`` spec, e.g. ``"n_t=4,n_v=8,d=6,seed=7"``."""
    fields = {"n_t": int, "n_v": int, "d": int, "text_scale": float,
              "vision_rank": int, "noise": float, "seed": int}
    kwargs = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        key, sep, value = item.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in fields:
            raise InvalidGeneratorSpecError(f"unknown generator field {item!r}")
        try:
            kwargs[key] = fields[key](value.strip())
        except ValueError as exc:
            raise InvalidGeneratorSpecError(f"bad value for {key!r}: {value!r}") from exc
    for required in ("n_t", "n_v", "d"):
        if required not in kwargs:
            raise InvalidGeneratorSpecError(f"generator spec must set {required}")
    return GeneratorSpec(**kwargs)


def generate_synthetic(spec: GeneratorSpec) -> MultimodalSequence:
    """Deterministic synthetic fixture: full-rank Gaussian text, low-rank vision.

    Text rows are iid Gaussian scaled by ``text_scale``. Vision rows lie in a
    ``vision_rank``-dimensional random subspace plus isotropic noise, which
    emulates the spatial redundancy of visual patch embeddings. Values are
    quantized to float32 so that saving and reloading is exact.
    """
    if spec.n_t < 1 or spec.n_v < 1:
        raise InvalidGeneratorSpecError("n_t and n_v must be at least 1")
    if spec.d < 2:
        raise InvalidGeneratorSpecError("d must be at least 2")
    if not 1 <= spec.vision_rank <= spec.d:
        raise InvalidGeneratorSpecError(
            f"vision_rank must lie in [1, d]; got rank {spec.vision_rank} with d {spec.d}"
        )
    if not np.isfinite(spec.text_scale) or spec.text_scale <= 0:
        raise InvalidGeneratorSpecError("text_scale must be finite and positive")
    if not np.isfinite(spec.noise) or spec.noise < 0:
        raise InvalidGeneratorSpecError("noise must be finite and non-negative")
    if spec.seed < 0:
        raise InvalidGeneratorSpecError("seed must be non-negative")

    rng = np.random.default_rng(spec.seed)
    text = spec.text_scale * rng.standard_normal((spec.n_t, spec.d))
    basis = rng.standard_normal((spec.vision_rank, spec.d))
    vision = rng.standard_normal((spec.n_v, spec.vision_rank)) @ basis
    if spec.noise > 0:
        vision = vision + spec.noise * rng.standard_normal((spec.n_v, spec.d))

    # storage precision: round-trips through the container bit-exactly
    text = text.astype(np.float32).astype(np.float64)
    vision = vision.astype(np.float32).astype(np.float64)

    descr = (f"n_t={spec.n_t},n_v={spec.n_v},d={spec.d},text_scale={spec.text_scale!r},"
             f"vision_rank={spec.vision_rank},noise={spec.noise!r},seed={spec.seed}")
    meta = SequenceMeta(source_id=f"synthetic:{descr}", generator=descr, seed=spec.seed)
    return MultimodalSequence(((Modality.TEXT, text), (Modality.VISION, vision)), meta=meta)
