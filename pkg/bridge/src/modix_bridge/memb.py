"""Standalone MEMB v1 writer.

Implements the container format from its published layout (little-endian:
magic "MEMB", u32 version 1, u32 d, u32 segment count; per segment u8
modality code, 3 zero bytes, u64 token count; float32 row-major payloads
in header order). The bridge must not import the core, so this is its own
encoder, exactly as a non-Python host would carry one.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"MEMB"
VERSION = 1
TEXT_CODE = 0
VISION_CODE = 1

_HEADER = struct.Struct("<4sIII")
_SEGMENT_HEADER = struct.Struct("<B3sQ")


def encode(segments: list[tuple[int, np.ndarray]]) -> bytes:
    """Encode (modality_code, matrix) segments into container bytes."""
    if not segments:
        raise ValueError("at least one segment is required")
    dims = {matrix.shape[1] for _, matrix in segments}
    if len(dims) != 1:
        raise ValueError(f"segments disagree on embedding dimension: {sorted(dims)}")
    (d,) = dims

    blob = bytearray()
    blob += _HEADER.pack(MAGIC, VERSION, d, len(segments))
    payloads = []
    for code, matrix in segments:
        if code not in (TEXT_CODE, VISION_CODE):
            raise ValueError(f"unknown modality code {code}")
        as32 = np.ascontiguousarray(matrix, dtype=np.float32)
        if not np.isfinite(as32).all():
            raise ValueError("segment contains values not representable as finite float32")
        blob += _SEGMENT_HEADER.pack(code, b"\x00\x00\x00", matrix.shape[0])
        payloads.append(as32.tobytes(order="C"))
    for payload in payloads:
        blob += payload
    return bytes(blob)


def write(path, text_matrix: np.ndarray, vision_matrix: np.ndarray) -> None:
    """Write the canonical [text; vision] two-segment container."""
    with open(path, "wb") as fh:
        fh.write(encode([(TEXT_CODE, text_matrix), (VISION_CODE, vision_matrix)]))
