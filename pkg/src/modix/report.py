"""Machine-readable report writers with pinned, byte-stable formatting.

JSON field order and number formatting are fixed so identical inputs yield
byte-identical reports (golden-file friendly): keys appear in insertion
order, floats are rendered with 17 significant digits (lossless for
float64), and files end with a single newline.
"""

from __future__ import annotations

import json
import math
import struct

import numpy as np

from .contribution import ContributionReport
from .errors import ValidationError
from .seqio import Modality
from .stride import PositionPlan


def format_number(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"reports cannot contain non-finite number {value}")
    return format(value, ".17g")


def _render(value, indent: int, pad: str) -> str:
    if value is None:
        return "null"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (int, float, np.integer, np.floating)):
        return format_number(value)
    inner = pad * (indent + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{inner}{json.dumps(str(key))}: {_render(val, indent + 1, pad)}"
                 for key, val in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad * indent + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        seq = list(value)
        if not seq:
            return "[]"
        items = [f"{inner}{_render(val, indent + 1, pad)}" for val in seq]
        return "[\n" + ",\n".join(items) + "\n" + pad * indent + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(document: dict) -> str:
    """Deterministic pretty-printed JSON, terminated by one newline."""
    return _render(document, 0, "  ") + "\n"


def contribution_document(report: ContributionReport) -> dict:
    """Fixed-field-order document for one contribution report."""
    text, vision = Modality.TEXT, Modality.VISION
    return {
        "alpha": report.alpha,
        "epsilon": report.intra.epsilon,
        "normalization_mode": report.intra.normalization_mode.value,
        "h": {"text": report.intra.h[text], "vision": report.intra.h[vision]},
        "i_intra": {"text": report.intra.i_intra[text], "vision": report.intra.i_intra[vision]},
        "s_raw": {"text_to_vision": report.inter.s_text, "vision_to_text": report.inter.s_vision},
        "i_inter": {"text": report.inter.i_inter[text], "vision": report.inter.i_inter[vision]},
        "c": {"text": report.c[text], "vision": report.c[vision]},
        "c_tilde": {"text": report.c_tilde[text], "vision": report.c_tilde[vision]},
    }


def plan_document(plan: PositionPlan) -> dict:
    return {
        "delta_text": plan.delta_text,
        "delta_vision": plan.delta_vision,
        "layout": [[modality.value, count] for modality, count in plan.layout],
        "indices": list(plan.indices),
    }


def plan_csv(plan: PositionPlan) -> str:
    lines = ["token,modality,position"]
    token = 0
    for modality, count in plan.layout:
        for _ in range(count):
            lines.append(f"{token},{modality.value},{format_number(plan.indices[token])}")
            token += 1
    return "\n".join(lines) + "\n"


def pack_indices(indices) -> bytes:
    """Raw little-endian vector: u64 count then float64 values."""
    values = np.ascontiguousarray(np.asarray(indices, dtype="<f8").reshape(-1))
    return struct.pack("<Q", values.shape[0]) + values.tobytes()


def unpack_indices(blob: bytes) -> np.ndarray:
    if len(blob) < 8:
        raise ValidationError("index vector shorter than its length prefix")
    (count,) = struct.unpack_from("<Q", blob, 0)
    if len(blob) != 8 + 8 * count:
        raise ValidationError(f"index vector declares {count} values but has {len(blob) - 8} bytes")
    return np.frombuffer(blob, dtype="<f8", count=count, offset=8).astype(np.float64)
