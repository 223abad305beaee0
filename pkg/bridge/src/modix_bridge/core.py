"""Foreign-callable layer over the rescaling core.

The core is driven exclusively through its external interfaces: embedding
containers written by this package and the ``modix`` command line invoked
as a subprocess. Results therefore match the CLI byte for byte. Every call
returns a result object carrying a ``(code, message)`` pair that mirrors
the CLI exit-code contract (0 ok, 2 validation, 3 I/O, 4 numerical); no
core exception ever propagates to the host.

``analyze_v1`` and ``rescale_v1`` are the stable versioned entry points;
``BridgeHandle`` methods are thin sugar over them.
"""

from __future__ import annotations

import json
import struct
import subprocess
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

OK = 0
VALIDATION = 2
IO = 3
NUMERICAL = 4

# handle config keys forwarded to the CLI, in flag form
_FLAG_KEYS = {
    "alpha": "--alpha",
    "epsilon": "--epsilon",
    "normalization": "--normalization",
    "clamp_floor": "--clamp-floor",
    "gram_threshold": "--gram-threshold",
}


@dataclass(frozen=True)
class AnalyzeResult:
    code: int
    message: str
    raw: bytes | None = None      # byte-exact report, as the CLI wrote it
    document: dict | None = None

    @property
    def ok(self) -> bool:
        return self.code == OK


@dataclass(frozen=True)
class RescaleResult:
    code: int
    message: str
    indices: np.ndarray | None = None

    @property
    def ok(self) -> bool:
        return self.code == OK


class BridgeHandle:
    """One configured connection to the core.

    Not shareable across threads; use one handle per thread. After
    ``release`` every call fails cleanly with a validation result.
    """

    def __init__(self, config: dict | None = None, command: list[str] | None = None):
        self.config = dict(config or {})
        self._command = list(command) if command else [sys.executable, "-m", "modix.cli"]
        self._released = False

    def release(self) -> None:
        self._released = True

    @property
    def released(self) -> bool:
        return self._released

    def __enter__(self) -> "BridgeHandle":
        return self

    def __exit__(self, *exc) -> None:
        self.release()

    def analyze(self, text_matrix, vision_matrix) -> AnalyzeResult:
        return analyze_v1(self, text_matrix, vision_matrix)

    def rescale(self, text_count: int, vision_count: int, delta: float | None = None) -> RescaleResult:
        return rescale_v1(self, text_count, vision_count, delta)


def open_bridge(config: dict | None = None, command: list[str] | None = None) -> BridgeHandle:
    return BridgeHandle(config, command)


def _config_flags(config: dict) -> list[str]:
    flags = []
    for key, flag in _FLAG_KEYS.items():
        if key in config:
            flags += [flag, str(config[key])]
    return flags


def _run(handle: BridgeHandle, args: list[str]):
    return subprocess.run(handle._command + args, capture_output=True)


def _failure(result_type, completed) -> "AnalyzeResult | RescaleResult":
    message = completed.stderr.decode("utf-8", "replace").strip() or "core command failed"
    code = completed.returncode if completed.returncode in (VALIDATION, IO, NUMERICAL) else NUMERICAL
    return result_type(code=code, message=message)


def _check_matrix(name: str, value) -> tuple[np.ndarray | None, str]:
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        return None, f"DimensionMismatch: {name} must be a non-empty 2-d matrix, got shape {arr.shape}"
    if not np.isfinite(arr).all():
        return None, f"NonFiniteValue: {name} contains NaN or infinite values"
    return arr, ""


def analyze_v1(handle: BridgeHandle, text_matrix, vision_matrix) -> AnalyzeResult:
    """Contribution report for two embedding matrices, as a structured document."""
    if handle.released:
        return AnalyzeResult(VALIDATION, "InvalidHandle: handle was released")
    text, problem = _check_matrix("text_matrix", text_matrix)
    if text is None:
        return AnalyzeResult(VALIDATION, problem)
    vision, problem = _check_matrix("vision_matrix", vision_matrix)
    if vision is None:
        return AnalyzeResult(VALIDATION, problem)
    if text.shape[1] != vision.shape[1]:
        return AnalyzeResult(
            VALIDATION,
            f"DimensionMismatch: embedding dimensions differ: text {text.shape[1]}, "
            f"vision {vision.shape[1]}",
        )

    try:
        with tempfile.TemporaryDirectory(prefix="modix-bridge-") as workdir:
            container = Path(workdir) / "input.memb"
            output = Path(workdir) / "report.json"
            from . import memb
            memb.write(container, text, vision)
            completed = _run(handle, ["analyze", "--input", str(container),
                                      "--output", str(output), *_config_flags(handle.config)])
            if completed.returncode != 0:
                return _failure(AnalyzeResult, completed)
            raw = output.read_bytes()
    except (OSError, ValueError) as exc:
        return AnalyzeResult(IO if isinstance(exc, OSError) else VALIDATION, str(exc))
    return AnalyzeResult(OK, "ok", raw=raw, document=json.loads(raw))


def rescale_v1(handle: BridgeHandle, text_count: int, vision_count: int,
               delta: float | None = None) -> RescaleResult:
    """Adjusted float64 position indices for a [text; vision] layout.

    ``delta`` wins over a ``delta_override`` entry in the handle config;
    with neither, the call fails (a contribution-derived stride needs
    embeddings, which this entry point does not take).
    """
    if handle.released:
        return RescaleResult(VALIDATION, "InvalidHandle: handle was released")
    if text_count < 1 or vision_count < 1:
        return RescaleResult(VALIDATION, "InvalidSequence: token counts must be at least 1")
    if delta is None:
        delta = handle.config.get("delta_override")
    if delta is None:
        return RescaleResult(VALIDATION, "InvalidStride: no explicit delta and no delta_override configured")
    delta = float(delta)
    if not np.isfinite(delta) or delta <= 0:
        return RescaleResult(VALIDATION, f"InvalidStride: delta must be finite and positive, got {delta}")

    try:
        with tempfile.TemporaryDirectory(prefix="modix-bridge-") as workdir:
            container = Path(workdir) / "layout.memb"
            output = Path(workdir) / "indices.bin"
            from . import memb
            # content never influences indices under an explicit stride;
            # a zero container only carries the layout
            memb.write(container, np.zeros((text_count, 2)), np.zeros((vision_count, 2)))
            completed = _run(handle, ["rescale", "--input", str(container),
                                      "--delta-override", repr(delta),
                                      "--format", "binary-indices", "--output", str(output)])
            if completed.returncode != 0:
                return _failure(RescaleResult, completed)
            blob = output.read_bytes()
    except (OSError, ValueError) as exc:
        return RescaleResult(IO if isinstance(exc, OSError) else VALIDATION, str(exc))

    if len(blob) < 8:
        return RescaleResult(NUMERICAL, "core returned a malformed index vector")
    (count,) = struct.unpack_from("<Q", blob, 0)
    if len(blob) != 8 + 8 * count or count != text_count + vision_count:
        return RescaleResult(NUMERICAL, f"core returned {count} indices for "
                                        f"{text_count + vision_count} tokens")
    indices = np.frombuffer(blob, dtype="<f8", count=count, offset=8).astype(np.float64)
    return RescaleResult(OK, "ok", indices=indices)
