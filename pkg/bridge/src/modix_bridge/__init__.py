"""Foreign-callable bridge to the modix core.

Stable v1 surface: ``open_bridge`` / ``BridgeHandle``, ``analyze_v1`` and
``rescale_v1``. All failures come back as ``(code, message)`` result
fields, never as exceptions raised out of the core.
"""

from .core import (
    IO,
    NUMERICAL,
    OK,
    VALIDATION,
    AnalyzeResult,
    BridgeHandle,
    RescaleResult,
    analyze_v1,
    open_bridge,
    rescale_v1,
)

__version__ = "0.1.0"

__all__ = [
    "AnalyzeResult",
    "BridgeHandle",
    "RescaleResult",
    "analyze_v1",
    "open_bridge",
    "rescale_v1",
    "OK",
    "VALIDATION",
    "IO",
    "NUMERICAL",
    "__version__",
]
