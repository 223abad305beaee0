#!/usr/bin/env python3
"""Reference integration: embedding tensors in, adjusted position ids out.

Documentation-grade script showing the intended host-side flow. It loads a
dump with ``text`` and ``vision`` arrays (an ``.npz``, or a ``.pt`` dict of
tensors when torch is installed), asks the bridge for the contribution
report and the rescaled index vector, and saves the indices where an
inference stack can pick them up as ``position_ids``.

In a RoPE-based decoder stack the injection point is wherever position ids
are materialized before rotary application, e.g.:

    report = handle.analyze(text_embeddings, vision_embeddings)
    delta = report.document["c_tilde"]["text"] / report.document["c_tilde"]["vision"]
    position_ids = handle.rescale(n_text, n_vision, delta).indices
    # feed position_ids (float64, shape [N]) to the model's rotary layer
    # in place of arange(N); rotary sin/cos accept fractional positions.

Kept out of the parity test surface on purpose; treat it as a template.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from modix_bridge import open_bridge


def load_dump(path: str):
    if path.endswith(".pt"):
        import torch  # host stack dependency, not required by the bridge

        blob = torch.load(path, map_location="cpu")
        return blob["text"].double().numpy(), blob["vision"].double().numpy()
    blob = np.load(path)
    return np.asarray(blob["text"], dtype=np.float64), np.asarray(blob["vision"], dtype=np.float64)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("dump", help=".npz (or .pt) with 'text' and 'vision' embedding arrays")
    parser.add_argument("--output", default="position_ids.npy")
    parser.add_argument("--alpha", type=float, default=None)
    args = parser.parse_args()

    text, vision = load_dump(args.dump)
    config = {} if args.alpha is None else {"alpha": args.alpha}
    with open_bridge(config) as handle:
        analyzed = handle.analyze(text, vision)
        if not analyzed.ok:
            print(f"analyze failed ({analyzed.code}): {analyzed.message}", file=sys.stderr)
            return analyzed.code
        contributions = analyzed.document["c_tilde"]
        delta = contributions["text"] / contributions["vision"]
        rescaled = handle.rescale(text.shape[0], vision.shape[0], delta)
        if not rescaled.ok:
            print(f"rescale failed ({rescaled.code}): {rescaled.message}", file=sys.stderr)
            return rescaled.code

    np.save(args.output, rescaled.indices)
    print(f"delta_vision={delta:.6f}  wrote {rescaled.indices.shape[0]} position ids "
          f"to {args.output}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
