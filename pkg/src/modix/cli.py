"""Command-line surface: gen, analyze, rescale, simulate, sweep-alpha.

Exit codes: 0 success, 2 validation or usage error, 3 I/O error,
4 internal numerical failure. Outputs are byte-deterministic for identical
flags. --alpha and --epsilon fall back to the MODIX_ALPHA / MODIX_EPSILON
environment variables when the flag is absent; flags win.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import contribution, harness, report, rope, seqio, stride
from .errors import (
    AlphaOutOfRangeError,
    ModixError,
    ValidationError,
)


def _write_text(path, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _write_bytes(path, blob: bytes) -> None:
    if path is None:
        sys.stdout.buffer.write(blob)
    else:
        with open(path, "wb") as fh:
            fh.write(blob)


def _env_float(name: str):
    raw = os.environ.get(name)
    if raw is None:
        return None
    try:
        return float(raw)
    except ValueError as exc:
        raise ValidationError(f"environment variable {name}={raw!r} is not a number") from exc


def _parse_floats(raw: str, flag: str) -> list[float]:
    items = [token.strip() for token in raw.split(",") if token.strip()]
    if not items:
        raise ValidationError(f"{flag} needs at least one value")
    try:
        return [float(token) for token in items]
    except ValueError as exc:
        raise ValidationError(f"{flag} has a non-numeric entry in {raw!r}") from exc


def _parse_seeds(raw: str) -> tuple[int, ...]:
    # either "3,5,11" or a half-open range "0:50"
    raw = raw.strip()
    if ":" in raw:
        start_text, _, stop_text = raw.partition(":")
        try:
            start, stop = int(start_text), int(stop_text)
        except ValueError as exc:
            raise ValidationError(f"--seeds range {raw!r} must be int:int") from exc
        if stop <= start:
            raise ValidationError(f"--seeds range {raw!r} is empty")
        return tuple(range(start, stop))
    items = [token.strip() for token in raw.split(",") if token.strip()]
    if not items:
        raise ValidationError("--seeds needs at least one value")
    try:
        return tuple(int(token) for token in items)
    except ValueError as exc:
        raise ValidationError(f"--seeds has a non-integer entry in {raw!r}") from exc


def _add_analysis_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, default=None,
                        help="fusion weight in [0,1] (default 0.5 or MODIX_ALPHA)")
    parser.add_argument("--epsilon", type=float, default=None,
                        help="covariance regularizer (default 1e-6 or MODIX_EPSILON)")
    parser.add_argument("--normalization", choices=["raw", "shift"], default="shift",
                        help="entropy normalization mode (default shift)")
    parser.add_argument("--clamp-floor", type=float, default=contribution.DEFAULT_CLAMP_FLOOR)
    parser.add_argument("--gram-threshold", type=int, default=contribution.DEFAULT_GRAM_THRESHOLD)


def _analysis_config(args) -> contribution.AnalysisConfig:
    alpha = args.alpha if args.alpha is not None else _env_float("MODIX_ALPHA")
    epsilon = args.epsilon if args.epsilon is not None else _env_float("MODIX_EPSILON")
    return contribution.AnalysisConfig(
        alpha=alpha if alpha is not None else contribution.DEFAULT_ALPHA,
        epsilon=epsilon if epsilon is not None else contribution.DEFAULT_EPSILON,
        normalization_mode=contribution.NormalizationMode(args.normalization),
        clamp_floor=args.clamp_floor,
        gram_threshold=args.gram_threshold,
    )


def _cmd_gen(args) -> int:
    spec = seqio.GeneratorSpec(n_t=args.n_t, n_v=args.n_v, d=args.d,
                               text_scale=args.text_scale, vision_rank=args.vision_rank,
                               noise=args.noise, seed=args.seed)
    seqio.save_sequence(seqio.generate_synthetic(spec), args.output)
    return 0


def _cmd_analyze(args) -> int:
    seq = seqio.load_sequence(args.input)
    result = contribution.analyze(seq, _analysis_config(args))
    _write_text(args.output, report.dumps(report.contribution_document(result)))
    return 0


def _cmd_rescale(args) -> int:
    seq = seqio.load_sequence(args.input)
    if args.delta_override is not None:
        plan = stride.reconstruct_indices(seq.layout, args.delta_override)
    else:
        _, plan = stride.plan(seq, _analysis_config(args))
    if args.format == "json":
        _write_text(args.output, report.dumps(report.plan_document(plan)))
    elif args.format == "csv":
        _write_text(args.output, report.plan_csv(plan))
    else:
        _write_bytes(args.output, report.pack_indices(plan.indices))
    return 0


def _rotary_config(head_dim: int, base: float, zero_freqs: bool) -> rope.RotaryConfig:
    frequencies = np.zeros(head_dim // 2) if zero_freqs else None
    return rope.RotaryConfig(head_dim=head_dim, base=base, frequencies=frequencies)


def _cmd_simulate(args) -> int:
    if (args.input is None) == (args.synthetic is None):
        raise ValidationError("simulate needs exactly one of --input or --synthetic")
    if args.input is not None:
        seq = seqio.load_sequence(args.input)
        n_t, n_v = seq.count(seqio.Modality.TEXT), seq.count(seqio.Modality.VISION)
    else:
        gen = seqio.parse_generator_spec(args.synthetic)
        n_t, n_v = gen.n_t, gen.n_v

    strides = _parse_floats(args.strides, "--strides")
    spec = harness.HarnessSpec(n_t=n_t, n_v=n_v, head_dim=args.head_dim,
                               content_mode=harness.ContentMode(args.content_mode),
                               causal=args.causal, seeds=_parse_seeds(args.seeds))
    cfg = _rotary_config(args.head_dim, args.rope_base, args.zero_freqs)
    layout = harness.harness_layout(spec)

    runs = []
    for value in strides:
        plan = stride.reconstruct_indices(layout, value)
        diagnostics = harness.run_seed_sweep(spec, plan, cfg)
        total = spec.n_t + spec.n_v
        per_seed = [{
            "seed": diag.seed,
            "mass": {"text": diag.total_mass[seqio.Modality.TEXT] / total,
                     "vision": diag.total_mass[seqio.Modality.VISION] / total},
            "last_text_query": {
                "text": diag.last_text_query_mass(seqio.Modality.TEXT),
                "vision": diag.last_text_query_mass(seqio.Modality.VISION),
            },
        } for diag in diagnostics]
        runs.append({
            "stride": value,
            "per_seed": per_seed,
            "mean_aggregates": {
                "mass": {
                    "text": sum(entry["mass"]["text"] for entry in per_seed) / len(per_seed),
                    "vision": sum(entry["mass"]["vision"] for entry in per_seed) / len(per_seed),
                },
                "last_text_query": {
                    "text": sum(e["last_text_query"]["text"] for e in per_seed) / len(per_seed),
                    "vision": sum(e["last_text_query"]["vision"] for e in per_seed) / len(per_seed),
                },
            },
        })

    if args.format == "csv":
        lines = ["stride,mean_vision_mass"]
        for entry in runs:
            mean_mass = entry["mean_aggregates"]["last_text_query"]["vision"]
            lines.append(f"{report.format_number(entry['stride'])},{report.format_number(mean_mass)}")
        _write_text(args.output, "\n".join(lines) + "\n")
    else:
        document = {
            "spec": {"n_t": spec.n_t, "n_v": spec.n_v, "head_dim": spec.head_dim,
                     "content_mode": spec.content_mode.value, "causal": spec.causal,
                     "seeds": list(spec.seeds), "rope_base": args.rope_base,
                     "zero_frequencies": args.zero_freqs},
            "runs": runs,
        }
        _write_text(args.output, report.dumps(document))
    return 0


def _cmd_sweep_alpha(args) -> int:
    seq = seqio.load_sequence(args.input)
    alphas = _parse_floats(args.alphas, "--alphas")
    for alpha in alphas:
        if not 0.0 <= alpha <= 1.0:
            raise AlphaOutOfRangeError(f"alpha must lie in [0, 1], got {alpha}")

    base_cfg = _analysis_config(args)
    intra, inter = contribution.pathway_scores(seq, base_cfg)
    rows = []
    for alpha in alphas:
        fused = contribution.fuse_contributions(intra, inter, alpha)
        rows.append((alpha, fused, stride.compute_stride(fused)))

    if args.format == "csv":
        lines = ["alpha,i_intra_text,i_intra_vision,i_inter_text,i_inter_vision,"
                 "c_tilde_text,c_tilde_vision,delta_vision"]
        for alpha, fused, delta in rows:
            cells = [alpha,
                     fused.intra.i_intra[seqio.Modality.TEXT], fused.intra.i_intra[seqio.Modality.VISION],
                     fused.inter.i_inter[seqio.Modality.TEXT], fused.inter.i_inter[seqio.Modality.VISION],
                     fused.c_tilde[seqio.Modality.TEXT], fused.c_tilde[seqio.Modality.VISION],
                     delta]
            lines.append(",".join(report.format_number(cell) for cell in cells))
        _write_text(args.output, "\n".join(lines) + "\n")
    else:
        document = {
            "alphas": list(alphas),
            "rows": [{"alpha": alpha,
                      "report": report.contribution_document(fused),
                      "delta_vision": delta}
                     for alpha, fused, delta in rows],
        }
        _write_text(args.output, report.dumps(document))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modix",
        description="Information-driven positional index rescaling for multimodal sequences.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a synthetic MEMB fixture")
    gen.add_argument("--n-t", type=int, required=True, dest="n_t")
    gen.add_argument("--n-v", type=int, required=True, dest="n_v")
    gen.add_argument("--d", type=int, required=True)
    gen.add_argument("--vision-rank", type=int, default=1)
    gen.add_argument("--text-scale", type=float, default=1.0)
    gen.add_argument("--noise", type=float, default=0.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--output", required=True)
    gen.set_defaults(func=_cmd_gen)

    analyze = sub.add_parser("analyze", help="contribution report for a MEMB file")
    analyze.add_argument("--input", required=True)
    analyze.add_argument("--output", default=None)
    _add_analysis_flags(analyze)
    analyze.set_defaults(func=_cmd_analyze)

    rescale = sub.add_parser("rescale", help="adjusted position indices for a MEMB file")
    rescale.add_argument("--input", required=True)
    rescale.add_argument("--output", default=None)
    rescale.add_argument("--format", choices=["json", "csv", "binary-indices"], default="json")
    rescale.add_argument("--delta-override", type=float, default=None,
                         help="use this visual stride instead of analyzing the input")
    _add_analysis_flags(rescale)
    rescale.set_defaults(func=_cmd_rescale)

    simulate = sub.add_parser("simulate", help="attention-mass sweep over visual strides")
    simulate.add_argument("--input", default=None)
    simulate.add_argument("--synthetic", default=None, metavar="SPEC",
                          help='generator spec such as "n_t=16,n_v=256,d=8,seed=0"')
    simulate.add_argument("--output", default=None)
    simulate.add_argument("--strides", required=True,
                          help="comma-separated visual strides, e.g. 0.5,1,2")
    simulate.add_argument("--seeds", default="0:50",
                          help='comma list or "start:stop" range (default 0:50)')
    simulate.add_argument("--head-dim", type=int, default=64)
    simulate.add_argument("--rope-base", type=float, default=rope.DEFAULT_BASE)
    simulate.add_argument("--content-mode", choices=["tied", "random"], default="tied")
    simulate.add_argument("--causal", action="store_true",
                          help="causal mask; places vision tokens before text")
    simulate.add_argument("--zero-freqs", action="store_true",
                          help="zero all rotary frequencies (position-independent control)")
    simulate.add_argument("--format", choices=["json", "csv"], default="json")
    simulate.set_defaults(func=_cmd_simulate)

    sweep = sub.add_parser("sweep-alpha", help="contribution reports over a fusion-weight grid")
    sweep.add_argument("--input", required=True)
    sweep.add_argument("--output", default=None)
    sweep.add_argument("--alphas", required=True, help="comma-separated alpha values in [0,1]")
    sweep.add_argument("--format", choices=["json", "csv"], default="json")
    _add_analysis_flags(sweep)
    sweep.set_defaults(func=_cmd_sweep_alpha)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ModixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
