"""Command-line interface: corpus tools, training, conversion, evaluation."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from prosodia import __version__
from prosodia.errors import ProsodiaError, ValidationError
from prosodia.cli import pipeline
from prosodia.cli.config import CLI_MODES, MODE_BASELINE, RunConfig, load_run_config
from prosodia.cli.synth import SynthCorpusSpec, generate_corpus
from prosodia.cyclegan.model import MODE_JOINT, MODE_PROSODY, MODE_SPECTRUM
from prosodia.features import load_corpus, read_feature_file, write_feature_file
from prosodia.features.uff import UtteranceFeatures
from prosodia.metrics import evaluate_pairs, read_report_csv, write_report_csv
from prosodia.prosody import (
    cwt_decompose,
    export_scalogram_csv,
    pooled_log_f0_stats,
    preprocess_f0,
)

log = logging.getLogger("prosodia")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2

COMPARE_SYSTEMS = ("baseline", "joint", "separate")


def _setup_logging() -> None:
    level = os.environ.get("PROSODIA_LOG", "info").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    if level not in levels:
        level = "info"
    logging.basicConfig(
        stream=sys.stderr, level=levels[level], format="%(levelname)s %(name)s: %(message)s"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prosodia",
        description=(
            "Feature-level emotional voice conversion: wavelet prosody analysis, "
            "adversarial feature mapping, and objective evaluation."
        ),
    )
    parser.add_argument("--version", action="version", version=f"prosodia {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth-corpus", help="generate a synthetic two-emotion corpus")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-train", type=int, default=20, help="training utterances per side")
    p.add_argument("--n-eval", type=int, default=5, help="held-out parallel eval pairs")
    p.add_argument("--synth-spec", help="JSON file overriding generator parameters")

    p = sub.add_parser("preprocess", help="validate a corpus and report per-emotion stats")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", help="write stats JSON here (default: stdout)")

    p = sub.add_parser("decompose", help="wavelet-decompose one utterance's F0")
    p.add_argument("--input", required=True, help="UFF feature file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="run config supplying wavelet parameters")

    p = sub.add_parser("reconstruct", help="rebuild F0 from a decomposition cache")
    p.add_argument("--cache", required=True, help="binary cache from decompose")
    p.add_argument("--reference", required=True, help="UFF providing MCEPs and metadata")
    p.add_argument("--out", required=True, help="output UFF path")

    p = sub.add_parser("train", help="train one conversion system")
    p.add_argument("--config", required=True)
    p.add_argument("--mode", choices=CLI_MODES)
    p.add_argument("--seed", type=int)
    p.add_argument("--paper-scale", action="store_true",
                   help="use the full-scale published training schedule")
    p.add_argument("--out", required=True, help="checkpoint directory")

    p = sub.add_parser("convert", help="convert feature files with trained checkpoints")
    p.add_argument("--config", required=True)
    p.add_argument("--mode", choices=CLI_MODES)
    p.add_argument("--seed", type=int)
    p.add_argument("--spectrum-ckpt")
    p.add_argument("--prosody-ckpt")
    p.add_argument("--joint-ckpt")
    p.add_argument("--baseline-ckpt")
    p.add_argument("--inputs", nargs="*", help="UFF files (default: the split's eval sources)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", help="objective metrics between two feature directories")
    p.add_argument("--converted", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--align", choices=["none", "linear"], default="none")
    p.add_argument("--out", help="report CSV path (default: <converted>/report.csv)")

    p = sub.add_parser("compare", help="train and evaluate all systems per emotion pair")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--paper-scale", action="store_true")
    p.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ValidationError,) as err:
        log.error("%s", err)
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except ProsodiaError as err:
        log.error("%s", err)
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as err:
        log.error("%s", err)
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_RUNTIME


def _dispatch(args) -> int:
    handlers = {
        "synth-corpus": cmd_synth_corpus,
        "preprocess": cmd_preprocess,
        "decompose": cmd_decompose,
        "reconstruct": cmd_reconstruct,
        "train": cmd_train,
        "convert": cmd_convert,
        "evaluate": cmd_evaluate,
        "compare": cmd_compare,
    }
    return handlers[args.command](args)


def _config_overrides(args) -> dict:
    overrides = {}
    if getattr(args, "mode", None) is not None:
        overrides["mode"] = args.mode
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "paper_scale", False):
        overrides["paper_scale"] = True
    if getattr(args, "align", None) is not None:
        overrides["align"] = args.align
    return overrides


def cmd_synth_corpus(args) -> int:
    if args.synth_spec:
        raw = json.loads(Path(args.synth_spec).read_text(encoding="utf-8"))
        raw.setdefault("n_train_each", args.n_train)
        raw.setdefault("n_eval", args.n_eval)
        spec = SynthCorpusSpec.from_dict(raw)
    else:
        spec = SynthCorpusSpec(n_train_each=args.n_train, n_eval=args.n_eval)
    with pipeline.OutputDir(args.out) as out:
        manifest = generate_corpus(spec, seed=args.seed, out_dir=out)
    log.info("wrote %d files and %s", 2 * spec.n_ids, manifest)
    print(manifest)
    return EXIT_OK


def cmd_preprocess(args) -> int:
    corpus = load_corpus(args.manifest)
    stats = {}
    for emotion, utterances in sorted(corpus.items()):
        pooled = pooled_log_f0_stats(utterances)
        stats[emotion] = {
            "n_utterances": len(utterances),
            "n_frames": int(sum(u.n_frames for u in utterances)),
            "log_f0": pooled.to_dict(),
        }
    payload = json.dumps(stats, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
    else:
        print(payload)
    return EXIT_OK


def cmd_decompose(args) -> int:
    config = load_run_config(args.config) if args.config else RunConfig()
    utt = read_feature_file(args.input)
    contour = preprocess_f0(utt.f0_hz)
    matrix = cwt_decompose(contour.values, config.wavelet)
    with pipeline.OutputDir(args.out) as out:
        stem = Path(args.input).stem
        export_scalogram_csv(matrix, out / f"{stem}.scalogram.csv")
        pipeline.write_cwt_cache(
            out / f"{stem}.cwt", matrix, contour.stats, contour.voicing_mask
        )
    log.info("decomposed %s into %d scales x %d frames", args.input,
             matrix.params.n_scales, matrix.n_frames)
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    matrix, stats, voicing = pipeline.read_cwt_cache(args.cache)
    reference = read_feature_file(args.reference)
    if reference.n_frames != matrix.n_frames:
        raise ValidationError(
            f"reference has {reference.n_frames} frames, cache has {matrix.n_frames}"
        )
    f0 = pipeline.reconstruct_from_cache(matrix, stats, voicing)
    out = UtteranceFeatures(
        utterance_id=reference.utterance_id,
        emotion_label=reference.emotion_label,
        frame_period_ms=reference.frame_period_ms,
        mceps=reference.mceps,
        f0_hz=f0.astype(np.float32),
    )
    write_feature_file(out, args.out)
    return EXIT_OK


def cmd_train(args) -> int:
    config = load_run_config(args.config, overrides=_config_overrides(args))
    split = pipeline.load_split(config)
    if config.mode == MODE_BASELINE:
        pipeline.train_baseline(config, split, args.out)
    else:
        pipeline.train_mode(config, config.mode, split, args.out)
    log.info("checkpoint written to %s", args.out)
    return EXIT_OK


def cmd_convert(args) -> int:
    config = load_run_config(args.config, overrides=_config_overrides(args))
    if args.inputs:
        inputs = [read_feature_file(p) for p in args.inputs]
    else:
        split = pipeline.load_split(config)
        inputs = [src for src, _ in split.eval_pairs]
        if not inputs:
            raise ValidationError("no eval sources in split and no --inputs given")
    mode = config.mode
    if mode in (MODE_SPECTRUM, MODE_PROSODY):
        mode = "separate"
        if not (args.spectrum_ckpt and args.prosody_ckpt):
            raise ValidationError(
                "separate conversion requires --spectrum-ckpt and --prosody-ckpt"
            )
    if mode == MODE_JOINT and not args.joint_ckpt:
        raise ValidationError("joint conversion requires --joint-ckpt")
    if mode == MODE_BASELINE and not args.baseline_ckpt:
        raise ValidationError("baseline conversion requires --baseline-ckpt")
    pipeline.convert_directory(
        inputs,
        args.out,
        mode=mode,
        stats_policy=config.stats_policy,
        spectrum_ckpt=args.spectrum_ckpt,
        prosody_ckpt=args.prosody_ckpt,
        joint_ckpt=args.joint_ckpt,
        baseline_ckpt=args.baseline_ckpt,
    )
    log.info("converted %d utterances into %s", len(inputs), args.out)
    return EXIT_OK


def _load_uff_dir(directory) -> dict:
    files = sorted(Path(directory).glob("*.uff"))
    return {f.stem: read_feature_file(f) for f in files}


def cmd_evaluate(args) -> int:
    converted = _load_uff_dir(args.converted)
    reference = _load_uff_dir(args.reference)
    common = sorted(set(converted) & set(reference))
    if not common:
        raise ValidationError(
            f"no common utterance ids between {args.converted} and {args.reference}"
        )
    align = "linear-resample" if args.align == "linear" else "none"
    report = evaluate_pairs(
        [converted[k] for k in common], [reference[k] for k in common], align=align
    )
    out = Path(args.out) if args.out else Path(args.converted) / "report.csv"
    write_report_csv(report, out)
    print(f"pairs={len(report.rows)} mean_mcd={report.mean_mcd:.6g} dB "
          f"mean_rmse={report.mean_rmse:.6g} Hz mean_pcc={report.mean_pcc:.6g}")
    return EXIT_OK


def cmd_compare(args) -> int:
    config = load_run_config(args.config, overrides=_config_overrides(args))
    pairs = config.pairs or [
        (config.split.source_emotion, config.split.target_emotion)
    ]
    if not pairs:
        raise ValidationError("compare requires at least one emotion pair")
    rows = []
    with pipeline.OutputDir(args.out) as out:
        for source, target in pairs:
            pair_config = _pair_config(config, source, target)
            pair_name = f"{source}2{target}"
            pair_dir = out / pair_name
            results = _run_pair(pair_config, pair_dir)
            for system in COMPARE_SYSTEMS:
                rows.append((f"{source}->{target}", system, results[system]))
        _write_compare_outputs(out, rows)
    print((out / "comparison.txt").read_text(encoding="utf-8"), end="")
    return EXIT_OK


def _pair_config(config: RunConfig, source: str, target: str) -> RunConfig:
    import copy

    pair_config = copy.deepcopy(config)
    pair_config.split.source_emotion = source
    pair_config.split.target_emotion = target
    return pair_config


def _run_pair(config: RunConfig, pair_dir: Path) -> dict:
    """Train all systems for one emotion pair and evaluate the eval set.

    The baseline shares the spectrum model with the separate system (its
    spectral mapping is the same network; only F0 handling differs).
    """
    split = pipeline.load_split(config)
    eval_sources = [src for src, _ in split.eval_pairs]
    eval_targets = [tgt for _, tgt in split.eval_pairs]
    if not eval_sources:
        raise ValidationError("compare needs a non-empty eval set (n_eval >= 1)")

    with pipeline.OutputDir(pair_dir) as pdir:
        reference_dir = pdir / "reference"
        with pipeline.OutputDir(reference_dir) as ref:
            for utt in eval_targets:
                write_feature_file(utt, ref / f"{utt.utterance_id}.uff")

        pipeline.train_mode(config, MODE_SPECTRUM, split, pdir / "spectrum")
        pipeline.train_mode(config, MODE_PROSODY, split, pdir / "prosody")
        pipeline.train_mode(config, MODE_JOINT, split, pdir / "joint")
        pipeline.train_baseline(config, split, pdir / "baseline")

        results = {}
        ckpts = {
            "baseline": dict(
                mode=MODE_BASELINE,
                baseline_ckpt=pdir / "baseline",
                spectrum_ckpt=pdir / "spectrum",
            ),
            "joint": dict(mode=MODE_JOINT, joint_ckpt=pdir / "joint"),
            "separate": dict(
                mode="separate",
                spectrum_ckpt=pdir / "spectrum",
                prosody_ckpt=pdir / "prosody",
            ),
        }
        for system, kwargs in ckpts.items():
            try:
                converted = pipeline.convert_directory(
                    eval_sources,
                    pair_dir / f"converted_{system}",
                    stats_policy=config.stats_policy,
                    **kwargs,
                )
                report = evaluate_pairs(converted, eval_targets, align=config.align)
                write_report_csv(report, pair_dir / f"report_{system}.csv")
                results[system] = (report.mean_mcd, report.mean_rmse, report.mean_pcc)
            except ProsodiaError as err:
                log.error("system %s failed: %s", system, err)
                results[system] = None
    return results


def _write_compare_outputs(out: Path, rows: list) -> None:
    csv_lines = ["pair,system,mcd_db,rmse_hz,pcc"]
    by_system: dict[str, list] = {}
    for pair, system, cells in rows:
        if cells is None:
            csv_lines.append(f"{pair},{system},FAILED,FAILED,FAILED")
        else:
            csv_lines.append(
                f"{pair},{system},{cells[0]:.9g},{cells[1]:.9g},{cells[2]:.9g}"
            )
            by_system.setdefault(system, []).append(cells)
    for system in COMPARE_SYSTEMS:
        cells = by_system.get(system)
        if cells:
            means = np.mean(np.asarray(cells), axis=0)
            csv_lines.append(
                f"MEAN,{system},{means[0]:.9g},{means[1]:.9g},{means[2]:.9g}"
            )
        else:
            csv_lines.append(f"MEAN,{system},FAILED,FAILED,FAILED")
    (out / "comparison.csv").write_text("\n".join(csv_lines) + "\n", encoding="utf-8")

    header = f"{'pair':<12} {'system':<10} {'MCD [dB]':>10} {'RMSE [Hz]':>10} {'PCC':>8}"
    text = [header, "-" * len(header)]
    for line in csv_lines[1:]:
        pair, system, m, r, p = line.split(",")
        text.append(f"{pair:<12} {system:<10} {_fmt(m):>10} {_fmt(r):>10} {_fmt(p):>8}")
    (out / "comparison.txt").write_text("\n".join(text) + "\n", encoding="utf-8")


def _fmt(cell: str) -> str:
    if cell == "FAILED":
        return cell
    return f"{float(cell):.3f}"


if __name__ == "__main__":
    sys.exit(main())
