"""Command-line entry point.

Subcommands cover the full pipeline: corpus transformation, collapse
statistics, disambiguation dataset generation, baseline scoring,
evaluation, tokenizer training/statistics, and a combined markdown
report.  Every run serializes its configuration to run.json in the
output directory; artifacts are regenerable bit-exactly from run.json
plus the inputs.

Exit codes: 0 success, 1 validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

from . import collapse as collapse_mod
from . import disamb as disamb_mod
from . import wordpiece as wp_mod
from .corpus import (
    CorpusError,
    CorpusStream,
    default_workers,
    manifest_relative_entries,
    resolve_manifest,
)
from .textmodel import NormalizationPolicy
from .transforms import TransformSpec, transform_text

ENV_CORPUS_ROOT = "TYPO_CORPUS_ROOT"


class ValidationError(ValueError):
    """Bad flags, config, or input files; exits with code 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; the CLI contract wants 1.
    def error(self, message):
        raise ValidationError(message)


@dataclass
class RunConfig:
    """Everything needed to regenerate a run's artifacts."""

    command: str
    manifest: Optional[str] = None
    root: Optional[str] = None
    line_documents: bool = False
    output_dir: Optional[str] = None
    policy: NormalizationPolicy = NormalizationPolicy()
    spec: Optional[TransformSpec] = None
    scorer: str = "baseline"
    window: int = 5
    alpha: float = 1.0
    bins: Optional[List[float]] = None
    vocab_size: Optional[int] = None
    min_pair_count: int = 2

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "manifest": self.manifest,
            "root": self.root,
            "line_documents": self.line_documents,
            "output_dir": self.output_dir,
            "policy": self.policy.to_dict(),
            "spec": self.spec.to_dict() if self.spec else None,
            "scorer": self.scorer,
            "window": self.window,
            "alpha": self.alpha,
            "bins": self.bins,
            "vocab_size": self.vocab_size,
            "min_pair_count": self.min_pair_count,
        }


def _write_run_json(config: RunConfig, outdir: Path) -> None:
    (outdir / "run.json").write_text(
        json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _add_corpus_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--manifest", required=True, help="manifest listing corpus files in order")
    p.add_argument("--root", default=None, help=f"corpus root (default: ${ENV_CORPUS_ROOT} or manifest dir)")
    p.add_argument("--line-documents", action="store_true", help="treat each line of each file as a document")
    p.add_argument("--workers", type=int, default=0, help="worker processes (0 = all cores)")


def _add_policy_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--no-case-fold", action="store_true")
    p.add_argument("--no-trim", action="store_true", help="keep edge punctuation attached")
    p.add_argument("--no-nfc", action="store_true")


def _add_spec_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kind", choices=["classic", "extreme"], required=True)
    p.add_argument("--min-len", type=int, default=None)
    p.add_argument("--training-min-len", type=int, default=None)


def _policy_from(args) -> NormalizationPolicy:
    return NormalizationPolicy(
        case_fold=not args.no_case_fold,
        trim_edge_punctuation=not args.no_trim,
        unicode_nfc=not args.no_nfc,
    )


def _spec_from(args) -> TransformSpec:
    try:
        return TransformSpec(
            kind=args.kind,
            min_len=args.min_len,
            training_min_len=getattr(args, "training_min_len", None),
        )
    except ValueError as e:
        raise ValidationError(str(e)) from None


def _corpus_from(args) -> CorpusStream:
    root = args.root or os.environ.get(ENV_CORPUS_ROOT) or None
    manifest = Path(args.manifest)
    if not manifest.is_file():
        raise ValidationError(f"manifest not found: {manifest}")
    return CorpusStream.from_manifest(manifest, root=root, line_documents=args.line_documents)


def _workers_from(args) -> int:
    w = getattr(args, "workers", 1)
    return default_workers() if w <= 0 else w


def _outdir_from(args) -> Path:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    return outdir


def _load_config_defaults(argv: Sequence[str]) -> Sequence[str]:
    """Expand `--config FILE` into leading defaults (flags still win)."""
    if "--config" not in argv:
        return argv
    argv = list(argv)
    i = argv.index("--config")
    try:
        cfg_path = argv[i + 1]
    except IndexError:
        raise ValidationError("--config requires a path") from None
    del argv[i : i + 2]
    try:
        cfg = json.loads(Path(cfg_path).read_text(encoding="utf-8"))
    except OSError as e:
        raise ValidationError(f"cannot read config {cfg_path}: {e}") from None
    except json.JSONDecodeError as e:
        raise ValidationError(f"config {cfg_path} is not valid JSON: {e}") from None
    if not isinstance(cfg, dict):
        raise ValidationError(f"config {cfg_path} must be a JSON object")
    expanded: List[str] = [argv[0]] if argv else []
    for key, value in sorted(cfg.items()):
        flag = "--" + key.replace("_", "-")
        if isinstance(value, bool):
            if value:
                expanded.append(flag)
        elif isinstance(value, list):
            expanded.extend([flag, ",".join(str(v) for v in value)])
        elif value is not None:
            expanded.extend([flag, str(value)])
    expanded.extend(argv[1:])
    return expanded


# --- subcommands ----------------------------------------------------------

def _transform_one_file(path: str, spec: TransformSpec, policy: NormalizationPolicy) -> str:
    return transform_text(Path(path).read_text(encoding="utf-8"), spec, policy)


def _cmd_transform(args) -> int:
    spec = _spec_from(args)
    policy = _policy_from(args)
    corpus_root = args.root or os.environ.get(ENV_CORPUS_ROOT) or None
    manifest = Path(getattr(args, "in"))
    if not manifest.is_file():
        raise ValidationError(f"manifest not found: {manifest}")
    entries = manifest_relative_entries(manifest)
    paths = resolve_manifest(manifest, corpus_root)
    for path in paths:
        if not path.is_file():
            raise ValidationError(f"cannot read corpus file {path}")
    outdir = _outdir_from(args)
    workers = _workers_from(args)
    if workers > 1 and len(paths) > 1:
        from concurrent.futures import ProcessPoolExecutor
        from functools import partial

        with ProcessPoolExecutor(max_workers=workers) as pool:
            transformed = list(
                pool.map(partial(_transform_one_file, spec=spec, policy=policy), map(str, paths))
            )
    else:
        cache: dict = {}
        transformed = [
            transform_text(p.read_text(encoding="utf-8"), spec, policy, _cache=cache)
            for p in paths
        ]
    for entry, text in zip(entries, transformed):
        rel = Path(entry)
        if rel.is_absolute():
            rel = Path(rel.name)
        dest = outdir / rel
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_text(text, encoding="utf-8")
    (outdir / "manifest.txt").write_text(
        "\n".join(str(Path(e).name if Path(e).is_absolute() else e) for e in entries) + "\n",
        encoding="utf-8",
    )
    config = RunConfig(
        command="transform",
        manifest=str(manifest),
        root=corpus_root,
        output_dir=args.out,
        policy=policy,
        spec=spec,
    )
    _write_run_json(config, outdir)
    print(f"transformed {len(paths)} files -> {outdir}")
    return 0


def _cmd_collapse_stats(args) -> int:
    spec = _spec_from(args)
    policy = _policy_from(args)
    corpus = _corpus_from(args)
    outdir = _outdir_from(args)
    workers = _workers_from(args)

    vocab = collapse_mod.build_vocab(corpus, policy, workers=workers)
    if not vocab:
        raise ValidationError("corpus contains no analyzable words")
    index = collapse_mod.build_collapse_index(vocab, spec)
    report = collapse_mod.summarize(index, len(vocab), policy)
    edges = [float(b) for b in args.bins.split(",")] if args.bins else None
    bins = collapse_mod.histogram(index, edges)

    collapse_mod.write_vocab_csv(vocab, outdir / "vocab.csv")
    collapse_mod.write_index_jsonl(index, outdir / "groups.jsonl")
    collapse_mod.write_report_csv(report, outdir / "collapse_report.csv")
    collapse_mod.write_histogram_csv(bins, outdir / "histogram.csv")
    config = RunConfig(
        command="collapse-stats",
        manifest=args.manifest,
        root=args.root,
        line_documents=args.line_documents,
        output_dir=args.out,
        policy=policy,
        spec=spec,
        bins=edges,
    )
    _write_run_json(config, outdir)
    print(
        f"vocab {report.vocab_size} | collapsed {report.ed_count} | "
        f"collapsing {report.ing_count} ({report.ing_proportion:.4%})"
    )
    return 0


def _cmd_gen_dataset(args) -> int:
    spec = _spec_from(args)
    policy = _policy_from(args)
    corpus = _corpus_from(args)
    outdir = _outdir_from(args)
    workers = _workers_from(args)

    vocab = collapse_mod.build_vocab(corpus, policy, workers=workers)
    if not vocab:
        raise ValidationError("corpus contains no analyzable words")
    index = collapse_mod.build_collapse_index(vocab, spec)
    skips: List[disamb_mod.Skip] = []
    count = disamb_mod.write_dataset_jsonl(
        disamb_mod.generate_dataset(corpus, index, policy, workers=workers, on_skip=skips.append),
        outdir / "dataset.jsonl",
    )
    (outdir / "skip_report.json").write_text(
        json.dumps(
            {
                "skipped": len(skips),
                "reasons": sorted({s.reason for s in skips}),
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )
    config = RunConfig(
        command="gen-dataset",
        manifest=args.manifest,
        root=args.root,
        line_documents=args.line_documents,
        output_dir=args.out,
        policy=policy,
        spec=spec,
    )
    _write_run_json(config, outdir)
    print(f"wrote {count} instances ({len(skips)} skipped) -> {outdir / 'dataset.jsonl'}")
    return 0


def _cmd_score_baseline(args) -> int:
    policy = _policy_from(args)
    corpus = _corpus_from(args)
    outdir = _outdir_from(args)
    dataset = Path(args.dataset)
    if not dataset.is_file():
        raise ValidationError(f"dataset not found: {dataset}")
    if args.window < 1:
        raise ValidationError("--window must be >= 1")
    if args.alpha <= 0:
        raise ValidationError("--alpha must be > 0")

    model = disamb_mod.train_cooc_model(corpus, window=args.window, alpha=args.alpha, policy=policy)
    instances = disamb_mod.read_dataset_jsonl(dataset)
    scores = (disamb_mod.baseline_score(inst, model, policy) for inst in instances)
    count = disamb_mod.write_scores_jsonl(
        scores,
        outdir / "scores.jsonl",
        meta={"scorer": "cooc-baseline", "window": args.window, "alpha": args.alpha},
    )
    config = RunConfig(
        command="score-baseline",
        manifest=args.manifest,
        root=args.root,
        line_documents=args.line_documents,
        output_dir=args.out,
        policy=policy,
        window=args.window,
        alpha=args.alpha,
    )
    _write_run_json(config, outdir)
    print(f"scored {count} instances -> {outdir / 'scores.jsonl'}")
    return 0


def _cmd_eval(args) -> int:
    outdir = _outdir_from(args)
    dataset = Path(args.dataset)
    scores_path = Path(args.scores)
    for p in (dataset, scores_path):
        if not p.is_file():
            raise ValidationError(f"input not found: {p}")
    try:
        report = disamb_mod.evaluate(
            disamb_mod.read_dataset_jsonl(dataset),
            disamb_mod.read_scores_jsonl(scores_path),
        )
    except disamb_mod.ReconciliationError as e:
        raise ValidationError(str(e)) from None
    except ValueError as e:
        raise ValidationError(str(e)) from None

    if args.vocab:
        vocab = collapse_mod.read_vocab_csv(args.vocab)
        try:
            report.pearson_r = disamb_mod.freq_accuracy_correlation(report, vocab)
        except disamb_mod.UndefinedCorrelationError:
            report.pearson_r = None

    (outdir / "eval_report.json").write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    with open(outdir / "eval_report.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "n", "correct", "accuracy"])
        w.writerow(["<overall>", report.n_instances, "", repr(report.accuracy)])
        for word in sorted(report.per_label):
            la = report.per_label[word]
            w.writerow([word, la.n, la.correct, repr(la.accuracy)])
    print(f"accuracy {report.accuracy:.4f} over {report.n_instances} instances")
    return 0


def _cmd_tok_train(args) -> int:
    policy = _policy_from(args)
    corpus = _corpus_from(args)
    outdir = _outdir_from(args)
    if args.vocab_size is None or args.vocab_size < 1:
        raise ValidationError("--vocab-size must be a positive integer")
    try:
        vocab = wp_mod.train(
            corpus,
            vocab_size=args.vocab_size,
            min_pair_count=args.min_pair_count,
            policy=policy,
        )
    except wp_mod.TrainingError as e:
        raise ValidationError(str(e)) from None
    vocab.save(outdir / "vocab.txt")
    config = RunConfig(
        command="tok-train",
        manifest=args.manifest,
        root=args.root,
        line_documents=args.line_documents,
        output_dir=args.out,
        policy=policy,
        vocab_size=args.vocab_size,
        min_pair_count=args.min_pair_count,
    )
    _write_run_json(config, outdir)
    print(f"trained vocabulary of {len(vocab)} tokens -> {outdir / 'vocab.txt'}")
    return 0


def _cmd_tok_stats(args) -> int:
    policy = _policy_from(args)
    corpus = _corpus_from(args)
    outdir = _outdir_from(args)
    vocab_path = Path(args.vocab)
    if not vocab_path.is_file():
        raise ValidationError(f"vocabulary not found: {vocab_path}")
    vocab = wp_mod.SubwordVocab.load(vocab_path)
    stats = wp_mod.token_stats(corpus, vocab, policy)
    wp_mod.write_stats_csv(stats, vocab, outdir / "token_stats.csv")
    wp_mod.write_stats_summary(stats, vocab, outdir / "stats_summary.json")
    config = RunConfig(
        command="tok-stats",
        manifest=args.manifest,
        root=args.root,
        line_documents=args.line_documents,
        output_dir=args.out,
        policy=policy,
    )
    _write_run_json(config, outdir)
    print(f"counted {stats.total} tokens -> {outdir / 'token_stats.csv'}")
    return 0


def _cmd_report(args) -> int:
    src = Path(args.dir)
    if not src.is_dir():
        raise ValidationError(f"not a directory: {src}")
    lines = ["# Run summary", ""]
    run_json = src / "run.json"
    if run_json.is_file():
        lines += ["## Configuration", "", "```json", run_json.read_text(encoding="utf-8").rstrip(), "```", ""]
    rep_csv = src / "collapse_report.csv"
    if rep_csv.is_file():
        rows = list(csv.reader(rep_csv.read_text(encoding="utf-8").splitlines()))
        lines += ["## Collapse statistics", ""]
        lines += ["| " + " | ".join(rows[0]) + " |", "|" + "---|" * len(rows[0])]
        for row in rows[1:]:
            lines.append("| " + " | ".join(row) + " |")
        lines.append("")
    hist_csv = src / "histogram.csv"
    if hist_csv.is_file():
        rows = list(csv.reader(hist_csv.read_text(encoding="utf-8").splitlines()))
        lines += ["## Collapsing-word frequency histogram", ""]
        lines += ["| bin_lo | bin_hi | count |", "|---|---|---|"]
        for row in rows[1:]:
            lines.append("| " + " | ".join(row) + " |")
        lines.append("")
    eval_json = src / "eval_report.json"
    if eval_json.is_file():
        rep = json.loads(eval_json.read_text(encoding="utf-8"))
        lines += ["## Disambiguation evaluation", ""]
        lines.append(f"- instances: {rep['n_instances']}")
        lines.append(f"- accuracy: {rep['accuracy']:.4f}")
        if rep.get("pearson_r") is not None:
            lines.append(f"- frequency/accuracy Pearson r: {rep['pearson_r']:.4f}")
        lines.append("")
    summary_json = src / "stats_summary.json"
    if summary_json.is_file():
        s = json.loads(summary_json.read_text(encoding="utf-8"))
        lines += ["## Tokenizer statistics", ""]
        for key in sorted(s):
            lines.append(f"- {key}: {s[key]}")
        lines.append("")
    out = src / "summary.md"
    out.write_text("\n".join(lines).rstrip() + "\n", encoding="utf-8")
    print(f"wrote {out}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="typog", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="rewrite a corpus with a scrambler")
    p.add_argument("--in", required=True, help="input manifest")
    p.add_argument("--out", required=True, help="output directory (mirrors input layout)")
    p.add_argument("--root", default=None)
    p.add_argument("--workers", type=int, default=0, help="worker processes (0 = all cores)")
    _add_spec_args(p)
    _add_policy_args(p)
    p.set_defaults(fn=_cmd_transform)

    p = sub.add_parser("collapse-stats", help="vocabulary, collapse groups, report, histogram")
    _add_corpus_args(p)
    _add_spec_args(p)
    _add_policy_args(p)
    p.add_argument("--bins", default=None, help="comma-separated histogram edges (default: decades)")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_collapse_stats)

    p = sub.add_parser("gen-dataset", help="masked disambiguation dataset (JSONL)")
    _add_corpus_args(p)
    _add_spec_args(p)
    _add_policy_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_gen_dataset)

    p = sub.add_parser("score-baseline", help="score a dataset with the co-occurrence baseline")
    _add_corpus_args(p)
    _add_policy_args(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_score_baseline)

    p = sub.add_parser("eval", help="evaluate a score file against a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--scores", required=True)
    p.add_argument("--vocab", default=None, help="vocab.csv for the frequency/accuracy correlation")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("tok-train", help="train a WordPiece vocabulary")
    _add_corpus_args(p)
    _add_policy_args(p)
    p.add_argument("--vocab-size", type=int, required=True)
    p.add_argument("--min-pair-count", type=int, default=2)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_tok_train)

    p = sub.add_parser("tok-stats", help="token frequency statistics under a vocabulary")
    _add_corpus_args(p)
    _add_policy_args(p)
    p.add_argument("--vocab", required=True, help="vocab.txt from tok-train")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_tok_stats)

    p = sub.add_parser("report", help="render a markdown summary of a run directory")
    p.add_argument("--dir", required=True)
    p.set_defaults(fn=_cmd_report)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _load_config_defaults(argv)
        parser = build_parser()
        args = parser.parse_args(argv)
        return args.fn(args)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (CorpusError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 2
    except Exception as e:  # runtime failures distinct from bad input
        print(f"runtime error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
