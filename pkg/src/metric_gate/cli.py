"""Command-line interface.

Subcommands::

    analyze     score one query and print its verdict report
    batch       score many .sql files (directories expand recursively)
    train       fit a risk model on a labeled corpus file
    eval        score a corpus split and report metrics vs. the rule baseline
    gen-corpus  write a deterministic synthetic labeled corpus

Exit codes for ``analyze``: 0 = APPROVED, 2 = BLOCKED, 1 = any error. For
``batch``: 1 if any file errored, else 2 if any query was blocked, else 0.
Other subcommands exit 0 on success and 1 on error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

from .corpus import (
    generate_corpus,
    load_corpus,
    rule_baseline,
    save_corpus,
    split_corpus,
)
from .errors import ConfigError, MetricGateError
from .features import schema_fingerprint
from .gate import (
    GateConfig,
    analyze_batch,
    detect_overexposure,
    render_batch_json,
    render_batch_text,
    render_report_json,
    render_report_text,
    resolve_config,
    vectorize_queries,
)
from .gbdt import (
    GbdtHyperparams,
    evaluate,
    load_model,
    metrics_from_scores,
    predict_proba_batch,
    save_model,
    train,
)

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """Usage errors exit 1; exit code 2 is reserved for BLOCKED verdicts."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_gate_flags(parser: argparse.ArgumentParser, with_format: bool = True) -> None:
    parser.add_argument("--model", help="path to a trained model file")
    parser.add_argument(
        "--threshold", type=float, help="block above this risk score (default 0.85)"
    )
    parser.add_argument("--lexicon", help="sensitive-column lexicon file")
    parser.add_argument(
        "--embedder", choices=["builtin", "external"], help="embedding provider"
    )
    parser.add_argument(
        "--embedder-cmd", help="external provider command line (shell-split)"
    )
    parser.add_argument("--embed-dim", type=int, help="embedding dimension (default 64)")
    if with_format:
        parser.add_argument(
            "--format", choices=["json", "text"], help="report format (default json)"
        )


def _config_from_args(args: argparse.Namespace, with_format: bool = True) -> GateConfig:
    overrides: dict[str, object] = {
        "threshold": args.threshold,
        "model_path": args.model,
        "lexicon_path": args.lexicon,
        "embedder": args.embedder,
        "embedder_cmd": args.embedder_cmd,
        "embed_dim": args.embed_dim,
    }
    if with_format:
        overrides["output_format"] = args.format
    return resolve_config(overrides)


def _load_model_for(config: GateConfig):
    if not config.model_path:
        raise ConfigError("no model specified (use --model or a config file)")
    return load_model(config.model_path)


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="metric-gate",
        description="Static analyzer that gates metric SQL on privacy overexposure risk.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="info logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_analyze = sub.add_parser("analyze", help="score one query")
    source = p_analyze.add_mutually_exclusive_group(required=True)
    source.add_argument("--query", help="SQL text inline")
    source.add_argument("--file", help="read SQL from a file")
    source.add_argument("--stdin", action="store_true", help="read SQL from stdin")
    _add_gate_flags(p_analyze)
    p_analyze.set_defaults(func=_cmd_analyze)

    p_batch = sub.add_parser("batch", help="score many .sql files")
    p_batch.add_argument("paths", nargs="+", help="files or directories of .sql files")
    p_batch.add_argument("--jobs", type=int, default=1, help="worker threads")
    p_batch.add_argument("--report-dir", help="write CSV and figures here")
    _add_gate_flags(p_batch)
    p_batch.set_defaults(func=_cmd_batch)

    p_train = sub.add_parser("train", help="fit a risk model on a corpus")
    p_train.add_argument("--corpus", required=True, help="labeled corpus file")
    p_train.add_argument("--out", required=True, help="model output path")
    p_train.add_argument("--rounds", type=int, help="boosting rounds (default 50)")
    p_train.add_argument("--max-depth", type=int, help="tree depth limit (default 3)")
    p_train.add_argument("--eta", type=float, help="learning rate (default 0.1)")
    p_train.add_argument(
        "--lambda", dest="l2_lambda", type=float, help="L2 regularization (default 1.0)"
    )
    p_train.add_argument("--gamma", type=float, help="split gain penalty (default 0.0)")
    p_train.add_argument(
        "--min-child-weight", type=float, help="minimum child hessian sum (default 1.0)"
    )
    p_train.add_argument("--seed", type=int, help="reproducibility tag (default 0)")
    _add_gate_flags(p_train, with_format=False)
    p_train.set_defaults(func=_cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a model on a corpus split")
    p_eval.add_argument("--corpus", required=True, help="labeled corpus file")
    p_eval.add_argument(
        "--split",
        choices=["holdout", "train", "all"],
        default="holdout",
        help="corpus slice to score (default holdout)",
    )
    p_eval.add_argument("--report-dir", help="write CSV and figures here")
    _add_gate_flags(p_eval, with_format=False)
    p_eval.set_defaults(func=_cmd_eval)

    p_gen = sub.add_parser("gen-corpus", help="generate a synthetic labeled corpus")
    p_gen.add_argument("--n", type=int, required=True, help="number of entries (>= 10)")
    p_gen.add_argument("--seed", type=int, required=True, help="generator seed")
    p_gen.add_argument("--out", required=True, help="corpus output path")
    p_gen.set_defaults(func=_cmd_gen_corpus)

    return parser


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_analyze(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    if args.query is not None:
        text, query_id = args.query, "inline"
    elif args.file is not None:
        with open(args.file, "r", encoding="utf-8") as fh:
            text = fh.read()
        query_id = args.file
    else:
        text, query_id = sys.stdin.read(), "stdin"
    model = _load_model_for(config)
    lexicon = config.load_lexicon()
    verdict = detect_overexposure(
        text,
        model,
        lexicon,
        config,
        query_id=query_id,
        embedder_handle=config.make_embedder(),
    )
    if config.output_format == "json":
        print(render_report_json(verdict))
    else:
        print(render_report_text(verdict))
    return 2 if verdict.status == "BLOCKED" else 0


def _expand_paths(raw_paths: list[str]) -> list[str]:
    paths: list[str] = []
    for raw in raw_paths:
        path = Path(raw)
        if path.is_dir():
            paths.extend(str(p) for p in sorted(path.rglob("*.sql")))
        else:
            paths.append(raw)
    return paths


def _cmd_batch(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    model = _load_model_for(config)
    lexicon = config.load_lexicon()
    paths = _expand_paths(args.paths)
    batch = analyze_batch(paths, model, lexicon, config, jobs=max(args.jobs, 1))
    if config.output_format == "json":
        sys.stdout.write(render_batch_json(batch))
    else:
        sys.stdout.write(render_batch_text(batch))
    if args.report_dir:
        from .report import write_batch_report  # matplotlib import is heavy

        write_batch_report(args.report_dir, batch, config.threshold)
    if batch.errors:
        return 1
    return 2 if batch.blocked else 0


def _hyperparams_from_args(args: argparse.Namespace) -> GbdtHyperparams:
    defaults = GbdtHyperparams()
    return GbdtHyperparams(
        rounds=args.rounds if args.rounds is not None else defaults.rounds,
        max_depth=args.max_depth if args.max_depth is not None else defaults.max_depth,
        learning_rate=args.eta if args.eta is not None else defaults.learning_rate,
        l2_lambda=args.l2_lambda if args.l2_lambda is not None else defaults.l2_lambda,
        gamma=args.gamma if args.gamma is not None else defaults.gamma,
        min_child_weight=(
            args.min_child_weight
            if args.min_child_weight is not None
            else defaults.min_child_weight
        ),
        seed=args.seed if args.seed is not None else defaults.seed,
    )


def _cmd_train(args: argparse.Namespace) -> int:
    config = _config_from_args(args, with_format=False)
    lexicon = config.load_lexicon()
    entries = load_corpus(args.corpus)
    hp = _hyperparams_from_args(args)
    vectors = vectorize_queries([e.sql for e in entries], lexicon, config)
    labels = [float(e.label) for e in entries]
    with open(args.corpus, "rb") as fh:
        corpus_sha = hashlib.sha256(fh.read()).hexdigest()
    model = train(
        vectors,
        labels,
        hp,
        schema_fingerprint=schema_fingerprint(config.embed_dim),
        training_meta={"corpus_sha256": corpus_sha, "examples": len(entries)},
    )
    save_model(model, args.out)
    logger.info("trained %s on %d examples", model.model_id(), len(entries))
    print(f"model written to {args.out} ({model.model_id()})")
    return 0


def _format_metrics(m) -> str:
    return (
        '{"accuracy":%.6f,"precision":%.6f,"recall":%.6f,"auc":%.6f,'
        '"tp":%d,"fp":%d,"tn":%d,"fn":%d}'
        % (m.accuracy, m.precision, m.recall, m.auc, m.tp, m.fp, m.tn, m.fn)
    )


def _cmd_eval(args: argparse.Namespace) -> int:
    config = _config_from_args(args, with_format=False)
    model = _load_model_for(config)
    lexicon = config.load_lexicon()
    entries = load_corpus(args.corpus)
    train_part, holdout_part = split_corpus(entries)
    part = {"holdout": holdout_part, "train": train_part, "all": entries}[args.split]
    if not part:
        raise ConfigError(f"corpus split {args.split!r} is empty")
    vectors = vectorize_queries([e.sql for e in part], lexicon, config)
    labels = [float(e.label) for e in part]
    metrics = evaluate(model, vectors, labels, config.threshold)
    # the naive comparator: flag every sensitive grouping outright
    dim = config.embed_dim
    baseline_scores = [float(rule_baseline_from_vector(v, dim)) for v in vectors]
    baseline = metrics_from_scores(baseline_scores, labels, 0.5)
    line = (
        '{"split":%s,"examples":%d,"threshold":%.6f,"model":%s,"rule_baseline":%s}'
        % (
            json.dumps(args.split),
            len(part),
            config.threshold,
            _format_metrics(metrics),
            _format_metrics(baseline),
        )
    )
    print(line)
    if args.report_dir:
        from .report import write_eval_report  # matplotlib import is heavy

        scores = predict_proba_batch(model, vectors)
        write_eval_report(
            args.report_dir,
            [e.query_id for e in part],
            [e.label for e in part],
            [float(s) for s in scores],
            metrics,
            baseline,
            config.threshold,
        )
    return 0


def rule_baseline_from_vector(vector: tuple[float, ...], embedding_dim: int) -> int:
    """Apply the rule baseline to a fused vector (slot f8 sits at D+8)."""
    from .features import SyntacticFeatures

    return rule_baseline(SyntacticFeatures(tuple(vector[embedding_dim:])))


def _cmd_gen_corpus(args: argparse.Namespace) -> int:
    entries = generate_corpus(args.n, args.seed)
    save_corpus(entries, args.out)
    risky = sum(e.label for e in entries)
    print(f"corpus written to {args.out} ({len(entries)} entries, {risky} risky)")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except MetricGateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
