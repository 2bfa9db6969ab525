"""metric-gate: static privacy-risk analysis for metric-defining SQL.

A metric definition is parsed (never executed), reduced to a structural
summary, embedded, scored by a gradient-boosted model, and gated at a
configurable risk threshold. Blocked queries come back with stable reason
codes and a plain-language explanation.

Typical library use::

    from metric_gate import (
        GateConfig, SensitiveLexicon, detect_overexposure, load_model,
    )

    model = load_model("risk-model.json")
    verdict = detect_overexposure(
        "SELECT zip, COUNT(*) FROM patient_data GROUP BY zip;",
        model, SensitiveLexicon(), GateConfig(),
    )
    assert verdict.status in ("BLOCKED", "APPROVED")

The ``metric-gate`` CLI wraps the same pipeline; see the README.
"""

from .corpus import (
    CorpusEntry,
    HOSPITAL_SCHEMA,
    REFERENCE_FIXTURES,
    SchemaDef,
    generate_corpus,
    label_oracle,
    load_corpus,
    rule_baseline,
    save_corpus,
    split_corpus,
)
from .embedder import (
    DEFAULT_DIM,
    EmbeddingVector,
    ExternalEmbedder,
    embed,
    fnv1a64,
    hash_token,
)
from .errors import (
    ConfigError,
    CorpusError,
    CorruptModel,
    DimensionMismatch,
    EmptyDataset,
    FormatVersionMismatch,
    InvalidCount,
    LexiconError,
    MetricGateError,
    NonFiniteInput,
    ProviderError,
    SchemaMismatch,
    SqlSyntaxError,
    UnsupportedStatement,
)
from .explain import RiskReason, match_rules, render_explanation
from .features import (
    FEATURE_NAMES,
    FusedVector,
    SyntacticFeatures,
    extract_features,
    fuse,
    schema_fingerprint,
)
from .gate import (
    BatchItemError,
    BatchResult,
    GateConfig,
    Verdict,
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
    EvalMetrics,
    GbdtHyperparams,
    GbdtModel,
    evaluate,
    load_model,
    metrics_from_scores,
    predict_proba,
    predict_proba_batch,
    save_model,
    train,
)
from .lexicon import CATEGORIES, SensitiveLexicon, load_lexicon_file
from .sqlfront import NormalizedTokens, QuerySummary, normalize_query, parse_sql

__version__ = "0.1.0"

__all__ = [
    "CATEGORIES",
    "CorpusEntry",
    "DEFAULT_DIM",
    "EmbeddingVector",
    "EvalMetrics",
    "ExternalEmbedder",
    "FEATURE_NAMES",
    "FusedVector",
    "GateConfig",
    "GbdtHyperparams",
    "GbdtModel",
    "HOSPITAL_SCHEMA",
    "NormalizedTokens",
    "REFERENCE_FIXTURES",
    "QuerySummary",
    "RiskReason",
    "SchemaDef",
    "SensitiveLexicon",
    "SyntacticFeatures",
    "Verdict",
    "BatchItemError",
    "BatchResult",
    "MetricGateError",
    "SqlSyntaxError",
    "UnsupportedStatement",
    "LexiconError",
    "DimensionMismatch",
    "ProviderError",
    "EmptyDataset",
    "NonFiniteInput",
    "SchemaMismatch",
    "FormatVersionMismatch",
    "CorruptModel",
    "InvalidCount",
    "CorpusError",
    "ConfigError",
    "analyze_batch",
    "detect_overexposure",
    "embed",
    "evaluate",
    "extract_features",
    "fnv1a64",
    "fuse",
    "generate_corpus",
    "hash_token",
    "label_oracle",
    "load_corpus",
    "load_lexicon_file",
    "load_model",
    "match_rules",
    "metrics_from_scores",
    "normalize_query",
    "parse_sql",
    "predict_proba",
    "predict_proba_batch",
    "render_batch_json",
    "render_batch_text",
    "render_explanation",
    "render_report_json",
    "render_report_text",
    "resolve_config",
    "rule_baseline",
    "save_corpus",
    "save_model",
    "schema_fingerprint",
    "split_corpus",
    "train",
    "vectorize_queries",
]
