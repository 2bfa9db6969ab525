"""The gate: configuration, scoring pipeline, verdicts, and reports.

``detect_overexposure`` runs the full pipeline for one query, in this exact
order: parse, normalize, embed, extract features, fuse, score, threshold,
explain. A query is BLOCKED when its risk score strictly exceeds the
threshold; a score exactly at the threshold passes. Blocked verdicts always
carry at least one reason (a generic fallback if no template rule matched).

Reports are byte-stable: fixed field order, scores fixed to six decimals,
booleans lowercase. Two runs over the same inputs with the same model emit
identical bytes, which makes gate output diffable in CI.

Configuration resolves in three layers: built-in defaults, then an optional
config file (the ``METRIC_GATE_CONFIG`` environment variable points at one),
then explicit flags. Config files are flat ``key = value`` lines::

    # gate settings
    threshold = 0.85
    model = models/risk.json
    lexicon = conf/columns.lex
    embedder = builtin
    embed_dim = 64
    format = json
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .embedder import DEFAULT_DIM, ExternalEmbedder, embed
from .errors import ConfigError, MetricGateError
from .explain import RiskReason, fallback_reason, match_rules, render_explanation
from .features import (
    FEATURE_NAMES,
    SyntacticFeatures,
    extract_features,
    fuse,
    schema_fingerprint,
)
from .gbdt import GbdtModel, check_schema, predict_proba
from .lexicon import SensitiveLexicon, load_lexicon_file
from .sqlfront import QuerySummary, normalize_query, parse_sql

__all__ = [
    "CONFIG_ENV_VAR",
    "GateConfig",
    "Verdict",
    "BatchItemError",
    "BatchResult",
    "detect_overexposure",
    "analyze_batch",
    "vectorize_queries",
    "render_report_json",
    "render_report_text",
    "render_batch_json",
    "render_batch_text",
    "load_config_file",
    "resolve_config",
]

CONFIG_ENV_VAR = "METRIC_GATE_CONFIG"

REDUCED_CONFIDENCE_NOTE = "(reduced confidence: advanced SQL constructs present)"


@dataclass(eq=True)
class GateConfig:
    threshold: float = 0.85
    model_path: str | None = None
    lexicon_path: str | None = None
    embedder: str = "builtin"  # "builtin" | "external"
    embedder_cmd: str | None = None
    embed_dim: int = DEFAULT_DIM
    output_format: str = "json"  # "json" | "text"

    def __post_init__(self) -> None:
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError(
                f"threshold must be strictly between 0 and 1, got {self.threshold}"
            )
        if self.embedder not in ("builtin", "external"):
            raise ConfigError(f"unknown embedder {self.embedder!r}")
        if self.embedder == "external" and not self.embedder_cmd:
            raise ConfigError("external embedder requires embedder_cmd")
        if self.embed_dim < 1:
            raise ConfigError(f"embed_dim must be positive, got {self.embed_dim}")
        if self.output_format not in ("json", "text"):
            raise ConfigError(f"unknown output format {self.output_format!r}")

    def make_embedder(self) -> ExternalEmbedder | None:
        if self.embedder == "external":
            return ExternalEmbedder(self.embedder_cmd.split(), dim=self.embed_dim)
        return None

    def load_lexicon(self) -> SensitiveLexicon:
        if self.lexicon_path:
            return load_lexicon_file(self.lexicon_path)
        return SensitiveLexicon()


@dataclass(eq=True)
class Verdict:
    query_id: str
    status: str  # "APPROVED" | "BLOCKED"
    risk_score: float
    threshold: float
    reasons: list[RiskReason]
    features: SyntacticFeatures
    reduced_confidence: bool
    model_id: str
    explanation: str
    summary: QuerySummary


@dataclass(eq=True)
class BatchItemError:
    query_id: str
    error: str
    status: str = "ERROR"


@dataclass
class BatchResult:
    results: list[Verdict | BatchItemError]  # in input order
    approved: int = 0
    blocked: int = 0
    errors: int = 0

    def __post_init__(self) -> None:
        for item in self.results:
            if isinstance(item, BatchItemError):
                self.errors += 1
            elif item.status == "BLOCKED":
                self.blocked += 1
            else:
                self.approved += 1


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------


def detect_overexposure(
    query_text: str,
    model: GbdtModel,
    lexicon: SensitiveLexicon,
    config: GateConfig,
    query_id: str = "query",
    embedder_handle: ExternalEmbedder | None = None,
) -> Verdict:
    """Score one query end to end and decide BLOCKED/APPROVED."""
    summary = parse_sql(query_text)
    normalized = normalize_query(query_text)
    if embedder_handle is not None:
        embedding = embedder_handle.embed(normalized)
    else:
        embedding = embed(normalized, dim=config.embed_dim)
    features = extract_features(summary, lexicon)
    fused = fuse(embedding, features, expected_embedding_dim=config.embed_dim)
    check_schema(model, schema_fingerprint(config.embed_dim))
    score = predict_proba(model, fused.values)
    status = "BLOCKED" if score > config.threshold else "APPROVED"
    reasons = match_rules(features, summary, lexicon)
    if status == "BLOCKED" and not reasons:
        reasons = [fallback_reason()]
    return Verdict(
        query_id=query_id,
        status=status,
        risk_score=score,
        threshold=config.threshold,
        reasons=reasons,
        features=features,
        reduced_confidence=summary.reduced_confidence,
        model_id=model.model_id(),
        explanation=render_explanation(reasons, status),
        summary=summary,
    )


def analyze_batch(
    paths: list[str],
    model: GbdtModel,
    lexicon: SensitiveLexicon,
    config: GateConfig,
    jobs: int = 1,
) -> BatchResult:
    """Analyze many .sql files; per-file failures never abort the batch."""
    embedder_handle = config.make_embedder()

    def process(path: str) -> Verdict | BatchItemError:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except (OSError, UnicodeDecodeError) as exc:
            return BatchItemError(query_id=path, error=f"unreadable: {exc}")
        try:
            return detect_overexposure(
                text,
                model,
                lexicon,
                config,
                query_id=path,
                embedder_handle=embedder_handle,
            )
        except MetricGateError as exc:
            return BatchItemError(
                query_id=path, error=f"{type(exc).__name__}: {exc}"
            )

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(process, paths))  # map preserves order
    else:
        results = [process(path) for path in paths]
    return BatchResult(results=results)


def vectorize_queries(
    texts: list[str],
    lexicon: SensitiveLexicon,
    config: GateConfig,
) -> list[tuple[float, ...]]:
    """Fused vectors for many queries (training/evaluation path)."""
    embedder_handle = config.make_embedder()
    normalized = [normalize_query(t) for t in texts]
    if embedder_handle is not None:
        embeddings = embedder_handle.embed_batch(normalized)
    else:
        embeddings = [embed(n, dim=config.embed_dim) for n in normalized]
    vectors: list[tuple[float, ...]] = []
    for text, emb in zip(texts, embeddings):
        features = extract_features(parse_sql(text), lexicon)
        vectors.append(fuse(emb, features, config.embed_dim).values)
    return vectors


# ---------------------------------------------------------------------------
# reports (byte-stable)
# ---------------------------------------------------------------------------


def _render_reason(reason: RiskReason) -> str:
    return (
        '{"code":%s,"message":%s,"columns":%s}'
        % (
            json.dumps(reason.code),
            json.dumps(reason.message),
            json.dumps(reason.columns, separators=(",", ":")),
        )
    )


def render_report_json(verdict: Verdict) -> str:
    """One verdict as a single JSON line with fixed field order."""
    reasons = ",".join(_render_reason(r) for r in verdict.reasons)
    features = ",".join(
        '"%s":%d' % (name, int(value))
        for name, value in zip(FEATURE_NAMES, verdict.features.values)
    )
    return (
        '{"query_id":%s,"status":%s,"risk_score":%.6f,"threshold":%.6f,'
        '"reasons":[%s],"features":{%s},"reduced_confidence":%s,"model_id":%s}'
        % (
            json.dumps(verdict.query_id),
            json.dumps(verdict.status),
            verdict.risk_score,
            verdict.threshold,
            reasons,
            features,
            "true" if verdict.reduced_confidence else "false",
            json.dumps(verdict.model_id),
        )
    )


def render_report_text(verdict: Verdict) -> str:
    lines = [
        f"{verdict.query_id}: {verdict.status} "
        f"risk_score={verdict.risk_score:.6f} threshold={verdict.threshold:.6f}"
    ]
    if verdict.explanation:
        lines.append(verdict.explanation)
    if verdict.reduced_confidence:
        lines.append(REDUCED_CONFIDENCE_NOTE)
    return "\n".join(lines)


def _render_error_json(item: BatchItemError) -> str:
    return '{"query_id":%s,"status":"ERROR","error":%s}' % (
        json.dumps(item.query_id),
        json.dumps(item.error),
    )


def render_batch_json(batch: BatchResult) -> str:
    lines = [
        render_report_json(item)
        if isinstance(item, Verdict)
        else _render_error_json(item)
        for item in batch.results
    ]
    lines.append(
        '{"approved":%d,"blocked":%d,"errors":%d}'
        % (batch.approved, batch.blocked, batch.errors)
    )
    return "\n".join(lines) + "\n"


def render_batch_text(batch: BatchResult) -> str:
    lines = []
    for item in batch.results:
        if isinstance(item, Verdict):
            lines.append(render_report_text(item))
        else:
            lines.append(f"{item.query_id}: ERROR {item.error}")
    lines.append(
        f"approved={batch.approved} blocked={batch.blocked} errors={batch.errors}"
    )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# configuration files
# ---------------------------------------------------------------------------

_CONFIG_KEYS = {
    "threshold",
    "model",
    "lexicon",
    "embedder",
    "embedder_cmd",
    "embed_dim",
    "format",
}


def load_config_file(path: str) -> dict[str, str]:
    """Flat ``key = value`` file; unknown keys are an error."""
    values: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                key, _, value = line.partition("=")
                key = key.strip()
                if key not in _CONFIG_KEYS:
                    raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
                values[key] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return values


def resolve_config(overrides: dict[str, object]) -> GateConfig:
    """defaults < METRIC_GATE_CONFIG file < explicit overrides (None = unset)."""
    merged: dict[str, object] = {}
    env_path = os.environ.get(CONFIG_ENV_VAR)
    if env_path:
        file_values = load_config_file(env_path)
        if "threshold" in file_values:
            try:
                merged["threshold"] = float(file_values["threshold"])
            except ValueError as exc:
                raise ConfigError(f"bad threshold in {env_path}") from exc
        if "model" in file_values:
            merged["model_path"] = file_values["model"]
        if "lexicon" in file_values:
            merged["lexicon_path"] = file_values["lexicon"]
        if "embedder" in file_values:
            merged["embedder"] = file_values["embedder"]
        if "embedder_cmd" in file_values:
            merged["embedder_cmd"] = file_values["embedder_cmd"]
        if "embed_dim" in file_values:
            try:
                merged["embed_dim"] = int(file_values["embed_dim"])
            except ValueError as exc:
                raise ConfigError(f"bad embed_dim in {env_path}") from exc
        if "format" in file_values:
            merged["output_format"] = file_values["format"]
    for key, value in overrides.items():
        if value is not None:
            merged[key] = value
    return GateConfig(**merged)
