"""Syntactic feature extraction and embedding/feature fusion.

Seventeen numeric slots summarize one query's structure. Slot order is a
contract shared with trained models (it feeds the schema fingerprint):

====  =========================  =============================================
slot  name                       value
====  =========================  =============================================
f0    group_by_count             len(group_by_columns)
f1    join_count                 explicit joins + comma-join pairs
f2    table_count                len(tables)
f3    select_column_count        non-aggregate projected columns
f4    subquery_depth             0 = flat
f5    cte_count                  WITH-clause entries
f6    window_fn_count            OVER(...) occurrences
f7    has_aggregate              1 if any aggregate call, else 0
f8    sensitive_groupby_count    distinct categories matched in GROUP BY
f9    sensitive_select_count     distinct categories in SELECT and WHERE
f10   flag_dob                   1 if a DOB column is grouped
f11   flag_gender                1 if a GENDER column is grouped
f12   flag_zip                   1 if a ZIP column is grouped
f13   flag_diagnosis             1 if a DIAGNOSIS column is grouped
f14   flag_role                  1 if a ROLE column is grouped
f15   flag_name                  1 if a NAME column is grouped
f16   flag_national_id           1 if a NATIONAL_ID column is grouped
====  =========================  =============================================

f8 always equals the sum of f10..f16. The fused vector a model consumes is
the embedding followed by these 17 slots, unscaled.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .embedder import EmbeddingVector
from .errors import DimensionMismatch
from .lexicon import CATEGORIES, SensitiveLexicon
from .sqlfront import QuerySummary

__all__ = [
    "FEATURE_NAMES",
    "SyntacticFeatures",
    "FusedVector",
    "extract_features",
    "fuse",
    "schema_fingerprint",
]

FEATURE_NAMES: tuple[str, ...] = (
    "group_by_count",
    "join_count",
    "table_count",
    "select_column_count",
    "subquery_depth",
    "cte_count",
    "window_fn_count",
    "has_aggregate",
    "sensitive_groupby_count",
    "sensitive_select_count",
    "flag_dob",
    "flag_gender",
    "flag_zip",
    "flag_diagnosis",
    "flag_role",
    "flag_name",
    "flag_national_id",
)

FEATURE_COUNT = len(FEATURE_NAMES)  # 17


@dataclass(eq=True)
class SyntacticFeatures:
    """The 17 structural slots for one query, in contract order."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.values) != FEATURE_COUNT:
            raise DimensionMismatch(
                f"expected {FEATURE_COUNT} feature slots, got {len(self.values)}"
            )

    def __getitem__(self, slot: int) -> float:
        return self.values[slot]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(FEATURE_NAMES, self.values))


@dataclass(eq=True)
class FusedVector:
    """Embedding dims [0, D) followed by feature slots [D, D+17)."""

    values: tuple[float, ...]
    embedding_dim: int


def extract_features(
    summary: QuerySummary, lexicon: SensitiveLexicon
) -> SyntacticFeatures:
    """Compute the 17 slots from a parsed summary and a lexicon."""
    groupby_cats = lexicon.categories_of(summary.group_by_columns)
    select_where = list(summary.select_columns) + list(summary.where_columns)
    select_cats = lexicon.categories_of(select_where)
    flags = tuple(
        1.0 if category in groupby_cats else 0.0 for category in CATEGORIES
    )
    values = (
        float(len(summary.group_by_columns)),
        float(summary.join_count),
        float(len(summary.tables)),
        float(len(summary.select_columns)),
        float(summary.subquery_depth),
        float(summary.cte_count),
        float(summary.window_fn_count),
        1.0 if summary.aggregate_functions else 0.0,
        float(len(groupby_cats)),
        float(len(select_cats)),
    ) + flags
    return SyntacticFeatures(values)


def schema_fingerprint(embedding_dim: int) -> str:
    """Hash of everything a trained model's input layout depends on:
    embedding dimension, feature slot order, lexicon category order."""
    text = (
        f"dim={embedding_dim}"
        f";slots={','.join(FEATURE_NAMES)}"
        f";categories={','.join(CATEGORIES)}"
    )
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def fuse(
    embedding: EmbeddingVector,
    features: SyntacticFeatures,
    expected_embedding_dim: int | None = None,
) -> FusedVector:
    """Concatenate embedding and feature slots, no scaling.

    Raises DimensionMismatch when the embedding does not have the dimension
    the surrounding configuration (model schema) expects.
    """
    dim = len(embedding.values)
    if expected_embedding_dim is not None and dim != expected_embedding_dim:
        raise DimensionMismatch(
            f"embedding has dimension {dim}, expected {expected_embedding_dim}"
        )
    return FusedVector(
        values=tuple(embedding.values) + tuple(features.values),
        embedding_dim=dim,
    )
