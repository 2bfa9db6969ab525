"""Reason codes and human-readable explanations for gate verdicts.

A small rule table, evaluated in fixed order against the feature slots and
the grouped sensitive columns. Codes and message strings are stable contract
surface: downstream tooling matches on them, so edits here are breaking
changes. Every rule requires at least one sensitive grouped column (f8 >= 1);
queries that group nothing sensitive produce no reasons at all.

``R_OK_NOTE`` is the "nothing alarming" annotation: it fires only when a
sensitive attribute is grouped but no other rule matched. A blocked verdict
with no matched rule still must explain itself; ``render_explanation`` then
falls back to a generic review sentence (reason code ``R_FALLBACK``).
"""

from __future__ import annotations

from dataclasses import dataclass

from .features import SyntacticFeatures
from .lexicon import SensitiveLexicon
from .sqlfront import QuerySummary

__all__ = [
    "RiskReason",
    "match_rules",
    "render_explanation",
    "fallback_reason",
    "FALLBACK_MESSAGE",
]


@dataclass(eq=True)
class RiskReason:
    code: str
    message: str
    columns: list[str]
    category: str | None = None


_MSG_ZIP = (
    "ZIP code is a quasi-identifier and may expose individual locations "
    "if group size is small."
)
_MSG_DOB = "Date of birth in grouping can uniquely identify individuals."
_MSG_HEALTH_COMBO = (
    "Grouping by gender and medical code may leak health-related sensitive segments."
)
_MSG_SMALL_GROUPS = (
    "Metric groups by multiple attributes including sensitive fields; "
    "group sizes could be too small."
)
_MSG_SENSITIVE_JOIN = (
    "Sensitive grouping combined with multiple joins increases linkage risk."
)
_MSG_OK_NOTE = (
    "While a sensitive attribute is grouped, group sizes are likely "
    "sufficient to prevent leakage."
)

FALLBACK_MESSAGE = (
    "Risk model flagged this query; no specific template rule matched — "
    "review grouping granularity."
)


def _grouped_in(summary: QuerySummary, lexicon: SensitiveLexicon, *cats: str) -> list[str]:
    return [
        col
        for col in summary.group_by_columns
        if lexicon.classify_column(col) in cats
    ]


def _grouped_sensitive(summary: QuerySummary, lexicon: SensitiveLexicon) -> list[str]:
    return [
        col
        for col in summary.group_by_columns
        if lexicon.classify_column(col) is not None
    ]


def match_rules(
    features: SyntacticFeatures,
    summary: QuerySummary,
    lexicon: SensitiveLexicon,
) -> list[RiskReason]:
    """Evaluate the rule table in order; returns matched reasons."""
    f0 = features[0]  # group_by_count
    f1 = features[1]  # join_count
    f8 = features[8]  # sensitive_groupby_count
    if f8 < 1:
        return []

    reasons: list[RiskReason] = []
    flag_dob, flag_gender = features[10], features[11]
    flag_zip, flag_diagnosis = features[12], features[13]

    if flag_zip >= 1:
        reasons.append(
            RiskReason(
                code="R_ZIP",
                message=_MSG_ZIP,
                columns=_grouped_in(summary, lexicon, "ZIP"),
                category="ZIP",
            )
        )
    if flag_dob >= 1:
        reasons.append(
            RiskReason(
                code="R_DOB",
                message=_MSG_DOB,
                columns=_grouped_in(summary, lexicon, "DOB"),
                category="DOB",
            )
        )
    if flag_gender >= 1 and flag_diagnosis >= 1:
        reasons.append(
            RiskReason(
                code="R_HEALTH_COMBO",
                message=_MSG_HEALTH_COMBO,
                columns=_grouped_in(summary, lexicon, "GENDER", "DIAGNOSIS"),
            )
        )
    if f0 >= 3 and f8 >= 1:
        reasons.append(
            RiskReason(
                code="R_SMALL_GROUPS",
                message=_MSG_SMALL_GROUPS,
                columns=_grouped_sensitive(summary, lexicon),
            )
        )
    if f8 >= 1 and f1 >= 2:
        reasons.append(
            RiskReason(
                code="R_SENSITIVE_JOIN",
                message=_MSG_SENSITIVE_JOIN,
                columns=_grouped_sensitive(summary, lexicon),
            )
        )
    if not reasons:
        reasons.append(
            RiskReason(
                code="R_OK_NOTE",
                message=_MSG_OK_NOTE,
                columns=_grouped_sensitive(summary, lexicon),
            )
        )
    return reasons


def fallback_reason() -> RiskReason:
    """Reason attached to a blocked verdict no template rule covered."""
    return RiskReason(code="R_FALLBACK", message=FALLBACK_MESSAGE, columns=[])


def render_explanation(reasons: list[RiskReason], status: str) -> str:
    """Join reason messages in rule order into one explanation string."""
    if reasons:
        return " ".join(reason.message for reason in reasons)
    if status == "BLOCKED":
        return FALLBACK_MESSAGE
    return ""
