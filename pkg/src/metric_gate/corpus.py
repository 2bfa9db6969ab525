"""Synthetic labeled query corpus: schema, label oracle, seeded generator.

No real workload ships with the analyzer, so training and evaluation run on
queries composed against a fictional hospital analytics schema. Labels come
from a transparent oracle over the syntactic feature slots, so the ground truth
is auditable, and a trained model can be checked against it exactly.

Label oracle (1 = overexposing, 0 = acceptable)::

    risky  iff  grouped ZIP column            (flag_zip,  f12)
            or  grouped DOB column            (flag_dob,  f10)
            or  >= 2 sensitive categories grouped          (f8 >= 2)
            or  (>= 1 sensitive grouped and >= 2 joins)    (f8 >= 1 and f1 >= 2)

Grouping by gender alone is deliberately *not* risky: gender groups are
population-scale, which is exactly the judgment call a naive "flag every
sensitive column" rule engine gets wrong (see ``rule_baseline``).

Generation is fully deterministic for a given (n, seed): templates draw from
a seeded RNG, the risky fraction is forced into [0.30, 0.70] by skipping
draws for an over-full class, and wrapper templates (CTE/subquery/window)
are capped at 20% of entries. Three canonical reference queries are always
included first with ids P-Q1/P-Q2/P-Q3; the deterministic train/holdout
split pins them to the training side so held-out metrics never touch them.
"""

from __future__ import annotations

import hashlib
import json
import logging
import random
from dataclasses import dataclass

from .errors import CorpusError, InvalidCount
from .features import SyntacticFeatures, extract_features
from .lexicon import SensitiveLexicon
from .sqlfront import parse_sql

__all__ = [
    "SchemaDef",
    "HOSPITAL_SCHEMA",
    "REFERENCE_FIXTURES",
    "CorpusEntry",
    "label_oracle",
    "rule_baseline",
    "generate_corpus",
    "save_corpus",
    "load_corpus",
    "split_corpus",
]

logger = logging.getLogger(__name__)


@dataclass
class SchemaDef:
    """Tables available to the generator; sensitive columns per the lexicon."""

    tables: dict[str, list[str]]
    sensitive_columns: frozenset[str]
    base_table: str = "patient_data"


HOSPITAL_SCHEMA = SchemaDef(
    tables={
        "patient_data": [
            "patient_id",
            "dob",
            "gender",
            "zip",
            "department",
            "diagnosis_code",
            "wait_time",
        ],
        "visits": ["visit_id", "patient_id", "visit_date", "clinic"],
        "donations": ["donation_id", "patient_id", "campaign", "amount"],
    },
    sensitive_columns=frozenset({"dob", "gender", "zip", "diagnosis_code"}),
)

# canonical reference queries, always present with fixed ids
REFERENCE_FIXTURES: tuple[tuple[str, str], ...] = (
    ("P-Q1", "SELECT zip, COUNT(*) FROM patient_data GROUP BY zip;"),
    (
        "P-Q2",
        "SELECT gender, diagnosis_code, COUNT(*) FROM patient_data "
        "GROUP BY gender, diagnosis_code;",
    ),
    ("P-Q3", "SELECT gender, COUNT(*) FROM patient_data GROUP BY gender;"),
)


@dataclass(eq=True)
class CorpusEntry:
    query_id: str
    label: int
    template_id: str
    sql: str


def label_oracle(features: SyntacticFeatures) -> int:
    """Ground-truth overexposure label from feature slots f1, f8, f10, f12."""
    join_count = features[1]
    sensitive_grouped = features[8]
    flag_dob = features[10]
    flag_zip = features[12]
    if flag_zip >= 1 or flag_dob >= 1:
        return 1
    if sensitive_grouped >= 2:
        return 1
    if sensitive_grouped >= 1 and join_count >= 2:
        return 1
    return 0


def rule_baseline(features: SyntacticFeatures) -> int:
    """What a naive rule engine does: flag any sensitive grouping at all."""
    return 1 if features[8] >= 1 else 0


# ---------------------------------------------------------------------------
# generation
# ---------------------------------------------------------------------------

_AGGS = ["COUNT(*)", "AVG(wait_time)", "SUM(wait_time)", "MIN(wait_time)", "MAX(wait_time)"]
_WHERE_PREDICATES = [
    "gender = 'F'",
    "gender = 'M'",
    "wait_time > 30",
    "wait_time <= 120",
    "department = 'cardiology'",
    "department = 'oncology'",
    "zip = '75001'",
    "dob < '1980-01-01'",
    "diagnosis_code = 'E11'",
]
_CLINICS = ["ER", "outpatient", "pediatrics"]
# templates that wrap the core query in advanced constructs; capped at 20%
_WRAP_TEMPLATES = frozenset({"cte", "subquery_from", "subquery_in", "window"})


class _Generator:
    def __init__(self, rng: random.Random, schema: SchemaDef) -> None:
        self.rng = rng
        self.schema = schema
        self.cols = schema.tables[schema.base_table]
        self.groupable = [c for c in self.cols if c != "wait_time"]

    def draw(self, allow_wrapped: bool) -> tuple[str, str]:
        """Returns (template_id, sql)."""
        templates = [
            self.single_group,
            self.multi_group,
            self.joined_group,
            self.filtered_group,
            self.plain_aggregate,
        ]
        if allow_wrapped:
            templates += [self.cte, self.subquery_from, self.subquery_in, self.window]
        return self.rng.choice(templates)()

    def _group_cols(self, k: int) -> list[str]:
        return self.rng.sample(self.groupable, k)

    def _single_col(self) -> str:
        # zip drawn at half the rate of other columns so that paired
        # sensitive groupings carry at least as much training mass as
        # single-zip ones; keeps risky-class composition balanced
        pool = [c for c in self.groupable for _ in range(1 if c == "zip" else 2)]
        return self.rng.choice(pool)

    def _agg(self) -> str:
        return self.rng.choice(_AGGS)

    def _where(self) -> str:
        if self.rng.random() < 0.5:
            return " WHERE " + self.rng.choice(_WHERE_PREDICATES)
        return ""

    def single_group(self) -> tuple[str, str]:
        col = self._single_col()
        sql = (
            f"SELECT {col}, {self._agg()} FROM patient_data"
            f"{self._where()} GROUP BY {col};"
        )
        return "single_group", sql

    def multi_group(self) -> tuple[str, str]:
        if self.rng.random() < 0.6:
            # demographic-by-medical pairings dominate real metric
            # queries, so over-represent them among multi-column groups
            extra = [c for c in self.groupable if c not in ("gender", "diagnosis_code")]
            cols = ["gender", "diagnosis_code"]
            if self.rng.random() < 0.25:
                cols.append(self.rng.choice(extra))
            self.rng.shuffle(cols)
        else:
            cols = self._group_cols(self.rng.randint(2, 3))
        col_list = ", ".join(cols)
        sql = (
            f"SELECT {col_list}, {self._agg()} FROM patient_data"
            f"{self._where()} GROUP BY {col_list};"
        )
        return "multi_group", sql

    def joined_group(self) -> tuple[str, str]:
        n_joins = self.rng.randint(1, 3)
        joins = []
        alias_pool = [("visits", "v"), ("donations", "d"), ("visits", "v2")]
        for table, alias in alias_pool[:n_joins]:
            joins.append(f" JOIN {table} {alias} ON p.patient_id = {alias}.patient_id")
        cols = self._group_cols(self.rng.randint(1, 2))
        col_list = ", ".join(f"p.{c}" for c in cols)
        sql = (
            f"SELECT {col_list}, {self._agg()} FROM patient_data p"
            f"{''.join(joins)} GROUP BY {col_list};"
        )
        return "joined_group", sql

    def filtered_group(self) -> tuple[str, str]:
        col = self._single_col()
        preds = self.rng.sample(_WHERE_PREDICATES, self.rng.randint(1, 2))
        sql = (
            f"SELECT {col}, {self._agg()} FROM patient_data"
            f" WHERE {' AND '.join(preds)} GROUP BY {col};"
        )
        return "filtered_group", sql

    def plain_aggregate(self) -> tuple[str, str]:
        aggs = ", ".join(self.rng.sample(_AGGS, self.rng.randint(1, 2)))
        sql = f"SELECT {aggs} FROM patient_data{self._where()};"
        return "plain_aggregate", sql

    def cte(self) -> tuple[str, str]:
        cols = self._group_cols(self.rng.randint(1, 2))
        inner_cols = ", ".join(dict.fromkeys(cols + ["wait_time"]))
        col_list = ", ".join(cols)
        sql = (
            f"WITH base AS (SELECT {inner_cols} FROM patient_data{self._where()}) "
            f"SELECT {col_list}, {self._agg()} FROM base GROUP BY {col_list};"
        )
        return "cte", sql

    def subquery_from(self) -> tuple[str, str]:
        cols = self._group_cols(self.rng.randint(1, 2))
        inner_cols = ", ".join(dict.fromkeys(cols + ["wait_time"]))
        col_list = ", ".join(cols)
        sql = (
            f"SELECT {col_list}, {self._agg()} FROM "
            f"(SELECT {inner_cols} FROM patient_data{self._where()}) sub "
            f"GROUP BY {col_list};"
        )
        return "subquery_from", sql

    def subquery_in(self) -> tuple[str, str]:
        col = self.rng.choice(self.groupable)
        clinic = self.rng.choice(_CLINICS)
        sql = (
            f"SELECT {col}, {self._agg()} FROM patient_data"
            f" WHERE patient_id IN (SELECT patient_id FROM visits"
            f" WHERE clinic = '{clinic}') GROUP BY {col};"
        )
        return "subquery_in", sql

    def window(self) -> tuple[str, str]:
        part = self.rng.choice(self.groupable)
        sql = (
            f"SELECT {part}, AVG(wait_time) OVER (PARTITION BY {part}) "
            f"FROM patient_data{self._where()};"
        )
        return "window", sql


def generate_corpus(
    n: int,
    seed: int,
    schema: SchemaDef | None = None,
    lexicon: SensitiveLexicon | None = None,
) -> list[CorpusEntry]:
    """Deterministically compose n labeled queries (n >= 10)."""
    if n < 10:
        raise InvalidCount(f"corpus size must be at least 10, got {n}")
    schema = schema or HOSPITAL_SCHEMA
    lexicon = lexicon or SensitiveLexicon()
    rng = random.Random(seed)
    gen = _Generator(rng, schema)

    class_cap = (7 * n) // 10  # both classes <= 70% => both >= 30%
    wrap_cap = n // 5
    entries: list[CorpusEntry] = []
    class_counts = [0, 0]
    wrapped = 0

    for query_id, sql in REFERENCE_FIXTURES:
        label = _label_of(sql, lexicon)
        entries.append(CorpusEntry(query_id, label, "reference", sql))
        class_counts[label] += 1

    attempts = 0
    max_attempts = 200 * n
    while len(entries) < n:
        attempts += 1
        if attempts > max_attempts:
            raise RuntimeError("corpus generation failed to balance classes")
        template_id, sql = gen.draw(allow_wrapped=wrapped < wrap_cap)
        label = _label_of(sql, lexicon)
        if class_counts[label] >= class_cap:
            continue  # class quota full; the draw still advanced the RNG
        class_counts[label] += 1
        if template_id in _WRAP_TEMPLATES:
            wrapped += 1
        entries.append(
            CorpusEntry(f"G-{len(entries) + 1:05d}", label, template_id, sql)
        )
    logger.debug(
        "generated %d entries (risky=%d, wrapped=%d, attempts=%d)",
        n, class_counts[1], wrapped, attempts,
    )
    return entries


def _label_of(sql: str, lexicon: SensitiveLexicon) -> int:
    return label_oracle(extract_features(parse_sql(sql), lexicon))


# ---------------------------------------------------------------------------
# corpus files and splits
# ---------------------------------------------------------------------------


def save_corpus(entries: list[CorpusEntry], path: str) -> None:
    """One JSON record per line; SQL stays single-line via JSON escaping."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for entry in entries:
            record = {
                "query_id": entry.query_id,
                "label": entry.label,
                "template_id": entry.template_id,
                "sql": entry.sql,
            }
            fh.write(json.dumps(record, separators=(",", ":")) + "\n")


def load_corpus(path: str) -> list[CorpusEntry]:
    entries: list[CorpusEntry] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                entries.append(
                    CorpusEntry(
                        query_id=str(record["query_id"]),
                        label=int(record["label"]),
                        template_id=str(record["template_id"]),
                        sql=str(record["sql"]),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise CorpusError(f"{path}:{lineno}: malformed corpus record: {exc}") from exc
    return entries


def _holdout_bucket(query_id: str) -> int:
    digest = hashlib.sha256(query_id.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % 100


def split_corpus(
    entries: list[CorpusEntry],
) -> tuple[list[CorpusEntry], list[CorpusEntry]]:
    """Deterministic ~80/20 split keyed on query_id; P-* ids always train."""
    train: list[CorpusEntry] = []
    holdout: list[CorpusEntry] = []
    for entry in entries:
        if entry.query_id.startswith("P-") or _holdout_bucket(entry.query_id) < 80:
            train.append(entry)
        else:
            holdout.append(entry)
    return train, holdout
