"""Sensitive-column lexicon: category names and their column synonyms.

Eight kinds of quasi-identifying or directly identifying columns are tracked
under seven fixed categories. Category order is part of the public contract:
feature slots, model fingerprints, and report fields all derive from it, so
reordering would silently invalidate trained models.

Matching is exact (case-insensitive via the frontend's lowercasing): a column
named ``zip_code_5`` does not match ``zip``. That rigidity is a known blind
spot of keyword matching; deployments cover their own naming conventions by
loading a lexicon file (``--lexicon``) instead of patching the defaults.

Lexicon file format, one category per line::

    # comment
    ZIP = zip, zipcode, postal_code, postcode
    NAME = name, first_name, last_name, full_name

Categories not listed keep their default synonym set. Unknown category names
are an error, as are synonyms claimed by two categories.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import LexiconError

__all__ = ["CATEGORIES", "SensitiveLexicon", "load_lexicon_file"]

# fixed category order; feature slots f10..f16 follow this order
CATEGORIES: tuple[str, ...] = (
    "DOB",
    "GENDER",
    "ZIP",
    "DIAGNOSIS",
    "ROLE",
    "NAME",
    "NATIONAL_ID",
)

_DEFAULT_SYNONYMS: dict[str, frozenset[str]] = {
    "DOB": frozenset({"dob", "date_of_birth", "birthdate"}),
    "GENDER": frozenset({"gender", "sex"}),
    "ZIP": frozenset({"zip", "zipcode", "postal_code"}),
    "DIAGNOSIS": frozenset({"diagnosis_code", "icd_code", "diagnosis"}),
    "ROLE": frozenset({"role", "job_title"}),
    "NAME": frozenset({"name", "first_name", "last_name"}),
    "NATIONAL_ID": frozenset({"ssn"}),
}


@dataclass
class SensitiveLexicon:
    """Maps column names to sensitivity categories. Synonym sets are disjoint."""

    synonyms: dict[str, frozenset[str]] = field(
        default_factory=lambda: dict(_DEFAULT_SYNONYMS)
    )

    def __post_init__(self) -> None:
        unknown = set(self.synonyms) - set(CATEGORIES)
        if unknown:
            raise LexiconError(f"unknown categories: {sorted(unknown)}")
        for category in CATEGORIES:
            self.synonyms.setdefault(category, _DEFAULT_SYNONYMS[category])
        claimed: dict[str, str] = {}
        for category in CATEGORIES:
            for column in self.synonyms[category]:
                if column in claimed:
                    raise LexiconError(
                        f"column {column!r} claimed by both "
                        f"{claimed[column]} and {category}"
                    )
                claimed[column] = category
        # column -> category reverse index, rebuilt once per construction
        self._index = claimed

    def classify_column(self, column_name: str) -> str | None:
        """Exact-match category lookup; None when the column is unlisted."""
        return self._index.get(column_name.lower())

    def categories_of(self, columns: list[str]) -> list[str]:
        """Distinct categories matched by ``columns``, in CATEGORIES order."""
        hit = {self._index[c.lower()] for c in columns if c.lower() in self._index}
        return [cat for cat in CATEGORIES if cat in hit]

    def fingerprint_text(self) -> str:
        """Category-order component of the model schema fingerprint."""
        return ",".join(CATEGORIES)


def load_lexicon_file(path: str) -> SensitiveLexicon:
    """Parse a ``CATEGORY = name1, name2`` file; unlisted categories default."""
    overrides: dict[str, frozenset[str]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise LexiconError(f"{path}:{lineno}: expected CATEGORY = names")
            category, _, names = line.partition("=")
            category = category.strip()
            if category not in CATEGORIES:
                raise LexiconError(f"{path}:{lineno}: unknown category {category!r}")
            if category in overrides:
                raise LexiconError(f"{path}:{lineno}: duplicate category {category}")
            columns = frozenset(
                name.strip().lower() for name in names.split(",") if name.strip()
            )
            if not columns:
                raise LexiconError(f"{path}:{lineno}: empty synonym list")
            overrides[category] = columns
    return SensitiveLexicon(synonyms=overrides)
