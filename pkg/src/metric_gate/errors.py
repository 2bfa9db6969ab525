"""Exception types shared across the analyzer.

Every error the public API can raise lives here so callers can catch one
family (``MetricGateError``) or discriminate precisely.
"""

from __future__ import annotations


class MetricGateError(Exception):
    """Base class for all analyzer errors."""


class SqlSyntaxError(MetricGateError):
    """Unparseable SQL. ``offset`` is the byte offset into the UTF-8 text."""

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class UnsupportedStatement(MetricGateError):
    """Statement parsed but is not a SELECT (INSERT, UPDATE, DDL, ...)."""


class LexiconError(MetricGateError):
    """Malformed lexicon file or overlapping synonym sets."""


class DimensionMismatch(MetricGateError):
    """Vector length disagrees with the configured or trained dimension."""


class ProviderError(MetricGateError):
    """External embedding provider failed or violated the line protocol."""


class EmptyDataset(MetricGateError):
    """Training or evaluation invoked with fewer than two examples."""


class NonFiniteInput(MetricGateError):
    """NaN or infinity in feature vectors or labels."""


class SchemaMismatch(MetricGateError):
    """Model fingerprint disagrees with the active feature configuration."""


class FormatVersionMismatch(MetricGateError):
    """Model file written by an incompatible format version."""


class CorruptModel(MetricGateError):
    """Model file failed checksum or structural validation."""


class InvalidCount(MetricGateError):
    """Corpus size below the supported minimum."""


class CorpusError(MetricGateError):
    """Malformed corpus file record."""


class ConfigError(MetricGateError):
    """Invalid gate configuration value or unreadable config file."""
