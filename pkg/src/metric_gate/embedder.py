"""Query embedding: built-in hashed bag-of-ngrams and external providers.

The built-in embedder needs no weights and is bit-reproducible everywhere: it
signed-hashes every unigram and adjacent bigram of the normalized token
stream into D buckets and L2-normalizes the result. Hashing is 64-bit FNV-1a
over UTF-8 bytes:

* bucket index: ``fnv1a64(token) mod D``
* sign: +1 when bit 63 of ``fnv1a64("#" + token)`` is 0, else -1
* bigram token for adjacent tokens a, b: ``a + "_" + b``

Masked literals (``<str>``, ``<num>``) hash like any other token, which is
what makes two queries differing only in literal values embed identically.

An external provider is any executable speaking the line protocol: one
normalized query per stdin line, one line of D space-separated floats per
query on stdout, non-zero exit means failure. The client re-normalizes
whatever comes back so the unit-norm invariant holds for any provider.
"""

from __future__ import annotations

import math
import subprocess
import threading
from dataclasses import dataclass

from .errors import ProviderError
from .sqlfront import NormalizedTokens

__all__ = [
    "DEFAULT_DIM",
    "EmbeddingVector",
    "fnv1a64",
    "hash_token",
    "embed",
    "ExternalEmbedder",
]

DEFAULT_DIM = 64

_FNV_OFFSET = 14695981039346656037
_FNV_PRIME = 1099511628211
_U64 = (1 << 64) - 1


@dataclass(eq=True)
class EmbeddingVector:
    """L2-normalized (or all-zero) dense query representation."""

    values: tuple[float, ...]
    provider_id: str


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a. Must stay bit-exact; trained models depend on it."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _U64
    return h


def hash_token(token: str, dim: int = DEFAULT_DIM) -> tuple[int, int]:
    """Map a token to (bucket index, sign in {+1, -1})."""
    index = fnv1a64(token.encode("utf-8")) % dim
    sign_bit = fnv1a64(("#" + token).encode("utf-8")) >> 63
    return index, 1 if sign_bit == 0 else -1


def embed(normalized: NormalizedTokens, dim: int = DEFAULT_DIM) -> EmbeddingVector:
    """Signed unigram+bigram hashing, then L2 normalization (zero stays zero)."""
    accum = [0.0] * dim
    tokens = normalized.tokens
    for token in tokens:
        index, sign = hash_token(token, dim)
        accum[index] += sign
    for left, right in zip(tokens, tokens[1:]):
        index, sign = hash_token(left + "_" + right, dim)
        accum[index] += sign
    norm = math.sqrt(sum(v * v for v in accum))
    if norm > 0.0:
        accum = [v / norm for v in accum]
    return EmbeddingVector(values=tuple(accum), provider_id=f"builtin-fnv1a-d{dim}")


class ExternalEmbedder:
    """Client for the line-protocol embedding subprocess.

    One batch is in flight per handle at a time; a lock serializes callers so
    a handle can be shared across worker threads.
    """

    def __init__(self, command: list[str], dim: int = DEFAULT_DIM) -> None:
        if not command:
            raise ProviderError("empty provider command")
        self.command = list(command)
        self.dim = dim
        self.provider_id = f"external:{command[0]}:d{dim}"
        self._lock = threading.Lock()

    def embed_batch(self, queries: list[NormalizedTokens]) -> list[EmbeddingVector]:
        if not queries:
            return []
        payload = "\n".join(q.detokenize() for q in queries) + "\n"
        with self._lock:
            try:
                proc = subprocess.run(
                    self.command,
                    input=payload.encode("utf-8"),
                    capture_output=True,
                    timeout=120,
                )
            except OSError as exc:
                raise ProviderError(f"cannot launch provider: {exc}") from exc
            except subprocess.TimeoutExpired as exc:
                raise ProviderError("provider timed out") from exc
        if proc.returncode != 0:
            stderr = proc.stderr.decode("utf-8", "replace").strip()[:200]
            raise ProviderError(
                f"provider exited with status {proc.returncode}: {stderr}"
            )
        lines = proc.stdout.decode("utf-8", "replace").splitlines()
        lines = [line for line in lines if line.strip()]
        if len(lines) != len(queries):
            raise ProviderError(
                f"provider returned {len(lines)} vectors for {len(queries)} queries"
            )
        return [self._parse_line(line) for line in lines]

    def embed(self, normalized: NormalizedTokens) -> EmbeddingVector:
        return self.embed_batch([normalized])[0]

    def _parse_line(self, line: str) -> EmbeddingVector:
        parts = line.split()
        if len(parts) != self.dim:
            raise ProviderError(
                f"provider returned {len(parts)} components, expected {self.dim}"
            )
        try:
            values = [float(p) for p in parts]
        except ValueError as exc:
            raise ProviderError(f"non-numeric component: {exc}") from exc
        if not all(math.isfinite(v) for v in values):
            raise ProviderError("non-finite component in provider output")
        norm = math.sqrt(sum(v * v for v in values))
        if norm > 0.0:
            values = [v / norm for v in values]
        return EmbeddingVector(values=tuple(values), provider_id=self.provider_id)
