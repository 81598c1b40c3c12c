"""Deterministic sentence embeddings for the suggestion ranker.

The default backend is a signed feature-hashing bag of words: lowercase the
text, split on non-alphanumerics, and for each token take the SHA-256 digest
of its UTF-8 bytes; the bucket is the first four digest bytes (big-endian)
modulo the dimension and the sign is +1 when bit 0 of the fifth byte is set,
else -1. Token contributions are summed and the vector L2-normalized (the
zero vector stays zero). SHA-256 keys the result to the bytes of the text
only, so results are identical across runs, processes, and platforms.

Other vector sources (pretrained embeddings, say) can be plugged in through
the EmbeddingProvider protocol; everything downstream only relies on
cosine similarity.
"""

from __future__ import annotations

import hashlib
import re
from typing import Protocol

import numpy as np

from .errors import DimensionMismatch

_TOKEN_RE = re.compile(r"[a-z0-9]+")

DEFAULT_DIM = 256


class EmbeddingProvider(Protocol):
    dim: int

    def embed(self, text: str) -> np.ndarray: ...


class HashingEmbedder:
    """The deterministic default backend described in the module docstring."""

    def __init__(self, dim: int = DEFAULT_DIM):
        self.dim = dim

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        for token in _TOKEN_RE.findall(text.lower()):
            digest = hashlib.sha256(token.encode("utf-8")).digest()
            bucket = int.from_bytes(digest[:4], "big") % self.dim
            sign = 1.0 if digest[4] & 1 else -1.0
            vec[bucket] += sign
        norm = float(np.linalg.norm(vec))
        if norm > 0.0:
            vec /= norm
        return vec


_DEFAULT = HashingEmbedder()


def embed(text: str, provider: EmbeddingProvider = _DEFAULT) -> np.ndarray:
    return provider.embed(text)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; the zero vector is orthogonal to everything."""
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))
