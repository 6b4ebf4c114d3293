"""Deterministic text embeddings for offline retrieval.

Seeded feature hashing of character trigrams: each trigram of the
sentinel-padded text is hashed (keyed blake2b, so results do not depend on
PYTHONHASHSEED) to a bucket and a sign, the histogram is L2-normalized.
Order-sensitive enough for ranking tests, requires no weights, and is a
pure function of (text, seed, dim). A real embedding model slots in behind
the same embed() signature on the remote backend.
"""

from __future__ import annotations

import hashlib
from typing import Sequence

import numpy as np

_PAD_LEFT = "\x02\x02"
_PAD_RIGHT = "\x03\x03"


class HashingEmbedder:
    def __init__(self, dim: int = 64, seed: int = 0):
        if dim < 2:
            raise ValueError("embedding dim must be >= 2")
        self.dim = dim
        self.seed = seed
        self._key = seed.to_bytes(8, "little", signed=True)

    def fingerprint(self) -> dict:
        return {"kind": "hashing-trigram", "dim": self.dim, "seed": self.seed}

    def embed_one(self, text: str) -> np.ndarray:
        padded = _PAD_LEFT + text + _PAD_RIGHT
        vec = np.zeros(self.dim, dtype=np.float64)
        for i in range(len(padded) - 2):
            h = int.from_bytes(
                hashlib.blake2b(padded[i : i + 3].encode("utf-8"), key=self._key, digest_size=8).digest(),
                "little",
            )
            bucket = h % self.dim
            sign = 1.0 if (h >> 40) & 1 else -1.0
            vec[bucket] += sign
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            vec[0] = 1.0
            return vec
        return vec / norm

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        if len(texts) == 0:
            raise ValueError("embed requires a non-empty input sequence")
        return np.stack([self.embed_one(t) for t in texts])


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.dot(a, b))
