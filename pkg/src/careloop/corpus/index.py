"""Embedding index over titles+abstracts and budgeted multi-query retrieval.

Retrieval ranks every document of a corpus against every query by cosine
similarity (ties broken by doc_id), then walks round-robin over the
(corpus, query) lanes in fixed order — corpora NICE, BMJ, OTHER; queries in
the given order — taking each lane's next highest-ranked not-yet-selected
document. Selection stops at the first document that would exceed the token
budget. Stopping (rather than skipping past oversized documents) makes the
selected set a prefix of a budget-independent sequence, so enlarging the
budget can only add documents, never drop one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from careloop.core.types import Corpus, GuidelineDoc
from careloop.corpus.store import GuidelineCorpus
from careloop.errors import MissingAbstractError, RetrievalError
from careloop.gateway.embeddings import HashingEmbedder

CORPUS_ORDER = (Corpus.NICE, Corpus.BMJ, Corpus.OTHER)
MAX_QUERIES = 5


@dataclass(frozen=True)
class RetrievalResult:
    doc_ids: tuple[str, ...]
    total_tokens: int
    scores: dict[str, float]
    queries: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "doc_ids": list(self.doc_ids),
            "total_tokens": self.total_tokens,
            "scores": {k: self.scores[k] for k in self.doc_ids},
            "queries": list(self.queries),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RetrievalResult":
        return cls(
            doc_ids=tuple(data["doc_ids"]),
            total_tokens=data["total_tokens"],
            scores=dict(data["scores"]),
            queries=tuple(data["queries"]),
        )


class CorpusIndex:
    """Immutable per-document embeddings grouped by corpus."""

    def __init__(
        self,
        corpus: GuidelineCorpus,
        embedder: HashingEmbedder,
        vectors: dict[str, np.ndarray],
    ):
        self._corpus = corpus
        self._embedder = embedder
        self._vectors = vectors
        self._lanes: dict[Corpus, tuple[str, ...]] = {}
        self._matrices: dict[Corpus, np.ndarray] = {}
        for member in CORPUS_ORDER:
            ids = tuple(d.doc_id for d in corpus.by_corpus(member))
            if ids:
                self._lanes[member] = ids
                self._matrices[member] = np.stack([vectors[i] for i in ids])

    @property
    def embedder(self) -> HashingEmbedder:
        return self._embedder

    @property
    def corpus(self) -> GuidelineCorpus:
        return self._corpus

    def __len__(self) -> int:
        return len(self._vectors)

    def doc(self, doc_id: str) -> GuidelineDoc:
        return self._corpus.get(doc_id)

    def vector(self, doc_id: str) -> np.ndarray:
        return self._vectors[doc_id]

    def corpora(self) -> tuple[Corpus, ...]:
        return tuple(c for c in CORPUS_ORDER if c in self._lanes)

    def ranked(self, corpus: Corpus, query_vec: np.ndarray) -> list[tuple[str, float]]:
        """Doc ids of one corpus ordered by cosine desc, doc_id asc.

        Similarities are quantized to 12 decimals before ordering so that
        exact ties rank by doc_id regardless of float summation order.
        """
        ids = self._lanes.get(corpus, ())
        if not ids:
            return []
        sims = self._matrices[corpus] @ query_vec
        order = sorted(range(len(ids)), key=lambda i: (-round(float(sims[i]), 12), ids[i]))
        return [(ids[i], float(sims[i])) for i in order]

    # -- persistence ---------------------------------------------------------

    def save(self, path: str | Path) -> None:
        payload = {
            "embedder": self._embedder.fingerprint(),
            "vectors": {doc_id: self._vectors[doc_id].tolist() for doc_id in sorted(self._vectors)},
        }
        Path(path).write_text(json.dumps(payload), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path, corpus: GuidelineCorpus) -> "CorpusIndex":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        fp = payload["embedder"]
        embedder = HashingEmbedder(dim=fp["dim"], seed=fp["seed"])
        vectors = {k: np.asarray(v, dtype=np.float64) for k, v in payload["vectors"].items()}
        return cls(corpus, embedder, vectors)


def build_index(corpus: GuidelineCorpus, embedder: HashingEmbedder | None = None) -> CorpusIndex:
    """Embed "title\\nabstract" for every document. Abstracts are required."""
    embedder = embedder or HashingEmbedder()
    vectors: dict[str, np.ndarray] = {}
    for doc in corpus:
        if not doc.abstract:
            raise MissingAbstractError(f"document {doc.doc_id!r} has no abstract; run abstract generation first")
        vectors[doc.doc_id] = embedder.embed_one(f"{doc.title}\n{doc.abstract}")
    return CorpusIndex(corpus, embedder, vectors)


def retrieve(queries: list[str], budget_tokens: int, index: CorpusIndex) -> RetrievalResult:
    """Budgeted lane-ordered selection. Pure in (queries, budget, index)."""
    if not queries:
        raise RetrievalError("at least one query is required")
    if len(queries) > MAX_QUERIES:
        raise RetrievalError(f"at most {MAX_QUERIES} queries are allowed, got {len(queries)}")
    if budget_tokens <= 0:
        raise RetrievalError("budget_tokens must be positive")

    query_vecs = [index.embedder.embed_one(q) for q in queries]
    lanes = []  # rankings in lane order: corpus-major, then query order
    for corpus in index.corpora():
        for vec in query_vecs:
            lanes.append(index.ranked(corpus, vec))

    best_scores: dict[str, float] = {}
    for ranking in lanes:
        for doc_id, score in ranking:
            if doc_id not in best_scores or score > best_scores[doc_id]:
                best_scores[doc_id] = score

    selected: list[str] = []
    chosen = set()
    positions = [0] * len(lanes)
    used = 0
    overflowed = False
    while not overflowed:
        progressed = False
        for li, ranking in enumerate(lanes):
            pos = positions[li]
            while pos < len(ranking) and ranking[pos][0] in chosen:
                pos += 1
            positions[li] = pos
            if pos >= len(ranking):
                continue
            doc_id = ranking[pos][0]
            cost = index.doc(doc_id).token_count
            if used + cost > budget_tokens:
                overflowed = True
                break
            selected.append(doc_id)
            chosen.add(doc_id)
            used += cost
            positions[li] = pos + 1
            progressed = True
        if not progressed:
            break

    return RetrievalResult(
        doc_ids=tuple(selected),
        total_tokens=used,
        scores={d: best_scores[d] for d in selected},
        queries=tuple(queries),
    )
