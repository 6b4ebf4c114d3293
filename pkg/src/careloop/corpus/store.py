"""Guideline ingestion, the on-disk corpus layout, and corpus statistics.

On disk a corpus is one Markdown file per document plus a JSON sidecar
({doc_id}.md / {doc_id}.json) carrying {doc_id, corpus, title, abstract,
token_count}.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Iterator

from careloop.core.tokenizers import HEURISTIC, TokenizerRegistry, default_registry
from careloop.core.types import Corpus, GuidelineDoc
from careloop.corpus.markdown import first_heading, html_to_markdown
from careloop.errors import DuplicateDocError, UnsupportedFormatError

FORMATS = ("markdown", "html")


def ingest_document(
    raw: str,
    doc_id: str,
    corpus: Corpus,
    fmt: str = "markdown",
    tokenizer: str = HEURISTIC,
    registry: TokenizerRegistry | None = None,
) -> GuidelineDoc:
    """Normalize source text to Markdown and compute its token count.

    Markdown input passes through byte-identical; HTML is converted with
    headings, lists, and tables preserved.
    """
    if fmt == "markdown":
        body = raw
    elif fmt == "html":
        body = html_to_markdown(raw)
    else:
        raise UnsupportedFormatError(f"unsupported source format {fmt!r} (expected one of {FORMATS})")
    reg = registry or default_registry()
    return GuidelineDoc(
        doc_id=doc_id,
        corpus=corpus,
        title=first_heading(body),
        abstract="",
        body_markdown=body,
        token_count=reg.get(tokenizer)(body),
    )


class GuidelineCorpus:
    """A set of guideline documents with unique ids."""

    def __init__(self, docs: Iterable[GuidelineDoc] = (), tokenizer: str = HEURISTIC):
        self.tokenizer = tokenizer
        self._docs: dict[str, GuidelineDoc] = {}
        for doc in docs:
            self.add(doc)

    def add(self, doc: GuidelineDoc) -> None:
        if doc.doc_id in self._docs:
            raise DuplicateDocError(f"doc_id {doc.doc_id!r} already ingested")
        self._docs[doc.doc_id] = doc

    def replace(self, doc: GuidelineDoc) -> None:
        if doc.doc_id not in self._docs:
            raise KeyError(doc.doc_id)
        self._docs[doc.doc_id] = doc

    def get(self, doc_id: str) -> GuidelineDoc:
        return self._docs[doc_id]

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._docs

    def __len__(self) -> int:
        return len(self._docs)

    def __iter__(self) -> Iterator[GuidelineDoc]:
        return iter(sorted(self._docs.values(), key=lambda d: d.doc_id))

    def doc_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._docs))

    def by_corpus(self, corpus: Corpus) -> tuple[GuidelineDoc, ...]:
        return tuple(d for d in self if d.corpus is corpus)

    # -- persistence ---------------------------------------------------------

    def save(self, directory: str | Path) -> None:
        path = Path(directory)
        path.mkdir(parents=True, exist_ok=True)
        for doc in self:
            (path / f"{doc.doc_id}.md").write_text(doc.body_markdown, encoding="utf-8")
            meta = {
                "doc_id": doc.doc_id,
                "corpus": doc.corpus.value,
                "title": doc.title,
                "abstract": doc.abstract,
                "token_count": doc.token_count,
            }
            (path / f"{doc.doc_id}.json").write_text(
                json.dumps(meta, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
            )

    @classmethod
    def load(cls, directory: str | Path, tokenizer: str = HEURISTIC) -> "GuidelineCorpus":
        path = Path(directory)
        corpus = cls(tokenizer=tokenizer)
        for meta_path in sorted(path.glob("*.json")):
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
            body = (path / f"{meta['doc_id']}.md").read_text(encoding="utf-8")
            corpus.add(
                GuidelineDoc(
                    doc_id=meta["doc_id"],
                    corpus=Corpus(meta["corpus"]),
                    title=meta["title"],
                    abstract=meta["abstract"],
                    body_markdown=body,
                    token_count=meta["token_count"],
                )
            )
        return corpus


def corpus_stats(corpus: GuidelineCorpus) -> dict:
    """Per-corpus and overall {characters, tokens} x {mean, max, total}."""

    def summarize(docs) -> dict:
        chars = [len(d.body_markdown) for d in docs]
        tokens = [d.token_count for d in docs]
        return {
            "n": len(chars),
            "characters": _mmt(chars),
            "tokens": _mmt(tokens),
        }

    out = {}
    for member in Corpus:
        docs = corpus.by_corpus(member)
        if docs:
            out[member.value] = summarize(docs)
    out["ALL"] = summarize(list(corpus))
    return out


def _mmt(values: list[int]) -> dict:
    if not values:
        return {"mean": 0.0, "max": 0, "total": 0}
    total = sum(values)
    return {"mean": total / len(values), "max": max(values), "total": total}
