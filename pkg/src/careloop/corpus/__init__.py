from careloop.corpus.abstracts import generate_abstract
from careloop.corpus.index import CorpusIndex, RetrievalResult, build_index, retrieve
from careloop.corpus.markdown import html_to_markdown
from careloop.corpus.store import GuidelineCorpus, corpus_stats, ingest_document

__all__ = [
    "CorpusIndex",
    "GuidelineCorpus",
    "RetrievalResult",
    "build_index",
    "corpus_stats",
    "generate_abstract",
    "html_to_markdown",
    "ingest_document",
    "retrieve",
]
