"""Title/abstract generation for retrieval indexing.

Abstracts are produced ahead of time by a model call constrained to a
{title, abstract} schema and capped at 1,000 words; over-length output is
truncated at a word boundary with a warning rather than rejected.
"""

from __future__ import annotations

import logging

from careloop import schema as cs
from careloop.core.types import GuidelineDoc
from careloop.gateway.base import ModelGateway, ModelRequest

log = logging.getLogger(__name__)

MAX_ABSTRACT_WORDS = 1000

ABSTRACT_PROMPT = """\
You are indexing a clinical reference library. Write a title and an abstract
for the document below so that clinicians can judge at a glance whether it is
relevant to a patient in front of them.

The abstract must name: the population the document applies to (age, sex,
risk groups), the clinical questions it answers, and the conditions, tests,
interventions and drugs it covers. For drug monographs, also give brand and
generic names, when the drug is indicated, the main contraindications, and
the main side effects. Keep the abstract self-contained and under 1,000
words.

Reuse the document's own title when one is present at the top; otherwise
write a descriptive title that names the condition covered.

=== Document ===
{document}
"""


def title_abstract_schema() -> cs.SchemaNode:
    return cs.object_of(
        [
            ("title", cs.string("Document title; reuse the one in the document when present.")),
            ("abstract", cs.string("Self-contained abstract, at most 1,000 words.")),
        ],
        doc="Title and abstract for one reference document.",
    )


def truncate_words(text: str, max_words: int) -> tuple[str, bool]:
    words = text.split()
    if len(words) <= max_words:
        return text, False
    return " ".join(words[:max_words]), True


def generate_abstract(doc: GuidelineDoc, gateway: ModelGateway, max_words: int = MAX_ABSTRACT_WORDS) -> GuidelineDoc:
    request = ModelRequest(
        prompt=ABSTRACT_PROMPT.replace("{document}", doc.body_markdown),
        tag="corpus.abstract",
        schema=title_abstract_schema(),
        context={"doc_id": doc.doc_id, "body": doc.body_markdown, "title": doc.title},
    )
    value = gateway.generate_structured(request)
    abstract, truncated = truncate_words(value["abstract"], max_words)
    if truncated:
        log.warning("abstract for %s exceeded %d words; truncated", doc.doc_id, max_words)
    return doc.with_abstract(title=value["title"], abstract=abstract)
