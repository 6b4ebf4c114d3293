import pytest

from careloop.config import RuntimeConfig
from careloop.core.types import Corpus, GuidelineDoc
from careloop.corpus.index import build_index
from careloop.corpus.store import GuidelineCorpus
from careloop.demo import build_demo_backend
from careloop.gateway.base import ModelGateway
from careloop.gateway.embeddings import HashingEmbedder
from careloop.gateway.scripted import ScriptedBackend

FIXTURE_DOCS = [
    # (doc_id, corpus, title, topic keywords for the abstract)
    ("ng001", Corpus.NICE, "Hypertension in adults", "high blood pressure diagnosis and drug treatment in adults"),
    ("ng002", Corpus.NICE, "Headaches in over 12s", "tension headache and migraine assessment and management"),
    ("ng003", Corpus.NICE, "Asthma: diagnosis and monitoring", "asthma wheeze inhaler diagnosis and monitoring"),
    ("ng004", Corpus.NICE, "Chest pain of recent onset", "chest pain stable angina assessment and referral"),
    ("ng005", Corpus.NICE, "Chronic obstructive pulmonary disease", "copd breathlessness smoking related lung disease"),
    ("bmj001", Corpus.BMJ, "Tension-type headache", "tension headache band-like pain management"),
    ("bmj002", Corpus.BMJ, "Stable angina", "angina exertional chest tightness management"),
    ("bmj003", Corpus.BMJ, "Acute bronchitis", "acute bronchitis productive cough management"),
    ("bmj004", Corpus.BMJ, "Atrial fibrillation", "palpitations irregular heartbeat anticoagulation"),
    ("oth001", Corpus.OTHER, "Adult primary care assessment", "general adult assessment history taking"),
]


def make_fixture_doc(doc_id: str, corpus: Corpus, title: str, topic: str, paragraphs: int = 6) -> GuidelineDoc:
    body_lines = [f"# {title}", ""]
    for i in range(paragraphs):
        body_lines.append(f"## Section {i + 1}")
        body_lines.append(
            f"Guidance on {topic}, step {i + 1}: assessment, thresholds, first-line and "
            f"second-line options, and when to refer."
        )
        body_lines.append("")
    body = "\n".join(body_lines)
    return GuidelineDoc(
        doc_id=doc_id,
        corpus=corpus,
        title=title,
        abstract=f"Covers {topic}. Applies to adults. Details tests, treatments, and referral thresholds.",
        body_markdown=body,
        token_count=(len(body) + 3) // 4,
    )


@pytest.fixture
def fixture_corpus() -> GuidelineCorpus:
    corpus = GuidelineCorpus()
    for doc_id, member, title, topic in FIXTURE_DOCS:
        corpus.add(make_fixture_doc(doc_id, member, title, topic))
    return corpus


@pytest.fixture
def fixture_index(fixture_corpus):
    return build_index(fixture_corpus, HashingEmbedder(dim=64, seed=0))


@pytest.fixture
def demo_gateway():
    return ModelGateway(build_demo_backend())


@pytest.fixture
def scripted_backend():
    return ScriptedBackend()


@pytest.fixture
def small_config():
    # Tiny budget so fixture documents fill it realistically.
    return RuntimeConfig(retrieval_budget_tokens=2000, mx_message_interval=4)
