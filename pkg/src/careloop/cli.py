"""Command-line interface.

Groups: corpus (ingest/abstracts/index/stats/query), rxqa
(ingest/gen/validate/select/score/compare), sim (generate/filter/stats),
session (replay), plus `serve` for the HTTP session service.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from careloop.config import DEFAULT_CONFIG
from careloop.core.types import Corpus
from careloop.corpus.abstracts import generate_abstract
from careloop.corpus.index import CorpusIndex, build_index, retrieve
from careloop.corpus.store import GuidelineCorpus, corpus_stats, ingest_document
from careloop.demo import build_demo_backend
from careloop.gateway.base import ModelGateway
from careloop.gateway.embeddings import HashingEmbedder
from careloop.gateway.remote import RemoteBackend
from careloop.rxqa import report as rx_report
from careloop.rxqa import select as rx_select
from careloop.rxqa import types as rx_types
from careloop.rxqa import validate as rx_validate
from careloop.rxqa.generate import gen_long_questions, gen_short_questions
from careloop.rxqa.stats import PairedOutcomes, score_exam
from careloop.session.events import SessionStore, decode_log
from careloop.session.session import Session
from careloop.sim.filters import filter_dialogue
from careloop.sim.pipeline import MultiVisitRecord, assemble_record, gen_dialogue, gen_outlines


def _gateway(backend: str) -> ModelGateway:
    if backend == "scripted":
        return ModelGateway(build_demo_backend())
    return ModelGateway(RemoteBackend())


@click.group()
def main():
    """Guideline-grounded disease-management toolkit."""


# ---------------------------------------------------------------- corpus ----


@main.group()
def corpus():
    """Guideline corpus management."""


@corpus.command("ingest")
@click.argument("source", type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_dir", type=click.Path(path_type=Path), required=True)
@click.option("--doc-id", required=True)
@click.option("--corpus", "corpus_name", type=click.Choice([c.value for c in Corpus]), required=True)
@click.option("--format", "fmt", type=click.Choice(["markdown", "html"]), default="markdown")
def corpus_ingest(source: Path, out_dir: Path, doc_id: str, corpus_name: str, fmt: str):
    """Normalize one source file into the corpus directory."""
    store = GuidelineCorpus.load(out_dir) if out_dir.exists() else GuidelineCorpus()
    doc = ingest_document(source.read_text(encoding="utf-8"), doc_id, Corpus(corpus_name), fmt)
    store.add(doc)
    store.save(out_dir)
    click.echo(f"ingested {doc_id} ({doc.token_count} tokens)")


@corpus.command("abstracts")
@click.argument("corpus_dir", type=click.Path(exists=True, path_type=Path))
@click.option("--backend", type=click.Choice(["scripted", "remote"]), default="scripted")
def corpus_abstracts(corpus_dir: Path, backend: str):
    """Generate titles and abstracts for documents lacking them."""
    store = GuidelineCorpus.load(corpus_dir)
    gateway = _gateway(backend)
    updated = 0
    for doc in list(store):
        if not doc.abstract:
            store.replace(generate_abstract(doc, gateway))
            updated += 1
    store.save(corpus_dir)
    click.echo(f"abstracts generated for {updated} documents")


@corpus.command("index")
@click.argument("corpus_dir", type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_file", type=click.Path(path_type=Path), required=True)
@click.option("--dim", default=DEFAULT_CONFIG.embed_dim)
@click.option("--seed", default=DEFAULT_CONFIG.embed_seed)
def corpus_index(corpus_dir: Path, out_file: Path, dim: int, seed: int):
    """Build and persist the embedding index."""
    store = GuidelineCorpus.load(corpus_dir)
    index = build_index(store, HashingEmbedder(dim=dim, seed=seed))
    index.save(out_file)
    click.echo(f"indexed {len(index)} documents -> {out_file}")


@corpus.command("stats")
@click.argument("corpus_dir", type=click.Path(exists=True, path_type=Path))
def corpus_stats_cmd(corpus_dir: Path):
    """Per-corpus size statistics."""
    store = GuidelineCorpus.load(corpus_dir)
    click.echo(json.dumps(corpus_stats(store), indent=2))


@corpus.command("query")
@click.argument("corpus_dir", type=click.Path(exists=True, path_type=Path))
@click.option("--index", "index_file", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--query", "queries", multiple=True, required=True)
@click.option("--budget", default=DEFAULT_CONFIG.retrieval_budget_tokens)
def corpus_query(corpus_dir: Path, index_file: Path, queries: tuple[str, ...], budget: int):
    """Run budgeted retrieval against a persisted index."""
    store = GuidelineCorpus.load(corpus_dir)
    index = CorpusIndex.load(index_file, store)
    result = retrieve(list(queries), budget, index)
    click.echo(json.dumps(result.to_dict(), indent=2))


# ----------------------------------------------------------------- serve ----


@main.command("serve")
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--backend", type=click.Choice(["scripted", "remote"]), default="scripted")
@click.option("--port", default=8000)
@click.option("--host", default="127.0.0.1")
@click.option("--sessions", "sessions_dir", type=click.Path(path_type=Path), default=None)
@click.option("--ui", "ui_dir", type=click.Path(exists=True, path_type=Path), default=None,
              help="directory with the built chat client, mounted at /ui")
def serve(corpus_dir: Path, backend: str, port: int, host: str, sessions_dir: Path | None, ui_dir: Path | None):
    """Run the HTTP session service."""
    import uvicorn

    from careloop.session.api import create_app
    from careloop.session.manager import SessionManager

    store = GuidelineCorpus.load(corpus_dir)
    gateway = _gateway(backend)
    for doc in list(store):
        if not doc.abstract:
            store.replace(generate_abstract(doc, gateway))
    index = build_index(store, HashingEmbedder(dim=DEFAULT_CONFIG.embed_dim, seed=DEFAULT_CONFIG.embed_seed))
    session_store = SessionStore(sessions_dir) if sessions_dir else None
    manager = SessionManager(gateway, index=index, store=session_store)
    app = create_app(manager, ui_dir=str(ui_dir) if ui_dir else None)
    uvicorn.run(app, host=host, port=port, log_level="warning")


# --------------------------------------------------------------- session ----


@main.group()
def session():
    """Session log tooling."""


@session.command("replay")
@click.argument("log_file", type=click.Path(exists=True, path_type=Path))
def session_replay(log_file: Path):
    """Replay an event log and print the reconstructed session state."""
    events = decode_log(log_file.read_text(encoding="utf-8"))
    replayed = Session.replay(events)
    click.echo(replayed.export_json())


# ------------------------------------------------------------------ rxqa ----


@main.group()
def rxqa():
    """Medication-reasoning benchmark pipeline."""


@rxqa.command("ingest")
@click.argument("labels_file", type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_file", type=click.Path(path_type=Path), required=True)
def rxqa_ingest(labels_file: Path, out_file: Path):
    """Normalize a JSONL of medication labels."""
    labels = []
    for line in labels_file.read_text(encoding="utf-8").splitlines():
        if line.strip():
            labels.append(rx_types.MedLabel.from_dict(json.loads(line)))
    with out_file.open("w", encoding="utf-8") as fh:
        for label in labels:
            fh.write(json.dumps(label.to_dict(), ensure_ascii=False) + "\n")
    click.echo(f"ingested {len(labels)} labels")


def _load_labels(path: Path) -> dict[str, rx_types.MedLabel]:
    labels = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            label = rx_types.MedLabel.from_dict(json.loads(line))
            labels[label.label_id] = label
    return labels


@rxqa.command("gen")
@click.argument("labels_file", type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_file", type=click.Path(path_type=Path), required=True)
@click.option("--backend", type=click.Choice(["scripted", "remote"]), default="scripted")
@click.option("--seed", default=0)
def rxqa_gen(labels_file: Path, out_file: Path, backend: str, seed: int):
    """Generate 5 short + 3 long questions per label."""
    gateway = _gateway(backend)
    labels = _load_labels(labels_file)
    questions: list[rx_types.RxQuestion] = []
    for label in labels.values():
        questions.extend(gen_short_questions(label, gateway, seed=seed))
        related = [labels[i] for i in labels if labels[i].drug_name in label.related_drug_names][:2]
        long_qs, _ = gen_long_questions(label, related, gateway, seed=seed)
        questions.extend(long_qs)
    rx_types.write_jsonl(questions, out_file)
    click.echo(f"generated {len(questions)} questions")


@rxqa.command("validate")
@click.argument("questions_file", type=click.Path(exists=True, path_type=Path))
@click.option("--labels", "labels_file", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", "out_file", type=click.Path(path_type=Path), required=True)
@click.option("--backend", type=click.Choice(["scripted", "remote"]), default="scripted")
def rxqa_validate(questions_file: Path, labels_file: Path, out_file: Path, backend: str):
    """Run the four validation gates over generated questions."""
    gateway = _gateway(backend)
    labels = _load_labels(labels_file)
    validated = [
        rx_validate.validate_question(q, labels[q.label_id], gateway)
        for q in rx_types.read_jsonl(questions_file)
    ]
    rx_types.write_jsonl(validated, out_file)
    passed = sum(1 for q in validated if q.flags and q.flags.all_passed())
    click.echo(f"validated {len(validated)} questions; {passed} passed all gates")


@rxqa.command("select")
@click.argument("questions_file", type=click.Path(exists=True, path_type=Path))
@click.option("--labels", "labels_file", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out", "out_file", type=click.Path(path_type=Path), required=True)
@click.option("--backend", type=click.Choice(["scripted", "remote"]), default="scripted")
@click.option("--seed", default=0)
@click.option("--short-target", default=DEFAULT_CONFIG.rxqa_short_target)
@click.option("--long-target", default=DEFAULT_CONFIG.rxqa_long_target)
def rxqa_select(questions_file, labels_file, out_file, backend, seed, short_target, long_target):
    """Keep context-dependent questions, then sample the benchmark."""
    gateway = _gateway(backend)
    labels = _load_labels(labels_file)
    pool = rx_types.read_jsonl(questions_file)
    selected = rx_select.select_questions(
        pool, labels, gateway, seed=seed, short_target=short_target, long_target=long_target
    )
    rx_types.write_jsonl(selected, out_file)
    click.echo(f"selected {len(selected)} of {len(pool)} questions")


@rxqa.command("score")
@click.argument("questions_file", type=click.Path(exists=True, path_type=Path))
@click.option("--responses", "responses_file", type=click.Path(exists=True, path_type=Path), required=True)
def rxqa_score(questions_file: Path, responses_file: Path):
    """Accuracy + 95% Wilson CI for a responses file ({question_index: choice})."""
    questions = rx_types.read_jsonl(questions_file)
    responses = json.loads(responses_file.read_text(encoding="utf-8"))
    key = [q.answer_index for q in questions]
    answers = [responses.get(str(i), -1) for i in range(len(questions))]
    score = score_exam(answers, key)
    click.echo(json.dumps(score.to_dict(), indent=2))


@rxqa.command("compare")
@click.argument("questions_file", type=click.Path(exists=True, path_type=Path))
@click.option("--a", "a_file", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--b", "b_file", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--label-a", default="A")
@click.option("--label-b", default="B")
def rxqa_compare(questions_file, a_file, b_file, label_a, label_b):
    """Paired comparison (McNemar + FDR) across difficulty subsets."""
    questions = rx_types.read_jsonl(questions_file)
    resp_a = json.loads(Path(a_file).read_text(encoding="utf-8"))
    resp_b = json.loads(Path(b_file).read_text(encoding="utf-8"))

    def outcomes(subset_questions, subset_ids) -> PairedOutcomes:
        return PairedOutcomes(
            ids=tuple(subset_ids),
            a_correct=tuple(resp_a.get(i, -1) == q.answer_index for i, q in zip(subset_ids, subset_questions)),
            b_correct=tuple(resp_b.get(i, -1) == q.answer_index for i, q in zip(subset_ids, subset_questions)),
        )

    ids = [str(i) for i in range(len(questions))]
    strata = rx_select.stratify_difficulty(questions)
    rows = [("Both", label_a, label_b, outcomes(questions, ids))]
    for name in ("higher", "lower"):
        subset = strata[name]
        if subset:
            subset_ids = [str(questions.index(q)) for q in subset]
            rows.append((name.capitalize(), label_a, label_b, outcomes(subset, subset_ids)))
    click.echo(rx_report.format_table(rx_report.compare_conditions(rows)))


# ------------------------------------------------------------------- sim ----


@main.group()
def sim():
    """Synthetic multi-visit dialogue pipeline."""


VIGNETTES = [
    ("tension headache", "A 34-year-old office worker with weeks of band-like headaches, worse late in the day."),
    ("asthma", "A 26-year-old with episodic wheeze and night cough, worse with exercise and cold air."),
    ("stable angina", "A 58-year-old with exertional chest tightness relieved by rest, ex-smoker."),
    ("acute bronchitis", "A 41-year-old with ten days of productive cough after a cold, no fever now."),
]


@sim.command("generate")
@click.option("--n", "count", default=2)
@click.option("--seed", default=0)
@click.option("--out", "out_file", type=click.Path(path_type=Path), required=True)
@click.option("--backend", type=click.Choice(["scripted", "remote"]), default="scripted")
def sim_generate(count: int, seed: int, out_file: Path, backend: str):
    """Generate N multi-visit records (vignette -> outlines -> dialogues)."""
    gateway = _gateway(backend)
    records = []
    for i in range(count):
        condition, vignette = VIGNETTES[(seed + i) % len(VIGNETTES)]
        outlines = gen_outlines(vignette, condition, "(fixture knowledge)", gateway, seed=seed + i)
        dialogues = []
        prior: list = []
        for outline in outlines:
            messages, _ = gen_dialogue(
                outline, prior, gateway, condition=condition, vignette=vignette, seed=seed + i
            )
            dialogues.append(messages)
            prior.append((outline, messages))
        reports = [
            [f"Report: {iv.intervention} -> {iv.result}" for iv in outline.completed_interventions]
            for outline in outlines[1:]
        ]
        records.append(assemble_record(condition, vignette, outlines, dialogues, reports))
    with out_file.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")
    click.echo(f"generated {len(records)} records")


def _read_records(path: Path) -> list[MultiVisitRecord]:
    return [
        MultiVisitRecord.from_dict(json.loads(line))
        for line in path.read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]


@sim.command("filter")
@click.argument("records_file", type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_file", type=click.Path(path_type=Path), required=True)
@click.option("--backend", type=click.Choice(["scripted", "remote"]), default="scripted")
def sim_filter(records_file: Path, out_file: Path, backend: str):
    """Keep only records whose every visit passes the four-criteria gate."""
    gateway = _gateway(backend)
    kept = []
    records = _read_records(records_file)
    for record in records:
        results = [filter_dialogue(list(messages), gateway) for _, messages in record.visits]
        if all(r.passed for r in results):
            kept.append(record)
    with out_file.open("w", encoding="utf-8") as fh:
        for record in kept:
            fh.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")
    click.echo(f"kept {len(kept)} of {len(records)} records")


@sim.command("stats")
@click.argument("records_file", type=click.Path(exists=True, path_type=Path))
def sim_stats(records_file: Path):
    """Message-count statistics over a records file."""
    records = _read_records(records_file)
    visits = [len(r.visits) for r in records]
    messages = [sum(r.message_counts()) for r in records]
    click.echo(
        json.dumps(
            {
                "records": len(records),
                "visits_total": sum(visits),
                "messages_total": sum(messages),
                "messages_per_record_mean": (sum(messages) / len(records)) if records else 0.0,
            },
            indent=2,
        )
    )


if __name__ == "__main__":
    sys.exit(main())
