"""Session orchestration: the single-writer contract around each session.

The manager owns per-session locks, runs the dialogue fast path
synchronously, schedules background summary/differential updates after
every patient message, and triggers the planning agent per policy (first
patient message of a visit, every K patient messages, and on visit
advancement). Model calls never run under the session lock: workers
snapshot state, compute, then re-acquire the lock to commit an event.
At most one planning run per session is in flight; triggers arriving
meanwhile coalesce into one follow-up run.
"""

from __future__ import annotations

import logging
import threading
import uuid
from dataclasses import dataclass, field

from careloop.clock import spawn
from careloop.config import DEFAULT_CONFIG, RuntimeConfig
from careloop.core.types import Corpus, Role
from careloop.corpus.index import CorpusIndex
from careloop.dialogue.agent import DialogueAgent
from careloop.errors import UnknownSessionError
from careloop.gateway.base import ModelGateway
from careloop.mx.planner import run_mx
from careloop.session import events as ev
from careloop.session.session import PostQuestionnaire, Session, export_questionnaire

log = logging.getLogger(__name__)


@dataclass
class _Entry:
    session: Session
    # state lock: guards every read/write of session state; never held
    # across a model call.
    lock: threading.RLock = field(default_factory=threading.RLock)
    # operation lock: serializes whole API operations on one session.
    op_lock: threading.RLock = field(default_factory=threading.RLock)
    mx_inflight: bool = False
    mx_pending: bool = False


class SessionManager:
    def __init__(
        self,
        gateway: ModelGateway,
        index: CorpusIndex | None = None,
        store=None,
        config: RuntimeConfig = DEFAULT_CONFIG,
        agent: DialogueAgent | None = None,
        clock=None,
    ):
        self._gateway = gateway
        self._index = index
        self._store = store if store is not None else ev.MemoryStore()
        self._config = config
        self._agent = agent or DialogueAgent(gateway, config=config)
        self._clock = clock or gateway.clock
        self._entries: dict[str, _Entry] = {}
        self._entries_lock = threading.Lock()
        self._tasks: list = []
        self._tasks_lock = threading.Lock()

    @property
    def config(self) -> RuntimeConfig:
        return self._config

    @property
    def index(self) -> CorpusIndex | None:
        return self._index

    # -- session registry -------------------------------------------------------

    def _entry(self, session_id: str) -> _Entry:
        with self._entries_lock:
            entry = self._entries.get(session_id)
            if entry is None:
                events = self._store.load(session_id)
                if not events:
                    raise UnknownSessionError(f"unknown session {session_id!r}")
                entry = _Entry(session=Session.replay(events, self._config))
                self._entries[session_id] = entry
            return entry

    def session_ids(self) -> list[str]:
        with self._entries_lock:
            known = set(self._entries)
        return sorted(known | set(self._store.session_ids()))

    def _commit(self, entry: _Entry, event: ev.Event) -> None:
        """Apply and persist under the session lock (callers hold it)."""
        entry.session.apply(event)
        self._store.append(entry.session.session_id, event)

    # -- operations ----------------------------------------------------------------

    def create_session(self, scenario: dict | None = None) -> str:
        session_id = uuid.uuid4().hex[:12]
        session, event = Session.create(session_id, scenario or {}, self._config)
        entry = _Entry(session=session)
        with self._entries_lock:
            self._entries[session_id] = entry
        self._store.append(session_id, event)
        return session_id

    def get_session(self, session_id: str) -> Session:
        return self._entry(session_id).session

    def post_message(self, session_id: str, text: str) -> str:
        entry = self._entry(session_id)
        with entry.op_lock:
            return self._post_message(entry, text)

    def _post_message(self, entry: _Entry, text: str) -> str:
        with entry.lock:
            event = entry.session.message_event(Role.PATIENT, text)
            self._commit(entry, event)
            state = entry.session.state.snapshot()
            transcript = entry.session.transcript.messages()
            visit_count = entry.session.patient_message_count()

        reply, directives = self._agent.reply(state, transcript)

        with entry.lock:
            self._commit(entry, entry.session.message_event(Role.DOCTOR, reply))
            if directives.end_visit:
                self._commit(
                    entry,
                    entry.session.next_event(
                        ev.VISIT_READY, {"visit_number": entry.session.state.visit_number}
                    ),
                )

        self._schedule(self._background_updates, entry)
        interval = self._config.mx_message_interval
        if visit_count == 1 or (interval > 0 and visit_count % interval == 0):
            self._trigger_mx_entry(entry)
        return reply

    def close_visit(self, session_id: str) -> str:
        entry = self._entry(session_id)
        with entry.op_lock, entry.lock:
            self._commit(entry, entry.session.close_event())
            return entry.session.status

    def advance_visit(self, session_id: str, reports: list[dict] | None = None) -> int:
        entry = self._entry(session_id)
        with entry.op_lock:
            with entry.lock:
                event = entry.session.advance_event(reports or [])
                self._commit(entry, event)
                new_visit = entry.session.state.visit_number
            self._trigger_mx_entry(entry)
            return new_visit

    def export_questionnaire(self, session_id: str) -> PostQuestionnaire:
        entry = self._entry(session_id)
        corpus_of: dict[str, Corpus] | None = None
        if self._index is not None:
            corpus_of = {d.doc_id: d.corpus for d in self._index.corpus}
        # The op lock keeps the session consistent for the duration of the
        # export; the generation call mutates nothing.
        with entry.op_lock:
            return export_questionnaire(entry.session, self._gateway, corpus_of, self._config)

    # -- background machinery ---------------------------------------------------

    def _schedule(self, fn, *args) -> None:
        task = spawn(self._clock, fn, *args)
        with self._tasks_lock:
            self._tasks.append(task)

    def drain(self, timeout: float = 60.0) -> None:
        """Wait until all scheduled background work has finished."""
        while True:
            with self._tasks_lock:
                pending = [t for t in self._tasks if not t.wait(0)]
                self._tasks = pending
                if not pending:
                    return
                task = pending[0]
            exc = task.exception(timeout)
            if exc is not None:
                log.warning("background task failed: %s", exc)

    def _background_updates(self, entry: _Entry) -> None:
        with entry.lock:
            state = entry.session.state.snapshot()
            transcript = entry.session.transcript.messages()
        summary = self._agent.update_patient_summary(state, transcript)
        differential = self._agent.update_differential(state, transcript)
        with entry.lock:
            self._commit(
                entry,
                entry.session.next_event(ev.SUMMARY_UPDATE, {"summary": summary.to_dict()}),
            )
            self._commit(
                entry,
                entry.session.next_event(
                    ev.DIFFERENTIAL_UPDATE, {"differential": differential.to_dict()}
                ),
            )

    def trigger_mx(self, session_id: str) -> None:
        self._trigger_mx_entry(self._entry(session_id))

    def _trigger_mx_entry(self, entry: _Entry) -> None:
        if self._index is None:
            return
        with entry.lock:
            if entry.mx_inflight:
                entry.mx_pending = True
                return
            entry.mx_inflight = True
        self._schedule(self._mx_task, entry)

    def _mx_task(self, entry: _Entry) -> None:
        try:
            with entry.lock:
                state = entry.session.state.snapshot()
                transcript = entry.session.transcript.messages()
                # Stamp issued from the live state so concurrent runs order.
                stamp = entry.session.state.next_plan_stamp()
            result = run_mx(
                state,
                transcript,
                self._index,
                self._gateway,
                self._config,
                clock=self._clock,
                stamp=stamp,
            )
            with entry.lock:
                # apply() enforces last-write-wins against the live state.
                self._commit(
                    entry,
                    entry.session.next_event(
                        ev.PLAN_UPDATE,
                        {
                            "plan": result.plan.to_dict(),
                            "retrieval": result.retrieval.to_dict(),
                            "stamp": result.stamp,
                        },
                    ),
                )
        except Exception as exc:  # noqa: BLE001 - background lane, surfaced via log
            log.warning("planning run failed for %s: %s", entry.session.session_id, exc)
        finally:
            rerun = False
            with entry.lock:
                entry.mx_inflight = False
                if entry.mx_pending:
                    entry.mx_pending = False
                    entry.mx_inflight = True
                    rerun = True
            if rerun:
                self._schedule(self._mx_task, entry)
