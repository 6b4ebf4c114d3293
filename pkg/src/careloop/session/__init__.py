from careloop.session.events import Event, MemoryStore, SessionStore, decode_log
from careloop.session.manager import SessionManager
from careloop.session.session import PostQuestionnaire, Session, export_questionnaire

__all__ = [
    "Event",
    "MemoryStore",
    "PostQuestionnaire",
    "Session",
    "SessionManager",
    "SessionStore",
    "decode_log",
    "export_questionnaire",
]
