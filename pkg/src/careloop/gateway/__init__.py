from careloop.gateway.base import BackendReply, ModelGateway, ModelRequest
from careloop.gateway.embeddings import HashingEmbedder
from careloop.gateway.remote import RemoteBackend
from careloop.gateway.scripted import ScriptedBackend, ScriptedRule

__all__ = [
    "BackendReply",
    "HashingEmbedder",
    "ModelGateway",
    "ModelRequest",
    "RemoteBackend",
    "ScriptedBackend",
    "ScriptedRule",
]
