"""careloop: a two-agent disease-management dialogue system.

A fast conversational agent handles the patient-facing chat while a slower
planning agent retrieves clinical guidelines under a token budget and
compiles cited, schema-constrained management plans. All model calls go
through a gateway that supports a deterministic scripted backend, so every
pipeline in the package is testable offline.
"""

__version__ = "0.1.0"
