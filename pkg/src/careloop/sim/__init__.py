from careloop.sim.filters import FilterResult, filter_dialogue, formatting_check
from careloop.sim.pipeline import (
    Critique,
    GoodBad,
    MultiVisitRecord,
    SimMessage,
    VisitOutline,
    assemble_record,
    critique_dialogue,
    gen_dialogue,
    gen_outlines,
)

__all__ = [
    "Critique",
    "FilterResult",
    "GoodBad",
    "MultiVisitRecord",
    "SimMessage",
    "VisitOutline",
    "assemble_record",
    "critique_dialogue",
    "filter_dialogue",
    "formatting_check",
    "gen_dialogue",
    "gen_outlines",
]
