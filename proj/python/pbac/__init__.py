from ._pbac import (
    Graph,
    PbacError,
    RULE_SET_VERSION,
    decide,
    decide_ternary,
    format_program,
    run_program,
    simulate,
)

__all__ = [
    "Graph",
    "PbacError",
    "RULE_SET_VERSION",
    "decide",
    "decide_ternary",
    "format_program",
    "run_program",
    "simulate",
]
