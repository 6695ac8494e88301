"""Reasoner-grounded auditing of LLM answers over OWL 2 ontologies."""

import sys

from ._core import (
    ExtractError,
    HarnessError,
    KbInconsistentError,
    StatsError,
    TurtleParseError,
    __version__,
    audit,
    bonferroni,
    build_followup,
    canonical_turtle,
    classify,
    classify_error,
    cli,
    generate_expansion,
    is_consistent,
    isomorphic,
    mcnemar_exact,
    parse_answer,
    prompt_template_hash,
    reference_scenario,
    triple_count,
    wilson_interval,
)


def main():
    sys.exit(cli(sys.argv[1:]))


__all__ = [
    "ExtractError",
    "HarnessError",
    "KbInconsistentError",
    "StatsError",
    "TurtleParseError",
    "__version__",
    "audit",
    "bonferroni",
    "build_followup",
    "canonical_turtle",
    "classify",
    "classify_error",
    "cli",
    "generate_expansion",
    "is_consistent",
    "isomorphic",
    "main",
    "mcnemar_exact",
    "parse_answer",
    "prompt_template_hash",
    "reference_scenario",
    "triple_count",
    "wilson_interval",
]
