"""Python facade for the cumulative-reasoning engine."""

from ._core import (
    check_lemma1,
    conceptual_experiment,
    infer,
    oracle_solvable,
    solve24,
)

__all__ = [
    "check_lemma1",
    "conceptual_experiment",
    "infer",
    "oracle_solvable",
    "solve24",
]
