"""The coherence-error taxonomy: seven categories in two groups.

Coherence errors break narrative understanding; language errors capture
other quality problems (repetition, grammar, unclear coreference) that do
not by themselves break the narrative.
"""

from __future__ import annotations

from enum import Enum


class CategoryGroup(str, Enum):
    COHERENCE = "coherence"
    LANGUAGE = "language"


class ErrorCategory(str, Enum):
    """Canonical error categories; member values are the wire-format names."""

    CharE = "CharE"
    RefE = "RefE"
    SceneE = "SceneE"
    InconE = "InconE"
    RepE = "RepE"
    GramE = "GramE"
    CorefE = "CorefE"

    @property
    def group(self) -> CategoryGroup:
        return _GROUPS[self]

    @property
    def display_name(self) -> str:
        return _DISPLAY_NAMES[self]

    @property
    def requires_antecedent(self) -> bool:
        return self in ANTECEDENT_REQUIRED

    @property
    def whole_sentence(self) -> bool:
        return self is ErrorCategory.SceneE


_GROUPS = {
    ErrorCategory.CharE: CategoryGroup.COHERENCE,
    ErrorCategory.RefE: CategoryGroup.COHERENCE,
    ErrorCategory.SceneE: CategoryGroup.COHERENCE,
    ErrorCategory.InconE: CategoryGroup.COHERENCE,
    ErrorCategory.RepE: CategoryGroup.LANGUAGE,
    ErrorCategory.GramE: CategoryGroup.LANGUAGE,
    ErrorCategory.CorefE: CategoryGroup.LANGUAGE,
}

_DISPLAY_NAMES = {
    ErrorCategory.CharE: "New Person not Introduced",
    ErrorCategory.RefE: "Missing Information about an Event/Object",
    ErrorCategory.SceneE: "Abrupt Transition from the Previous Scene",
    ErrorCategory.InconE: "Inconsistent",
    ErrorCategory.RepE: "Repetition",
    ErrorCategory.GramE: "Ungrammatical/Nonsensical",
    ErrorCategory.CorefE: "Unclear Coreference",
}

ANTECEDENT_REQUIRED = frozenset({ErrorCategory.InconE, ErrorCategory.RepE})

COHERENCE_CATEGORIES = tuple(c for c in ErrorCategory if c.group is CategoryGroup.COHERENCE)
LANGUAGE_CATEGORIES = tuple(c for c in ErrorCategory if c.group is CategoryGroup.LANGUAGE)


def parse_category(name: str) -> ErrorCategory:
    """Parse a wire-format category name; unknown names are rejected."""
    try:
        return ErrorCategory(name)
    except ValueError:
        raise ValueError(f"unknown error category: {name!r}") from None
