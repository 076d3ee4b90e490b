"""Entity-grid coherence model: role grids, transition estimation, scoring.

An entity grid maps each entity to its grammatical role per sentence
(S subject, O object, X other, "-" absent). A transition model estimated
over adjacent-sentence role pairs scores a candidate sentence as the summed
log probability of each entity's transition from the last context sentence.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Protocol, Sequence

from .documents import SummaryDocument, tokenize
from .errors import SchemaError
from .mentions import capitalized_runs, common_verbs

ROLES = ("S", "O", "X", "-")
ABSENT = "-"
_ROLE_PRECEDENCE = {"S": 0, "O": 1, "X": 2}


class RoleProvider(Protocol):
    def doc_roles(self, doc: SummaryDocument) -> list[dict[str, str]]:
        """Entity key -> role for each sentence of the document."""
        ...

    def sentence_roles(self, text: str) -> dict[str, str]:
        """Entity key -> role for one free-standing sentence."""
        ...


class HeuristicRoleProvider:
    """Role provider with no external dependencies.

    Entities are capitalized-token runs keyed by their lowercased head token.
    A mention before the sentence's first verb is the subject, after it the
    object; with no recognizable verb the role falls back to X. The verb list
    ships as package data.
    """

    def doc_roles(self, doc: SummaryDocument) -> list[dict[str, str]]:
        by_sentence: list[dict[str, str]] = [{} for _ in doc.sentences]
        first_verb = [
            _first_verb_position(doc.text, doc.sentence_tokens(si))
            for si in range(doc.sentence_count)
        ]
        for run in capitalized_runs(doc):
            key = run.head.lower()
            verb_pos = first_verb[run.sentence_index]
            if verb_pos is None:
                role = "X"
            elif run.start < verb_pos:
                role = "S"
            else:
                role = "O"
            slot = by_sentence[run.sentence_index]
            if key not in slot or _ROLE_PRECEDENCE[role] < _ROLE_PRECEDENCE[slot[key]]:
                slot[key] = role
        return by_sentence

    def sentence_roles(self, text: str) -> dict[str, str]:
        from .documents import document_from_sentences

        stripped = text.strip()
        if not stripped:
            return {}
        doc = document_from_sentences("adhoc", [stripped])
        return self.doc_roles(doc)[0]


def _first_verb_position(text: str, tokens: Sequence[tuple[int, int]]) -> int | None:
    verbs = common_verbs()
    for a, b in tokens:
        if text[a:b].lower() in verbs:
            return a
    return None


class FileRoleProvider:
    """Role file: JSON {doc_id, sentences: [{entities: [{key, role}]}]}."""

    def __init__(self, path: str | Path):
        self.path = str(path)
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(
                f"invalid JSON: {exc.msg}", path=self.path, line=exc.lineno
            ) from exc
        try:
            self.doc_id = str(data["doc_id"])
            self._sentences: list[dict[str, str]] = []
            for i, sent in enumerate(data["sentences"]):
                roles: dict[str, str] = {}
                for entry in sent.get("entities", []):
                    role = entry["role"]
                    if role not in ("S", "O", "X"):
                        raise ValueError(
                            f"sentence {i}: role must be S, O or X, got {role!r}"
                        )
                    roles[str(entry["key"])] = role
                self._sentences.append(roles)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed role file: {exc}", path=self.path) from exc

    def doc_roles(self, doc: SummaryDocument) -> list[dict[str, str]]:
        if doc.doc_id != self.doc_id:
            raise ValueError(
                f"role file is for {self.doc_id!r}, document is {doc.doc_id!r}"
            )
        if len(self._sentences) != doc.sentence_count:
            raise ValueError(
                f"role file has {len(self._sentences)} sentences, "
                f"document has {doc.sentence_count}"
            )
        return [dict(r) for r in self._sentences]

    def sentence_roles(self, text: str) -> dict[str, str]:
        raise ValueError("role files are indexed by document; use doc_roles")


@dataclass(frozen=True)
class EntityGrid:
    doc_id: str
    entities: tuple[str, ...]
    roles: tuple[tuple[str, ...], ...]  # rows = entities, columns = sentences

    def __post_init__(self) -> None:
        for entity, row in zip(self.entities, self.roles):
            if len(row) != len(self.roles[0]):
                raise ValueError("all grid rows must have the same sentence count")
            for cell in row:
                if cell not in ROLES:
                    raise ValueError(f"invalid role {cell!r} for entity {entity!r}")
            if all(cell == ABSENT for cell in row):
                raise ValueError(f"entity {entity!r} never appears in the grid")

    @property
    def sentence_count(self) -> int:
        return len(self.roles[0]) if self.roles else 0


def build_entity_grid(
    doc: SummaryDocument, provider: RoleProvider | None = None
) -> EntityGrid:
    provider = provider or HeuristicRoleProvider()
    per_sentence = provider.doc_roles(doc)
    entities = sorted({key for roles in per_sentence for key in roles})
    rows = tuple(
        tuple(per_sentence[si].get(entity, ABSENT) for si in range(len(per_sentence)))
        for entity in entities
    )
    return EntityGrid(doc.doc_id, tuple(entities), rows)


@dataclass(frozen=True)
class TransitionModel:
    """Adjacent-sentence role transition probabilities with add-k smoothing."""

    counts: Mapping[str, Mapping[str, int]]
    smoothing: float
    corpus_id: str = ""
    probabilities: Mapping[str, Mapping[str, float]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.smoothing < 0:
            raise ValueError("smoothing must be >= 0")
        if not self.probabilities:
            object.__setattr__(self, "probabilities", _smooth(self.counts, self.smoothing))

    def probability(self, r1: str, r2: str) -> float:
        if r1 not in ROLES or r2 not in ROLES:
            raise ValueError(f"unknown roles in transition {r1!r} -> {r2!r}")
        row = self.probabilities.get(r1)
        if row is None:
            return 0.0  # unseen origin role with zero smoothing
        return row[r2]

    def to_dict(self) -> dict:
        return {
            "schema_version": "1",
            "corpus_id": self.corpus_id,
            "smoothing": self.smoothing,
            "counts": {r1: dict(row) for r1, row in self.counts.items()},
            "probabilities": {
                r1: dict(row) for r1, row in self.probabilities.items()
            },
        }

    @staticmethod
    def from_dict(data: Mapping) -> "TransitionModel":
        counts = {
            str(r1): {str(r2): int(n) for r2, n in row.items()}
            for r1, row in data["counts"].items()
        }
        return TransitionModel(
            counts=counts,
            smoothing=float(data["smoothing"]),
            corpus_id=str(data.get("corpus_id", "")),
        )


def _smooth(
    counts: Mapping[str, Mapping[str, int]], smoothing: float
) -> dict[str, dict[str, float]]:
    probabilities: dict[str, dict[str, float]] = {}
    for r1 in ROLES:
        row = counts.get(r1, {})
        denom = sum(row.get(r2, 0) for r2 in ROLES) + smoothing * len(ROLES)
        if denom == 0:
            continue  # only possible with zero smoothing and no observations
        probabilities[r1] = {
            r2: (row.get(r2, 0) + smoothing) / denom for r2 in ROLES
        }
    return probabilities


def estimate_transitions(
    grids: Sequence[EntityGrid], smoothing: float = 1.0, corpus_id: str = ""
) -> TransitionModel:
    """Count role transitions over adjacent sentence pairs, all entities."""
    if not any(g.sentence_count >= 2 for g in grids):
        raise ValueError("need at least one grid with two or more sentences")
    counts: dict[str, dict[str, int]] = {r1: {r2: 0 for r2 in ROLES} for r1 in ROLES}
    for grid in grids:
        for row in grid.roles:
            for r1, r2 in zip(row, row[1:]):
                counts[r1][r2] += 1
    return TransitionModel(counts=counts, smoothing=smoothing, corpus_id=corpus_id)


@dataclass(frozen=True)
class GridScore:
    value: float
    uninformative: bool = False
    entity_count: int = 0


def entity_grid_score(
    context_last_sentence: str,
    sentence: str,
    model: TransitionModel,
    provider: RoleProvider | None = None,
) -> GridScore:
    """Sum of log transition probabilities over entities in either sentence.

    An empty entity union scores 0 with the uninformative flag set, so
    callers can distinguish "perfectly coherent" from "nothing to score".
    """
    provider = provider or HeuristicRoleProvider()
    roles_context = provider.sentence_roles(context_last_sentence)
    roles_sentence = provider.sentence_roles(sentence)
    entities = sorted(set(roles_context) | set(roles_sentence))
    if not entities:
        return GridScore(0.0, uninformative=True)
    total = 0.0
    for entity in entities:
        p = model.probability(
            roles_context.get(entity, ABSENT), roles_sentence.get(entity, ABSENT)
        )
        total += math.log(p) if p > 0 else -math.inf
    return GridScore(total, entity_count=len(entities))


def score_document(
    doc: SummaryDocument, model: TransitionModel, provider: RoleProvider | None = None
) -> list[GridScore]:
    """Transition score for each sentence after the first."""
    provider = provider or HeuristicRoleProvider()
    per_sentence = provider.doc_roles(doc)
    scores: list[GridScore] = []
    for i in range(1, len(per_sentence)):
        prev, cur = per_sentence[i - 1], per_sentence[i]
        entities = sorted(set(prev) | set(cur))
        if not entities:
            scores.append(GridScore(0.0, uninformative=True))
            continue
        total = 0.0
        for entity in entities:
            p = model.probability(prev.get(entity, ABSENT), cur.get(entity, ABSENT))
            total += math.log(p) if p > 0 else -math.inf
        scores.append(GridScore(total, entity_count=len(entities)))
    return scores


def save_model(model: TransitionModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path: str | Path) -> TransitionModel:
    try:
        with open(path, encoding="utf-8") as fh:
            return TransitionModel.from_dict(json.load(fh))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}", path=str(path), line=exc.lineno) from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed transition model: {exc}", path=str(path)) from exc
