"""Synthetic coherence training data from gold summaries.

Two generators, both emitting label-balanced (has_error, context, sentence)
triples: a coreference-based one that deletes an entity's introducing
sentence from the context, and a next-sentence one that swaps the true
continuation for a later sentence of the same summary. Generation is a pure
function of (document, chains, seed); regeneration is byte-identical.
"""

from __future__ import annotations

import json
import random
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, IO, Iterable, Mapping, Sequence

from .documents import SummaryDocument
from .errors import SchemaError
from .mentions import capitalized_runs


@dataclass(frozen=True)
class Mention:
    sentence_index: int
    start: int
    end: int
    text: str = ""


@dataclass(frozen=True)
class MentionChain:
    """Mentions of one entity, ordered by position; needs two to be a chain."""

    doc_id: str
    mentions: tuple[Mention, ...]

    def __post_init__(self) -> None:
        if len(self.mentions) < 2:
            raise ValueError("a mention chain needs at least 2 mentions")
        indices = [m.sentence_index for m in self.mentions]
        if indices != sorted(indices):
            raise ValueError("mentions must be ordered by sentence index")

    def first_cross_sentence_pair(self) -> tuple[int, int] | None:
        """(i, j) of the first mention and the first later-sentence mention."""
        first = self.mentions[0].sentence_index
        for mention in self.mentions[1:]:
            if mention.sentence_index > first:
                return first, mention.sentence_index
        return None


@dataclass(frozen=True)
class TrainingTriple:
    has_error: bool
    context: tuple[str, ...]
    sentence: str
    provenance: Mapping[str, Any] = field(default_factory=dict)


def heuristic_mention_chains(doc: SummaryDocument) -> list[MentionChain]:
    """Chains of repeated proper names, grouped by their leading token.

    Capitalized-token runs (sentence-initial function words excluded) are
    linked case-sensitively through their first token, so "Gabriel Oak" and
    a later "Gabriel" fall into one chain. Deterministic; a stand-in for a
    real coreference system, whose chain files take precedence when given.
    """
    groups: dict[str, list[Mention]] = defaultdict(list)
    for run in capitalized_runs(doc):
        groups[run.head].append(
            Mention(run.sentence_index, run.start, run.end, run.text)
        )
    chains = [
        MentionChain(doc.doc_id, tuple(sorted(ms, key=lambda m: (m.sentence_index, m.start))))
        for ms in groups.values()
        if len(ms) >= 2
    ]
    chains.sort(key=lambda c: (c.mentions[0].sentence_index, c.mentions[0].start))
    return chains


def coref_triples(
    doc: SummaryDocument,
    chains: Sequence[MentionChain],
    *,
    max_per_doc: int | None = None,
    seed: int = 0,
) -> list[TrainingTriple]:
    """One negative/positive pair per usable chain.

    For an entity first mentioned in sentence i and mentioned again in
    sentence j > i, the negative drops sentence i from the context while the
    positive keeps the full original context; both share sentence j. Chains
    confined to a single sentence are skipped.
    """
    pairs: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for chain in chains:
        if chain.doc_id != doc.doc_id:
            raise ValueError(
                f"chain for {chain.doc_id!r} does not match document {doc.doc_id!r}"
            )
        pair = chain.first_cross_sentence_pair()
        if pair is None or pair in seen:
            continue
        seen.add(pair)
        pairs.append(pair)
    pairs = _subsample(pairs, max_per_doc, seed, doc.doc_id)

    sentences = doc.sentence_texts()
    triples: list[TrainingTriple] = []
    for i, j in pairs:
        target = sentences[j]
        negative_context = tuple(sentences[:i] + sentences[i + 1 : j])
        positive_context = tuple(sentences[:j])
        base = {"generator": "coref", "doc_id": doc.doc_id, "first_mention_sentence": i,
                "sentence_index": j}
        triples.append(
            TrainingTriple(True, negative_context, target, {**base, "removed_sentence": i})
        )
        triples.append(TrainingTriple(False, positive_context, target, base))
    return triples


def next_sentence_triples(
    doc: SummaryDocument,
    seed: int,
    *,
    max_per_doc: int | None = None,
) -> list[TrainingTriple]:
    """One negative/positive pair per usable context prefix.

    For a prefix of length L, the positive continuation is sentence L and the
    negative is drawn uniformly from sentences strictly after L (so the true
    next sentence is never the negative). Candidates whose text already
    appears in the context are excluded; prefixes left without candidates are
    skipped. Summaries shorter than 3 sentences yield nothing.
    """
    sentences = doc.sentence_texts()
    n = len(sentences)
    rng = random.Random(f"{seed}:{doc.doc_id}")
    lengths = []
    candidate_map: dict[int, list[int]] = {}
    for length in range(1, n - 1):
        context = sentences[:length]
        candidates = [
            q for q in range(length + 1, n) if sentences[q] not in context
        ]
        if candidates:
            lengths.append(length)
            candidate_map[length] = candidates
    lengths = _subsample(lengths, max_per_doc, seed, doc.doc_id)

    triples: list[TrainingTriple] = []
    for length in lengths:
        negative_index = rng.choice(candidate_map[length])
        context = tuple(sentences[:length])
        base = {"generator": "next_sentence", "doc_id": doc.doc_id, "context_length": length}
        triples.append(
            TrainingTriple(
                True,
                context,
                sentences[negative_index],
                {**base, "negative_index": negative_index},
            )
        )
        triples.append(
            TrainingTriple(False, context, sentences[length], {**base, "positive_index": length})
        )
    return triples


def _subsample(items: list, max_per_doc: int | None, seed: int, doc_id: str) -> list:
    if max_per_doc is not None and max_per_doc < 0:
        raise ValueError("max_per_doc must be >= 0")
    if max_per_doc is None or len(items) <= max_per_doc:
        return items
    rng = random.Random(f"{seed}:{doc_id}:subsample")
    return sorted(rng.sample(items, max_per_doc))


# -- file formats ------------------------------------------------------------------


def triple_to_json(triple: TrainingTriple) -> str:
    """Fixed field order for reproducible diffs; label uses the y convention
    (0 = incoherent / has_error, 1 = coherent)."""
    return json.dumps(
        {
            "label": 0 if triple.has_error else 1,
            "context": list(triple.context),
            "sentence": triple.sentence,
            "provenance": dict(triple.provenance),
        },
        ensure_ascii=False,
    )


def write_triples(triples: Iterable[TrainingTriple], out: IO[str] | str | Path) -> None:
    if isinstance(out, (str, Path)):
        with open(out, "w", encoding="utf-8") as fh:
            write_triples(triples, fh)
        return
    for triple in triples:
        out.write(triple_to_json(triple))
        out.write("\n")


def read_triples(path: str | Path) -> list[TrainingTriple]:
    triples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                triples.append(
                    TrainingTriple(
                        has_error=int(row["label"]) == 0,
                        context=tuple(row["context"]),
                        sentence=str(row["sentence"]),
                        provenance=row.get("provenance", {}),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise SchemaError(
                    f"malformed triple: {exc}", path=str(path), line=lineno
                ) from exc
    return triples


def load_chain_file(path: str | Path) -> list[MentionChain]:
    """Chain file: JSON {doc_id, chains: [[{sentence, start, end}]]}."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        doc_id = str(data["doc_id"])
        chains = []
        for rows in data["chains"]:
            mentions = tuple(
                Mention(int(r["sentence"]), int(r["start"]), int(r["end"]))
                for r in sorted(rows, key=lambda r: (int(r["sentence"]), int(r["start"])))
            )
            chains.append(MentionChain(doc_id, mentions))
        return chains
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}", path=str(path), line=exc.lineno) from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed chain file: {exc}", path=str(path)) from exc
