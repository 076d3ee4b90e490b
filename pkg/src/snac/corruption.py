"""Corruption baselines that inject known coherence errors into summaries.

Three recipes: shuffling all sentences, duplicating a random half of them,
and reducing a summary to its named entities plus the corpus's top bigrams.
Every recipe is a pure function of (document, seed).
"""

from __future__ import annotations

import json
import random
import warnings
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal, Mapping, Sequence

from .documents import SummaryDocument, tokenize
from .errors import SchemaError
from .mentions import capitalized_runs

CorruptionKind = Literal["shuffle", "repetition", "ne_bigram"]


@dataclass(frozen=True)
class CorruptionRecipe:
    kind: CorruptionKind
    seed: int
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in ("shuffle", "repetition", "ne_bigram"):
            raise ValueError(f"unknown corruption kind: {self.kind!r}")
        fraction = self.params.get("repeat_fraction", 0.5)
        if not 0.0 < fraction <= 1.0:
            raise ValueError(f"repeat_fraction must be in (0, 1], got {fraction}")
        if self.params.get("bigram_k", 200) < 1:
            raise ValueError("bigram_k must be >= 1")


def corrupt_shuffle(doc: SummaryDocument, seed: int) -> str:
    """Uniformly permute the summary's sentences.

    The sentence multiset (and so the unigram multiset) is unchanged, which
    is exactly why bag-of-ngram metrics cannot see this corruption.
    """
    texts = doc.sentence_texts()
    if len(texts) < 2:
        warnings.warn(
            f"document {doc.doc_id} has a single sentence; shuffle is a no-op",
            stacklevel=2,
        )
        return " ".join(texts)
    order = list(range(len(texts)))
    random.Random(seed).shuffle(order)
    return " ".join(texts[i] for i in order)


def corrupt_repetition(
    doc: SummaryDocument, seed: int, repeat_fraction: float = 0.5
) -> str:
    """Duplicate floor(N * fraction) randomly chosen sentences in place.

    Each selected sentence appears exactly twice, the duplicate immediately
    after the original; every other sentence appears exactly once and the
    original relative order is preserved.
    """
    if not 0.0 < repeat_fraction <= 1.0:
        raise ValueError(f"repeat_fraction must be in (0, 1], got {repeat_fraction}")
    texts = doc.sentence_texts()
    n_dup = int(len(texts) * repeat_fraction)
    chosen = set(random.Random(seed).sample(range(len(texts)), n_dup))
    out: list[str] = []
    for i, text in enumerate(texts):
        out.append(text)
        if i in chosen:
            out.append(text)
    return " ".join(out)


# -- named entities + top bigrams -------------------------------------------------


@dataclass(frozen=True)
class NamedEntitySpan:
    start: int
    end: int
    text: str


def extract_named_entities(doc: SummaryDocument) -> list[NamedEntitySpan]:
    """Heuristic NE provider: maximal capitalized-token runs.

    Mid-sentence runs always count. A sentence-initial run counts only when
    one of its tokens recurs inside some other capitalized run in the
    document, which keeps recurring protagonists while dropping ordinary
    sentence-opening words. External NE span files override this provider.
    """
    runs = capitalized_runs(doc)
    token_locations: Counter[str] = Counter()
    for run in runs:
        token_locations.update(set(run.tokens))
    out = []
    for run in runs:
        if run.sentence_initial and not any(
            token_locations[tok] > 1 for tok in run.tokens
        ):
            continue
        out.append(NamedEntitySpan(run.start, run.end, run.text))
    return out


def load_ne_file(path: str | Path) -> list[NamedEntitySpan]:
    """NE span file: JSON list of {start, end, text}."""
    try:
        with open(path, encoding="utf-8") as fh:
            rows = json.load(fh)
        return [
            NamedEntitySpan(int(r["start"]), int(r["end"]), str(r["text"])) for r in rows
        ]
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}", path=str(path), line=exc.lineno) from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed NE span file: {exc}", path=str(path)) from exc


def top_bigrams(corpus: Sequence[str], k: int = 200) -> list[tuple[str, str]]:
    """Token bigrams ranked by corpus frequency, ties broken lexicographically."""
    if not corpus:
        raise ValueError("top_bigrams needs a non-empty corpus")
    counts: Counter[tuple[str, str]] = Counter()
    for text in corpus:
        words = [text[a:b] for a, b in tokenize(text)]
        counts.update(zip(words, words[1:]))
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return [bigram for bigram, _ in ranked[:k]]


def corrupt_ne_bigram(
    doc: SummaryDocument,
    corpus_bigrams: Sequence[tuple[str, str]],
    ne_spans: Sequence[NamedEntitySpan],
) -> str:
    """Concatenate the summary's named entities and the corpus's top bigrams.

    Each named entity is repeated as many times as it occurs in the summary
    (one provider span = one occurrence), in order of first occurrence; the
    bigrams follow, joined by spaces. An empty NE list yields bigrams only.
    """
    for span in ne_spans:
        if span.end > len(doc.text) or doc.text[span.start : span.end] != span.text:
            raise ValueError(
                f"NE span [{span.start}, {span.end}) does not match document text "
                f"({span.text!r})"
            )
    counts: Counter[str] = Counter()
    first_seen: dict[str, int] = {}
    for span in sorted(ne_spans, key=lambda s: s.start):
        counts[span.text] += 1
        first_seen.setdefault(span.text, span.start)
    parts: list[str] = []
    for text in sorted(counts, key=first_seen.__getitem__):
        parts.extend([text] * counts[text])
    parts.extend(f"{w1} {w2}" for w1, w2 in corpus_bigrams)
    return " ".join(parts)


def apply_recipe(
    recipe: CorruptionRecipe,
    doc: SummaryDocument,
    *,
    corpus_bigrams: Sequence[tuple[str, str]] | None = None,
    ne_spans: Sequence[NamedEntitySpan] | None = None,
) -> str:
    if recipe.kind == "shuffle":
        return corrupt_shuffle(doc, recipe.seed)
    if recipe.kind == "repetition":
        return corrupt_repetition(
            doc, recipe.seed, recipe.params.get("repeat_fraction", 0.5)
        )
    if corpus_bigrams is None:
        raise ValueError("ne_bigram corruption needs corpus bigrams")
    spans = ne_spans if ne_spans is not None else extract_named_entities(doc)
    return corrupt_ne_bigram(doc, corpus_bigrams, spans)
