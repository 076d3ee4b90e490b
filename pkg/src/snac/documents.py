"""Summary documents: sentence/segment structure, token offsets, spans.

All offsets are character offsets into the document's full text. Spans are
stored as character ranges; token coverage is derived by intersection, so
annotations survive retokenization.
"""

from __future__ import annotations

import dataclasses
import re
import string
import warnings
from dataclasses import dataclass
from typing import Iterator, Literal, Sequence

_PUNCT = frozenset(string.punctuation)
_WS_RUN = re.compile(r"\S+")


def tokenize(text: str) -> list[tuple[int, int]]:
    """Deterministic rule-based tokenization returning (start, end) offsets.

    Splits on whitespace, then peels leading/trailing punctuation characters
    into single-character tokens. "Mr. Lorry visits." becomes
    ["Mr", ".", "Lorry", "visits", "."].
    """
    offsets: list[tuple[int, int]] = []
    for match in _WS_RUN.finditer(text):
        chunk = match.group()
        base = match.start()
        lo, hi = 0, len(chunk)
        lead: list[tuple[int, int]] = []
        while lo < hi and chunk[lo] in _PUNCT:
            lead.append((base + lo, base + lo + 1))
            lo += 1
        trail: list[tuple[int, int]] = []
        while hi > lo and chunk[hi - 1] in _PUNCT:
            trail.append((base + hi - 1, base + hi))
            hi -= 1
        offsets.extend(lead)
        if hi > lo:
            offsets.append((base + lo, base + hi))
        offsets.extend(reversed(trail))
    return offsets


@dataclass(frozen=True)
class Sentence:
    """Character span of one sentence within the full text."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start < 0 or self.end <= self.start:
            raise ValueError(f"invalid sentence span [{self.start}, {self.end})")


@dataclass(frozen=True)
class Span:
    """A highlighted character range inside one segment."""

    start: int
    end: int
    segment_index: int

    def __post_init__(self) -> None:
        if self.start < 0 or self.end <= self.start:
            raise ValueError(f"invalid span [{self.start}, {self.end})")
        if self.segment_index < 0:
            raise ValueError(f"segment_index must be >= 0, got {self.segment_index}")

    def overlaps(self, start: int, end: int) -> bool:
        return self.start < end and start < self.end


@dataclass(frozen=True)
class SummaryDocument:
    """A generated summary with sentence structure and optional segmentation.

    ``segment_boundaries`` are cumulative sentence counts: boundary value b
    means segment ends after the b-th sentence. The last boundary, when
    segmentation is present, equals the sentence count. ``paragraph_breaks``
    use the same convention and record native paragraph boundaries.
    """

    doc_id: str
    system_id: str
    text: str
    sentences: tuple[Sentence, ...]
    paragraph_breaks: tuple[int, ...] = ()
    segment_boundaries: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not self.doc_id:
            raise ValueError("doc_id cannot be empty")
        if not self.sentences:
            raise ValueError("a summary needs at least one sentence")
        n = len(self.sentences)
        prev_end = 0
        for i, sent in enumerate(self.sentences):
            if sent.start < prev_end:
                raise ValueError(f"sentence {i} overlaps or precedes its predecessor")
            if sent.end > len(self.text):
                raise ValueError(f"sentence {i} extends past end of text")
            if self.text[prev_end : sent.start].strip():
                raise ValueError(f"non-whitespace text before sentence {i}")
            prev_end = sent.end
        if self.text[prev_end:].strip():
            raise ValueError("non-whitespace text after the last sentence")
        _check_boundaries(self.paragraph_breaks, n, "paragraph_breaks", must_close=False)
        if self.segment_boundaries:
            _check_boundaries(self.segment_boundaries, n, "segment_boundaries", must_close=True)
        # Token offsets are absolute; tokenizing per sentence guarantees every
        # token lies within exactly one sentence span.
        tokens = tuple(
            tuple(
                (sent.start + ts, sent.start + te)
                for ts, te in tokenize(self.text[sent.start : sent.end])
            )
            for sent in self.sentences
        )
        object.__setattr__(self, "_tokens", tokens)

    # -- sentence / token access -------------------------------------------------

    @property
    def sentence_count(self) -> int:
        return len(self.sentences)

    def sentence_text(self, index: int) -> str:
        sent = self.sentences[index]
        return self.text[sent.start : sent.end]

    def sentence_texts(self) -> list[str]:
        return [self.sentence_text(i) for i in range(len(self.sentences))]

    def sentence_tokens(self, index: int) -> tuple[tuple[int, int], ...]:
        return self._tokens[index]  # type: ignore[attr-defined]

    @property
    def flat_tokens(self) -> tuple[tuple[int, int], ...]:
        """All token offsets in document order."""
        return tuple(tok for sent in self._tokens for tok in sent)  # type: ignore[attr-defined]

    @property
    def token_count(self) -> int:
        return len(self.flat_tokens)

    def token_indices_in_range(self, start: int, end: int) -> set[int]:
        """Indices (into flat_tokens) of tokens intersecting [start, end)."""
        return {
            i for i, (ts, te) in enumerate(self.flat_tokens) if ts < end and start < te
        }

    # -- segmentation ------------------------------------------------------------

    @property
    def is_segmented(self) -> bool:
        return bool(self.segment_boundaries)

    @property
    def segment_count(self) -> int:
        if not self.segment_boundaries:
            raise ValueError(f"document {self.doc_id} has no segment boundaries")
        return len(self.segment_boundaries)

    def segment_sentence_range(self, index: int) -> tuple[int, int]:
        """Half-open [lo, hi) range of sentence indices in segment ``index``."""
        if not 0 <= index < self.segment_count:
            raise IndexError(f"segment index {index} out of range")
        lo = self.segment_boundaries[index - 1] if index > 0 else 0
        return lo, self.segment_boundaries[index]

    def segment_char_range(self, index: int) -> tuple[int, int]:
        lo, hi = self.segment_sentence_range(index)
        return self.sentences[lo].start, self.sentences[hi - 1].end

    def segment_of_sentence(self, sentence_index: int) -> int:
        for seg in range(self.segment_count):
            lo, hi = self.segment_sentence_range(seg)
            if lo <= sentence_index < hi:
                return seg
        raise IndexError(f"sentence index {sentence_index} out of range")

    def iter_segments(self) -> Iterator[tuple[int, int, int]]:
        for seg in range(self.segment_count):
            lo, hi = self.segment_sentence_range(seg)
            yield seg, lo, hi


def _check_boundaries(values: Sequence[int], n: int, name: str, *, must_close: bool) -> None:
    prev = 0
    for v in values:
        if v <= prev:
            raise ValueError(f"{name} must be strictly increasing, got {list(values)}")
        if v > n:
            raise ValueError(f"{name} value {v} exceeds sentence count {n}")
        prev = v
    if must_close and values and values[-1] != n:
        raise ValueError(f"last of {name} must equal sentence count {n}, got {values[-1]}")
    if not must_close and values and values[-1] >= n:
        raise ValueError(f"{name} values must be < sentence count {n}")


SegmentationStrategy = Literal["fixed_k", "native_boundaries"]


def segment_summary(
    doc: SummaryDocument,
    strategy: SegmentationStrategy,
    k: int | None = None,
) -> SummaryDocument:
    """Attach segment boundaries to a document.

    ``fixed_k`` yields ceil(N/k) segments with only the last allowed to be
    shorter than k. ``native_boundaries`` uses the document's paragraph
    breaks; with none present the whole summary becomes a single segment
    (a warning, not an error).
    """
    n = len(doc.sentences)
    if strategy == "fixed_k":
        if k is None or k <= 0:
            raise ValueError(f"fixed_k requires k >= 1, got {k}")
        boundaries = list(range(k, n, k))
        boundaries.append(n)
    elif strategy == "native_boundaries":
        if not doc.paragraph_breaks:
            warnings.warn(
                f"document {doc.doc_id} has no paragraph breaks; "
                "falling back to a single segment",
                stacklevel=2,
            )
        boundaries = list(doc.paragraph_breaks) + [n]
    else:
        raise ValueError(f"unknown segmentation strategy: {strategy!r}")
    return dataclasses.replace(doc, segment_boundaries=tuple(boundaries))


def document_from_sentences(
    doc_id: str,
    sentences: Sequence[str],
    *,
    system_id: str = "unknown",
    paragraph_breaks: Sequence[int] = (),
    segment_boundaries: Sequence[int] = (),
) -> SummaryDocument:
    """Build a document by joining sentence texts with single spaces."""
    spans: list[Sentence] = []
    parts: list[str] = []
    pos = 0
    for i, sent in enumerate(sentences):
        if not sent or sent != sent.strip():
            raise ValueError(f"sentence {i} must be non-empty and stripped")
        if i > 0:
            parts.append(" ")
            pos += 1
        spans.append(Sentence(pos, pos + len(sent)))
        parts.append(sent)
        pos += len(sent)
    return SummaryDocument(
        doc_id=doc_id,
        system_id=system_id,
        text="".join(parts),
        sentences=tuple(spans),
        paragraph_breaks=tuple(paragraph_breaks),
        segment_boundaries=tuple(segment_boundaries),
    )


_SENT_END = re.compile(r"[.!?]+[\"'”’)\]]*")
_BLANK_LINE = re.compile(r"\n[ \t]*\n")


def document_from_raw_text(
    doc_id: str,
    text: str,
    *,
    system_id: str = "unknown",
) -> SummaryDocument:
    """Rule-based fallback splitter for raw model output.

    Sentences end at terminal punctuation followed by whitespace; blank
    lines become native paragraph breaks. This is deliberately simple — a
    proper sentence splitter should be run upstream when available.
    """
    spans: list[Sentence] = []
    cursor = 0
    length = len(text)
    while cursor < length:
        while cursor < length and text[cursor].isspace():
            cursor += 1
        if cursor >= length:
            break
        end = length
        for match in _SENT_END.finditer(text, cursor):
            nxt = match.end()
            if nxt >= length or text[nxt].isspace():
                end = nxt
                break
        spans.append(Sentence(cursor, end))
        cursor = end
    if not spans:
        raise ValueError("no sentences found in raw text")
    breaks: list[int] = []
    for match in _BLANK_LINE.finditer(text):
        count = sum(1 for s in spans if s.end <= match.start())
        if 0 < count < len(spans) and (not breaks or breaks[-1] != count):
            breaks.append(count)
    return SummaryDocument(
        doc_id=doc_id,
        system_id=system_id,
        text=text,
        sentences=tuple(spans),
        paragraph_breaks=tuple(breaks),
    )
