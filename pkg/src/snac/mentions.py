"""Capitalized-run extraction shared by the NE, coref-chain, and role heuristics."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .documents import SummaryDocument


@lru_cache(maxsize=None)
def _load_wordlist(name: str) -> frozenset[str]:
    text = resources.files("snac.data").joinpath(name).read_text(encoding="utf-8")
    return frozenset(
        line.strip().lower()
        for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    )


def function_words() -> frozenset[str]:
    return _load_wordlist("function_words.txt")


def common_verbs() -> frozenset[str]:
    return _load_wordlist("common_verbs.txt")


@dataclass(frozen=True)
class CapitalizedRun:
    """A maximal run of consecutive capitalized tokens within one sentence."""

    sentence_index: int
    start: int  # absolute character offsets
    end: int
    text: str
    tokens: tuple[str, ...]
    sentence_initial: bool

    @property
    def head(self) -> str:
        return self.tokens[0]


def _is_capitalized(token: str) -> bool:
    return bool(token) and token[0].isupper() and token[0].isalpha()


def capitalized_runs(doc: SummaryDocument) -> list[CapitalizedRun]:
    """All capitalized-token runs, with sentence-initial function words stripped.

    A run that opens a sentence frequently starts with a capitalized function
    word ("The barn..."); those leading tokens are dropped so only the
    name-like remainder survives.
    """
    stop = function_words()
    runs: list[CapitalizedRun] = []
    for si in range(doc.sentence_count):
        tokens = doc.sentence_tokens(si)
        i = 0
        while i < len(tokens):
            a, b = tokens[i]
            if not _is_capitalized(doc.text[a:b]):
                i += 1
                continue
            j = i
            while j + 1 < len(tokens):
                na, nb = tokens[j + 1]
                if _is_capitalized(doc.text[na:nb]):
                    j += 1
                else:
                    break
            initial = i == 0
            lo = i
            if initial:
                while lo <= j and doc.text[tokens[lo][0] : tokens[lo][1]].lower() in stop:
                    lo += 1
            if lo <= j:
                words = tuple(doc.text[ta:tb] for ta, tb in tokens[lo : j + 1])
                runs.append(
                    CapitalizedRun(
                        sentence_index=si,
                        start=tokens[lo][0],
                        end=tokens[j][1],
                        text=doc.text[tokens[lo][0] : tokens[j][1]],
                        tokens=words,
                        sentence_initial=initial and lo == i,
                    )
                )
            i = j + 1
    return runs
