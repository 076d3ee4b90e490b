"""Inter-annotator agreement: Krippendorff's alpha, two-agree %, span normalization.

Alpha is 1 - D_o/D_e where D_o averages the distance metric over all
within-unit value pairs and D_e averages it over all pairs drawn without
replacement from the pooled value multiset. Units with fewer than two
present values are excluded entirely. This pair-average form coincides with
the classical coincidence-matrix formulation whenever all units carry the
same number of ratings (the common case here: every summary has the same
annotator count).
"""

from __future__ import annotations

import dataclasses
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Hashable, Iterable, Literal, Sequence, Union

from .annotations import AnnotationSet, replace_annotation_span
from .documents import Span, SummaryDocument
from .errors import UndefinedAgreementError
from .projection import Scope, project_labels, scope_matches
from .taxonomy import CategoryGroup, ErrorCategory

Value = Union[int, float, str]
Metric = Literal["nominal", "interval"]


@dataclass(frozen=True)
class RatingMatrix:
    """Units x raters value grid with missing entries allowed (None)."""

    unit_ids: tuple[Hashable, ...]
    raters: tuple[str, ...]
    values: tuple[tuple[Value | None, ...], ...]  # rows = units, columns = raters

    def __post_init__(self) -> None:
        if len(self.raters) < 2:
            raise ValueError("a rating matrix needs at least 2 raters")
        if len(self.values) != len(self.unit_ids):
            raise ValueError("one value row per unit required")
        for row in self.values:
            if len(row) != len(self.raters):
                raise ValueError("every row needs one value slot per rater")

    def unit_values(self) -> list[list[Value]]:
        return [[v for v in row if v is not None] for row in self.values]


def _distance(metric: Metric):
    if metric == "nominal":
        return lambda a, b: 0.0 if a == b else 1.0
    if metric == "interval":
        return lambda a, b: (float(a) - float(b)) ** 2
    raise ValueError(f"unknown metric: {metric!r}")


def krippendorff_alpha(matrix: RatingMatrix, metric: Metric = "nominal") -> float:
    """Chance-corrected agreement over a possibly-sparse rating matrix."""
    delta = _distance(metric)
    kept = [vals for vals in matrix.unit_values() if len(vals) >= 2]
    if not kept:
        raise UndefinedAgreementError("no unit has two or more ratings")

    pooled: list[Value] = [v for vals in kept for v in vals]
    counts = Counter(pooled)
    if len(counts) < 2:
        raise UndefinedAgreementError(
            "all pooled values are identical; expected disagreement is zero"
        )

    observed_sum = 0.0
    observed_pairs = 0
    for vals in kept:
        m = len(vals)
        observed_pairs += m * (m - 1) // 2
        for i in range(m):
            for j in range(i + 1, m):
                observed_sum += delta(vals[i], vals[j])

    # Expected disagreement from value counts: sum over unordered pooled pairs.
    n = len(pooled)
    expected_sum = 0.0
    distinct = list(counts.items())
    for i, (v1, c1) in enumerate(distinct):
        expected_sum += delta(v1, v1) * (c1 * (c1 - 1) / 2)
        for v2, c2 in distinct[i + 1 :]:
            expected_sum += delta(v1, v2) * c1 * c2
    expected_pairs = n * (n - 1) // 2

    # Single division keeps integer-valued sums exact (the -0.75 worked
    # example comes out bit-exact instead of off by one ulp).
    return 1.0 - (observed_sum * expected_pairs) / (observed_pairs * expected_sum)


# -- matrix builders -----------------------------------------------------------

CategorySelector = Union[ErrorCategory, CategoryGroup, Literal["all"]]


def _check_selector(selector: CategorySelector) -> None:
    if selector == "all" or isinstance(selector, (ErrorCategory, CategoryGroup)):
        return
    raise ValueError(f"unknown category selector: {selector!r}")


def _selector_matches(category: ErrorCategory, selector: CategorySelector) -> bool:
    if selector == "all":
        return True
    if isinstance(selector, ErrorCategory):
        return category is selector
    return category.group is selector


def _marks_by_rater(
    sets: Sequence[AnnotationSet], doc: SummaryDocument, selector: CategorySelector
) -> dict[str, set[int]]:
    """Token indices each rater covered with a span matching the selector."""
    _check_selector(selector)
    marks: dict[str, set[int]] = {}
    for s in sets:
        if s.doc_id != doc.doc_id:
            raise ValueError(f"set for {s.doc_id!r} does not match document {doc.doc_id!r}")
        for rater in s.annotator_ids:
            marks.setdefault(rater, set())
        for ann in s.annotations:
            if _selector_matches(ann.category, selector):
                marks[ann.annotator_id] |= doc.token_indices_in_range(
                    ann.span.start, ann.span.end
                )
    return marks


def token_matrix(
    sets: Sequence[AnnotationSet], doc: SummaryDocument, category: CategorySelector
) -> RatingMatrix:
    """One unit per token; cell is 1 iff the rater covered the token with a matching span."""
    if len(sets) < 2 and sum(len(s.annotator_ids) for s in sets) < 2:
        raise ValueError("token_matrix needs at least 2 annotators")
    marks = _marks_by_rater(sets, doc, category)
    raters = tuple(sorted(marks))
    n_tokens = doc.token_count
    rows = tuple(
        tuple(1 if t in marks[r] else 0 for r in raters) for t in range(n_tokens)
    )
    unit_ids = tuple((doc.doc_id, t) for t in range(n_tokens))
    return RatingMatrix(unit_ids, raters, rows)


def projection_matrix(
    sets: Sequence[AnnotationSet],
    doc: SummaryDocument,
    level: Literal["sentence", "segment"],
    scope: Scope,
) -> RatingMatrix:
    """Per-rater binary has-error labels at sentence or segment granularity."""
    pooled: dict[str, list] = {}
    for s in sets:
        for rater in s.annotator_ids:
            pooled.setdefault(rater, [])
        for a in s.annotations:
            pooled[a.annotator_id].append(a)
    if len(pooled) < 2:
        raise ValueError("projection_matrix needs at least 2 annotators")
    by_rater = {
        rater: project_labels(
            AnnotationSet.build(doc.doc_id, anns, annotator_ids={rater}),
            doc,
            level,
            scope,
        ).labels
        for rater, anns in pooled.items()
    }
    raters = tuple(sorted(by_rater))
    n_units = len(next(iter(by_rater.values())))
    rows = tuple(
        tuple(1 if by_rater[r][u] else 0 for r in raters) for u in range(n_units)
    )
    unit_ids = tuple((doc.doc_id, level, u) for u in range(n_units))
    return RatingMatrix(unit_ids, raters, rows)


def likert_matrix(sets_by_doc: dict[str, Sequence[AnnotationSet]]) -> RatingMatrix:
    """One unit per summary; values are the annotators' 1-5 coherence ratings."""
    ratings: dict[str, dict[str, int]] = defaultdict(dict)
    raters: set[str] = set()
    for doc_id in sorted(sets_by_doc):
        for s in sets_by_doc[doc_id]:
            for rater, score in s.likert.items():
                ratings[doc_id][rater] = score
                raters.add(rater)
    if len(raters) < 2:
        raise ValueError("likert_matrix needs ratings from at least 2 annotators")
    rater_order = tuple(sorted(raters))
    unit_ids = tuple(sorted(ratings))
    rows = tuple(
        tuple(ratings[u].get(r) for r in rater_order) for u in unit_ids
    )
    return RatingMatrix(unit_ids, rater_order, rows)


def combine_matrices(matrices: Sequence[RatingMatrix]) -> RatingMatrix:
    """Stack per-document matrices into one corpus-level matrix.

    Raters are unioned; a document where a rater is absent contributes
    missing values in that rater's column.
    """
    if not matrices:
        raise ValueError("nothing to combine")
    raters = tuple(sorted({r for m in matrices for r in m.raters}))
    unit_ids: list[Hashable] = []
    rows: list[tuple[Value | None, ...]] = []
    for m in matrices:
        index = {r: i for i, r in enumerate(m.raters)}
        for uid, row in zip(m.unit_ids, m.values):
            unit_ids.append(uid)
            rows.append(tuple(row[index[r]] if r in index else None for r in raters))
    return RatingMatrix(tuple(unit_ids), raters, tuple(rows))


# -- two-agree -----------------------------------------------------------------


def two_agree_counts(
    sets: Sequence[AnnotationSet], doc: SummaryDocument, category: CategorySelector
) -> tuple[int, int]:
    """(tokens marked by >= 2 raters, tokens marked by >= 1 rater)."""
    if len({r for s in sets for r in s.annotator_ids}) < 2:
        raise ValueError("two_agree needs at least 2 annotators")
    marks = _marks_by_rater(sets, doc, category)
    tally: Counter[int] = Counter()
    for token_ids in marks.values():
        tally.update(token_ids)
    marked_once = sum(1 for c in tally.values() if c >= 1)
    marked_twice = sum(1 for c in tally.values() if c >= 2)
    return marked_twice, marked_once


def two_agree(
    sets: Sequence[AnnotationSet], doc: SummaryDocument, category: CategorySelector
) -> float:
    """Of tokens marked erroneous by anyone, the % also marked by someone else."""
    num, den = two_agree_counts(sets, doc, category)
    if den == 0:
        raise UndefinedAgreementError(
            "no token was marked by any annotator; two-agree is undefined"
        )
    return 100.0 * num / den


# -- overlapping-span normalization ---------------------------------------------


def normalize_overlapping_spans(
    sets: Sequence[AnnotationSet],
    categories: Iterable[ErrorCategory],
    doc: SummaryDocument,
) -> list[AnnotationSet]:
    """Replace overlapping same-category spans (across raters) by their union.

    Spans of a listed category whose token sets overlap, transitively, all
    become the union span of their connected component. Other categories and
    antecedent spans are untouched. Idempotent: after one pass, same-category
    spans are either identical or token-disjoint.
    """
    targets = set(categories)
    # Collect target spans across all raters, per category.
    pool: list[tuple[int, int, set[int]]] = []  # (set_idx, ann_idx, token set)
    by_category: dict[ErrorCategory, list[int]] = defaultdict(list)
    for si, s in enumerate(sets):
        if s.doc_id != doc.doc_id:
            raise ValueError(f"set for {s.doc_id!r} does not match document {doc.doc_id!r}")
        for ai, ann in enumerate(s.annotations):
            if ann.category in targets:
                tokens = doc.token_indices_in_range(ann.span.start, ann.span.end)
                by_category[ann.category].append(len(pool))
                pool.append((si, ai, tokens))

    replacement: dict[tuple[int, int], Span] = {}
    for members in by_category.values():
        for component in _token_overlap_components(members, pool):
            spans = [sets[pool[m][0]].annotations[pool[m][1]].span for m in component]
            union = Span(
                min(sp.start for sp in spans),
                max(sp.end for sp in spans),
                spans[0].segment_index,
            )
            for m in component:
                replacement[(pool[m][0], pool[m][1])] = union

    out: list[AnnotationSet] = []
    for si, s in enumerate(sets):
        changed = list(s.annotations)
        for ai, ann in enumerate(s.annotations):
            union = replacement.get((si, ai))
            if union is not None and union != ann.span:
                changed[ai] = replace_annotation_span(ann, union)
        out.append(dataclasses.replace(s, annotations=tuple(changed)))
    return out


def _token_overlap_components(
    members: list[int], pool: list[tuple[int, int, set[int]]]
) -> list[list[int]]:
    parent = {m: m for m in members}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, a in enumerate(members):
        for b in members[i + 1 :]:
            if pool[a][2] & pool[b][2]:
                parent[find(a)] = find(b)
    groups: dict[int, list[int]] = defaultdict(list)
    for m in members:
        groups[find(m)].append(m)
    return list(groups.values())


# -- likert binarization --------------------------------------------------------

BINARIZATION_THRESHOLDS = (1.5, 2.5, 3.5, 4.5)


def best_likert_binarization(matrix: RatingMatrix) -> tuple[float, float]:
    """Sweep binarization cutoffs over a 1-5 matrix, maximizing nominal alpha.

    Returns (threshold, alpha). Candidates where the binarized matrix
    degenerates to a single value are skipped.
    """
    best: tuple[float, float] | None = None
    for cutoff in BINARIZATION_THRESHOLDS:
        binarized = RatingMatrix(
            matrix.unit_ids,
            matrix.raters,
            tuple(
                tuple(None if v is None else int(float(v) > cutoff) for v in row)
                for row in matrix.values
            ),
        )
        try:
            alpha = krippendorff_alpha(binarized, "nominal")
        except UndefinedAgreementError:
            continue
        if best is None or alpha > best[1]:
            best = (cutoff, alpha)
    if best is None:
        raise UndefinedAgreementError("no binarization cutoff yields a defined alpha")
    return best
