"""Descriptive statistics over aggregated annotation sets."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from scipy import stats

from .annotations import AggregatedSet
from .documents import SummaryDocument
from .errors import UndefinedCorrelationError, UndefinedDistributionError
from .taxonomy import CategoryGroup, ErrorCategory


@dataclass(frozen=True)
class ErrorDistribution:
    """Per-category share of unique errors and of covered tokens.

    Unique-error fractions count each aggregated record once, regardless of
    how many annotators supported it. Token fractions are computed per
    summary (covered tokens of the category / summary token count) and then
    macro-averaged across summaries.
    """

    dataset_id: str
    unique_counts: Mapping[ErrorCategory, int]
    unique_fraction: Mapping[ErrorCategory, float]
    token_fraction: Mapping[ErrorCategory, float]
    summary_count: int

    def __post_init__(self) -> None:
        total = sum(self.unique_fraction.values())
        if self.unique_fraction and abs(total - 1.0) > 1e-9:
            raise ValueError(f"unique-error fractions must sum to 1, got {total}")
        for cat, frac in self.token_fraction.items():
            if not 0.0 <= frac <= 1.0:
                raise ValueError(f"token fraction for {cat.value} outside [0, 1]")


def error_type_distribution(
    sets: Sequence[AggregatedSet],
    docs: Mapping[str, SummaryDocument],
    dataset_id: str = "",
) -> ErrorDistribution:
    """Fractions of unique errors and of covered tokens, per category."""
    counts: Counter[ErrorCategory] = Counter()
    token_shares: dict[ErrorCategory, list[float]] = defaultdict(list)
    n_summaries = 0
    for s in sets:
        doc = docs.get(s.doc_id)
        if doc is None:
            raise KeyError(f"no document for {s.doc_id!r}")
        n_summaries += 1
        covered: dict[ErrorCategory, set[int]] = defaultdict(set)
        for ann in s.annotations:
            counts[ann.category] += 1
            covered[ann.category] |= doc.token_indices_in_range(
                ann.span.start, ann.span.end
            )
        total_tokens = doc.token_count
        for category in ErrorCategory:
            token_shares[category].append(len(covered[category]) / total_tokens)

    total = sum(counts.values())
    if total == 0:
        raise UndefinedDistributionError(
            "no annotations present; error distribution is undefined"
        )
    unique_fraction = {cat: counts[cat] / total for cat in counts}
    token_fraction = {
        cat: sum(shares) / len(shares)
        for cat, shares in token_shares.items()
        if any(shares)
    }
    return ErrorDistribution(
        dataset_id=dataset_id,
        unique_counts=dict(counts),
        unique_fraction=unique_fraction,
        token_fraction=token_fraction,
        summary_count=n_summaries,
    )


# -- error-count vs Likert correlation -------------------------------------------


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    p_value: float
    n: int


CountObservation = tuple[Mapping[ErrorCategory, int], int]


def pearson_correlation(xs: Sequence[float], ys: Sequence[float]) -> CorrelationResult:
    """Pearson r with a two-tailed p-value from the t distribution (n-2 dof)."""
    if len(xs) != len(ys):
        raise ValueError("paired vectors must have equal length")
    if len(xs) < 3:
        raise ValueError(f"need at least 3 paired observations, got {len(xs)}")
    if len(set(xs)) < 2 or len(set(ys)) < 2:
        raise UndefinedCorrelationError("zero variance in one of the vectors")
    result = stats.pearsonr(xs, ys)
    return CorrelationResult(float(result.statistic), float(result.pvalue), len(xs))


@dataclass(frozen=True)
class CorrelationReport:
    """Per-category/group/total Pearson correlations against Likert scores."""

    results: Mapping[str, CorrelationResult]
    skipped: Mapping[str, str] = field(default_factory=dict)


def likert_error_correlation(
    observations: Sequence[CountObservation],
) -> CorrelationReport:
    """Correlate per-annotator error counts with the same annotator's rating.

    Each observation pairs one annotator's category counts on one summary
    with that annotator's own 1-5 coherence score for the summary. Keys with
    undefined correlation (zero variance) are reported as skipped rather
    than failing the whole report.
    """
    if len(observations) < 3:
        raise ValueError("need at least 3 paired observations")
    likert = [float(score) for _, score in observations]

    vectors: dict[str, list[float]] = {}
    for category in ErrorCategory:
        vectors[category.value] = [
            float(counts.get(category, 0)) for counts, _ in observations
        ]
    for group in CategoryGroup:
        vectors[group.value] = [
            float(
                sum(v for c, v in counts.items() if c.group is group)
            )
            for counts, _ in observations
        ]
    vectors["total"] = [float(sum(counts.values())) for counts, _ in observations]

    results: dict[str, CorrelationResult] = {}
    skipped: dict[str, str] = {}
    for key, xs in vectors.items():
        try:
            results[key] = pearson_correlation(xs, likert)
        except UndefinedCorrelationError as exc:
            skipped[key] = str(exc)
    return CorrelationReport(results, skipped)
