"""Externally produced LM probabilities and dev-set threshold selection.

The language model itself is out of scope; its conditional probabilities
P(sentence | context) arrive through a JSON-lines score file. Both the LM
and entity-grid scorers share one decision rule: predict an error when
score < tau, with tau chosen on a dev set.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Mapping, Sequence

from .errors import CompletenessError, SchemaError, SingleClassError
from .projection import ProjectedLabels

Criterion = Literal["max_f1", "max_accuracy"]

ScoreKey = tuple[str, int]


@dataclass(frozen=True)
class ThresholdConfig:
    value: float
    criterion: Criterion
    source: str
    criterion_value: float
    degenerate: bool = False

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise ValueError("threshold must be finite")

    def predict_error(self, score: float) -> bool:
        return score < self.value


def lm_conditional_scores(path: str | Path) -> dict[ScoreKey, float]:
    """Load {doc_id, sentence_index, logprob|prob} JSON lines into probabilities.

    Log-space inputs are converted; probabilities must land in (0, 1] and
    log-probabilities must be <= 0. Duplicate (doc, sentence) keys are errors.
    """
    scores: dict[ScoreKey, float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                key = (str(row["doc_id"]), int(row["sentence_index"]))
                if "logprob" in row:
                    logprob = float(row["logprob"])
                    if logprob > 0:
                        raise ValueError(f"log-probability {logprob} is > 0")
                    prob = math.exp(logprob)
                elif "prob" in row:
                    prob = float(row["prob"])
                else:
                    raise ValueError("need a 'logprob' or 'prob' field")
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise SchemaError(
                    f"malformed score line: {exc}", path=str(path), line=lineno
                ) from exc
            if not 0.0 < prob <= 1.0:
                raise SchemaError(
                    f"probability {prob} outside (0, 1]", path=str(path), line=lineno
                )
            if key in scores:
                raise SchemaError(
                    f"duplicate score for {key}", path=str(path), line=lineno
                )
            scores[key] = prob
    return scores


def ensure_complete(scores: Mapping[ScoreKey, float], required: Sequence[ScoreKey]) -> None:
    missing = [key for key in required if key not in scores]
    if missing:
        raise CompletenessError("score file is missing sentences", missing)


def select_threshold(
    scores: Sequence[float],
    labels: Sequence[bool] | ProjectedLabels,
    criterion: Criterion = "max_f1",
    source: str = "dev",
) -> ThresholdConfig:
    """Pick tau maximizing the criterion under the rule score < tau => error.

    Candidates are the midpoints between sorted distinct scores, plus the two
    extremes that realize predict-none and predict-all, so every achievable
    classification is considered. Ties resolve to the smallest tau. With all
    scores identical the result is flagged degenerate.
    """
    if isinstance(labels, ProjectedLabels):
        labels = labels.labels
    if len(scores) != len(labels):
        raise ValueError("scores and labels must be aligned")
    if not scores:
        raise ValueError("empty dev set")
    if criterion not in ("max_f1", "max_accuracy"):
        raise ValueError(f"unknown criterion: {criterion!r}")
    flags = [bool(v) for v in labels]
    if len(set(flags)) < 2:
        raise SingleClassError("dev set contains a single class")

    distinct = sorted(set(float(s) for s in scores))
    degenerate = len(distinct) == 1
    candidates = [distinct[0]]  # nothing strictly below the minimum: predict none
    candidates += [(a + b) / 2.0 for a, b in zip(distinct, distinct[1:])]
    candidates.append(distinct[-1] + 1.0)  # everything below: predict all

    best: tuple[float, float] | None = None  # (criterion value, tau)
    for tau in candidates:
        value = _criterion_value(scores, flags, tau, criterion)
        if best is None or value > best[0] or (value == best[0] and tau < best[1]):
            best = (value, tau)
    assert best is not None
    return ThresholdConfig(
        value=best[1],
        criterion=criterion,
        source=source,
        criterion_value=best[0],
        degenerate=degenerate,
    )


def _criterion_value(
    scores: Sequence[float], labels: Sequence[bool], tau: float, criterion: Criterion
) -> float:
    tp = fp = fn = tn = 0
    for score, has_error in zip(scores, labels):
        predicted = score < tau
        if predicted and has_error:
            tp += 1
        elif predicted:
            fp += 1
        elif has_error:
            fn += 1
        else:
            tn += 1
    if criterion == "max_accuracy":
        return (tp + tn) / len(scores)
    denominator = 2 * tp + fp + fn
    return 2 * tp / denominator if denominator else 0.0
