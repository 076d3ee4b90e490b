"""Span-level narrative coherence annotation and evaluation toolkit."""

from .agreement import (
    RatingMatrix,
    best_likert_binarization,
    combine_matrices,
    krippendorff_alpha,
    likert_matrix,
    normalize_overlapping_spans,
    projection_matrix,
    token_matrix,
    two_agree,
    two_agree_counts,
)
from .analysis import (
    CorrelationReport,
    ErrorDistribution,
    error_type_distribution,
    likert_error_correlation,
    pearson_correlation,
)
from .annotations import (
    AggregatedAnnotation,
    AggregatedSet,
    AnnotationSet,
    ErrorAnnotation,
    Violation,
    aggregate_annotators,
    validate_annotation,
    validate_set,
)
from .corruption import (
    CorruptionRecipe,
    NamedEntitySpan,
    corrupt_ne_bigram,
    corrupt_repetition,
    corrupt_shuffle,
    extract_named_entities,
    top_bigrams,
)
from .documents import (
    Sentence,
    Span,
    SummaryDocument,
    document_from_raw_text,
    document_from_sentences,
    segment_summary,
    tokenize,
)
from .entity_grid import (
    EntityGrid,
    FileRoleProvider,
    GridScore,
    HeuristicRoleProvider,
    TransitionModel,
    build_entity_grid,
    entity_grid_score,
    estimate_transitions,
    score_document,
)
from .evaluation import (
    BinaryMetrics,
    FineEntry,
    FineMetrics,
    GoldError,
    GoldSentence,
    PredictionRecord,
    RecallAtPrecision,
    RocResult,
    binary_metrics,
    build_gold,
    finegrained_metrics,
    human_as_predictor,
    recall_at_precision,
    reconstruct_eval_subset,
    roc_curve,
)
from .projection import ProjectedLabels, project_labels
from .rouge import RougeScore, corpus_rouge, rouge
from .synthgen import (
    MentionChain,
    TrainingTriple,
    coref_triples,
    heuristic_mention_chains,
    next_sentence_triples,
)
from .taxonomy import CategoryGroup, ErrorCategory, parse_category
from .thresholds import ThresholdConfig, lm_conditional_scores, select_threshold

__version__ = "0.1.0"
