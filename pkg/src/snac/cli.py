"""Command-line entry points.

Exit codes: 0 success, 2 domain/validation failure (with a machine-readable
JSON error report), 64 usage error. All randomized commands are
deterministic given --seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections import defaultdict
from pathlib import Path
from typing import Sequence

from . import evaluation
from .agreement import (
    best_likert_binarization,
    combine_matrices,
    krippendorff_alpha,
    likert_matrix,
    normalize_overlapping_spans,
    projection_matrix,
    token_matrix,
    two_agree_counts,
)
from .analysis import error_type_distribution, likert_error_correlation
from .annotations import AnnotationSet, aggregate_annotators, validate_set
from .corruption import (
    corrupt_ne_bigram,
    corrupt_repetition,
    corrupt_shuffle,
    extract_named_entities,
    load_ne_file,
    top_bigrams,
)
from .entity_grid import (
    FileRoleProvider,
    HeuristicRoleProvider,
    build_entity_grid,
    estimate_transitions,
    load_model,
    save_model,
    score_document,
)
from .errors import SnacError, UndefinedAgreementError
from .projection import project_labels
from .rouge import ROUGE_CONFIG, rouge
from .serialization import (
    SCHEMA_VERSION,
    dumps_report,
    load_annotation_set,
    load_summary,
    summary_from_dict,
    annotation_set_from_dict,
)
from .synthgen import (
    coref_triples,
    heuristic_mention_chains,
    load_chain_file,
    next_sentence_triples,
    write_triples,
)
from .taxonomy import COHERENCE_CATEGORIES, CategoryGroup, ErrorCategory, parse_category

USAGE_ERROR = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _emit(report: dict, out: str | None) -> None:
    text = dumps_report({"schema_version": SCHEMA_VERSION, **report})
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_text(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _load_summaries_dir(path: str) -> dict:
    docs = {}
    for file in sorted(Path(path).glob("*.json")):
        doc = load_summary(file)
        docs[doc.doc_id] = doc
    if not docs:
        raise SnacError(f"no summary files found under {path}")
    return docs


def _load_annotations_dir(path: str) -> dict[str, list[AnnotationSet]]:
    by_doc: dict[str, list[AnnotationSet]] = defaultdict(list)
    for file in sorted(Path(path).glob("*.json")):
        s = load_annotation_set(file)
        by_doc[s.doc_id].append(s)
    if not by_doc:
        raise SnacError(f"no annotation files found under {path}")
    return dict(by_doc)


def _categories_arg(raw: str | None) -> list[ErrorCategory]:
    if not raw:
        return list(COHERENCE_CATEGORIES)
    return [parse_category(name.strip()) for name in raw.split(",")]


# -- subcommands -----------------------------------------------------------------


def _cmd_validate(args) -> int:
    doc = load_summary(args.summary)
    report_rows = []
    ok = True
    for path in args.annotations:
        s = load_annotation_set(path)
        for index, ann, violation in validate_set(s, doc):
            ok = False
            report_rows.append(
                {
                    "file": str(path),
                    "annotator_id": ann.annotator_id,
                    "index": index,
                    "category": ann.category.value,
                    "code": violation.code,
                    "message": violation.message,
                }
            )
    _emit({"ok": ok, "violations": report_rows}, args.out)
    return 0 if ok else 2


def _cmd_project(args) -> int:
    doc = load_summary(args.summary)
    sets = [load_annotation_set(path) for path in args.annotations]
    source = sets[0] if len(sets) == 1 else aggregate_annotators(sets, doc)
    labels = project_labels(source, doc, args.level, args.scope)
    _emit(
        {
            "doc_id": doc.doc_id,
            "level": args.level,
            "scope": args.scope,
            "has_error": list(labels.labels),
            "y": labels.to_y(),
            "error_units": labels.error_count,
            "units": len(labels.labels),
        },
        args.out,
    )
    return 0


def _agree_token_level(docs, sets_by_doc, categories, normalize):
    report = {}
    for category in categories:
        matrices = []
        num = den = 0
        for doc_id, sets in sorted(sets_by_doc.items()):
            doc = docs.get(doc_id)
            if doc is None or len({a for s in sets for a in s.annotator_ids}) < 2:
                continue
            used = (
                normalize_overlapping_spans(sets, [category], doc)
                if normalize
                else sets
            )
            matrices.append(token_matrix(used, doc, category))
            n, d = two_agree_counts(used, doc, category)
            num, den = num + n, den + d
        entry: dict = {}
        try:
            entry["alpha"] = krippendorff_alpha(combine_matrices(matrices), "nominal")
        except (UndefinedAgreementError, ValueError) as exc:
            entry["alpha"] = None
            entry["alpha_undefined"] = str(exc)
        entry["two_agree"] = 100.0 * num / den if den else None
        report[category.value] = entry
    return report


def _agree_unit_level(docs, sets_by_doc, level):
    report = {}
    for scope in ("coherence", "language"):
        matrices = []
        for doc_id, sets in sorted(sets_by_doc.items()):
            doc = docs.get(doc_id)
            if doc is None or len({a for s in sets for a in s.annotator_ids}) < 2:
                continue
            matrices.append(projection_matrix(sets, doc, level, scope))
        try:
            report[scope] = {
                "alpha": krippendorff_alpha(combine_matrices(matrices), "nominal")
            }
        except (UndefinedAgreementError, ValueError) as exc:
            report[scope] = {"alpha": None, "alpha_undefined": str(exc)}
    return report


def _agree_table(report: dict) -> str:
    rows = [("row", "alpha", "two_agree")]
    for key, entry in sorted(report.items()):
        alpha = entry.get("alpha")
        rows.append(
            (
                key,
                "undefined" if alpha is None else f"{alpha:.4f}",
                ""
                if "two_agree" not in entry
                else (
                    "undefined"
                    if entry["two_agree"] is None
                    else f"{entry['two_agree']:.1f}"
                ),
            )
        )
    widths = [max(len(r[i]) for r in rows) for i in range(3)]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip() for row in rows]
    return "\n".join(lines)


def _cmd_agree(args) -> int:
    docs = _load_summaries_dir(args.summaries)
    sets_by_doc = _load_annotations_dir(args.annotations)
    if args.level == "token":
        body = _agree_token_level(
            docs, sets_by_doc, _categories_arg(args.categories), args.normalize
        )
    elif args.level in ("sentence", "segment"):
        body = _agree_unit_level(docs, sets_by_doc, args.level)
    else:  # summary-level likert
        matrix = likert_matrix(sets_by_doc)
        body = {"likert": {"alpha_interval": krippendorff_alpha(matrix, "interval")}}
        try:
            cutoff, alpha = best_likert_binarization(matrix)
            body["likert"]["binarized"] = {"threshold": cutoff, "alpha": alpha}
        except UndefinedAgreementError as exc:
            body["likert"]["binarized"] = {"undefined": str(exc)}
    _emit({"level": args.level, "agreement": body}, args.out)
    if args.table:
        flat = body if args.level == "token" else {
            k: v for k, v in body.items() if isinstance(v, dict)
        }
        sys.stdout.write(_agree_table(flat) + "\n")
    return 0


def _cmd_stats(args) -> int:
    docs = _load_summaries_dir(args.summaries)
    sets_by_doc = _load_annotations_dir(args.annotations)
    aggregated = [
        aggregate_annotators(sets, docs[doc_id])
        for doc_id, sets in sorted(sets_by_doc.items())
        if doc_id in docs
    ]
    dist = error_type_distribution(aggregated, docs, dataset_id=args.dataset_id)
    body: dict = {
        "dataset_id": dist.dataset_id,
        "summaries": dist.summary_count,
        "unique_counts": {c.value: n for c, n in sorted(dist.unique_counts.items())},
        "unique_fraction": {
            c.value: f for c, f in sorted(dist.unique_fraction.items())
        },
        "token_fraction": {c.value: f for c, f in sorted(dist.token_fraction.items())},
    }

    observations = []
    for doc_id, sets in sorted(sets_by_doc.items()):
        doc = docs.get(doc_id)
        if doc is None:
            continue
        for s in sets:
            for annotator in sorted(s.annotator_ids):
                if annotator not in s.likert:
                    continue
                counts: dict[ErrorCategory, int] = defaultdict(int)
                for ann in s.by_annotator(annotator):
                    counts[ann.category] += 1
                observations.append((dict(counts), s.likert[annotator]))
    if len(observations) >= 3:
        correlation = likert_error_correlation(observations)
        body["likert_correlation"] = {
            key: {"r": res.r, "p_value": res.p_value, "n": res.n}
            for key, res in sorted(correlation.results.items())
        }
        if correlation.skipped:
            body["likert_correlation_skipped"] = dict(sorted(correlation.skipped.items()))

    if args.csv:
        lines = ["category,unique_count,unique_fraction,token_fraction"]
        for category in ErrorCategory:
            lines.append(
                f"{category.value},{dist.unique_counts.get(category, 0)},"
                f"{dist.unique_fraction.get(category, 0.0)},"
                f"{dist.token_fraction.get(category, 0.0)}"
            )
        Path(args.csv).write_text("\n".join(lines) + "\n", encoding="utf-8")
    _emit(body, args.out)
    return 0


def _cmd_corrupt(args) -> int:
    doc = load_summary(args.summary)
    kind = args.kind.replace("-", "_")
    if kind == "shuffle":
        text = corrupt_shuffle(doc, args.seed)
    elif kind == "repetition":
        text = corrupt_repetition(doc, args.seed, args.repeat_fraction)
    else:
        if args.bigrams_file:
            bigrams = [tuple(b) for b in json.loads(Path(args.bigrams_file).read_text())]
        elif args.corpus:
            corpus_docs = _load_summaries_dir(args.corpus)
            bigrams = top_bigrams([d.text for d in corpus_docs.values()], args.bigram_k)
        else:
            raise SnacError("ne-bigram corruption needs --corpus or --bigrams-file")
        spans = load_ne_file(args.ne_file) if args.ne_file else extract_named_entities(doc)
        text = corrupt_ne_bigram(doc, bigrams, spans)
    _emit_text(text, args.out)
    return 0


def _cmd_rouge(args) -> int:
    candidate = Path(args.candidate).read_text(encoding="utf-8")
    reference = Path(args.reference).read_text(encoding="utf-8")
    variants = ("R1", "R2", "RL") if args.variant == "all" else (args.variant,)
    scores = {}
    for variant in variants:
        s = rouge(candidate, reference, variant)
        scores[variant] = {
            "precision": s.precision,
            "recall": s.recall,
            "f1": s.f1,
            "degenerate": s.degenerate,
        }
    _emit({"rouge": scores, "config": ROUGE_CONFIG}, args.out)
    return 0


def _cmd_synthgen(args) -> int:
    docs = _load_summaries_dir(args.summaries)
    chains_by_doc = {}
    if args.chains:
        for file in sorted(Path(args.chains).glob("*.json")):
            chains = load_chain_file(file)
            if chains:
                chains_by_doc[chains[0].doc_id] = chains
    triples = []
    for doc_id, doc in sorted(docs.items()):
        if args.method == "coref":
            chains = chains_by_doc.get(doc_id) or heuristic_mention_chains(doc)
            triples.extend(
                coref_triples(doc, chains, max_per_doc=args.max_per_doc, seed=args.seed)
            )
        else:
            triples.extend(
                next_sentence_triples(doc, args.seed, max_per_doc=args.max_per_doc)
            )
    write_triples(triples, args.out)
    _emit(
        {
            "method": args.method,
            "seed": args.seed,
            "documents": len(docs),
            "triples": len(triples),
            "positives": sum(1 for t in triples if not t.has_error),
            "negatives": sum(1 for t in triples if t.has_error),
            "out": str(args.out),
        },
        None,
    )
    return 0


def _cmd_grid(args) -> int:
    provider = (
        FileRoleProvider(args.roles)
        if args.roles and not Path(args.roles).is_dir()
        else HeuristicRoleProvider()
    )
    if args.model:
        if not args.score_summaries:
            raise SnacError("grid scoring needs --score-summaries")
        model = load_model(args.model)
        docs = _load_summaries_dir(args.score_summaries)
        with open(args.out, "w", encoding="utf-8") as fh:
            for doc_id, doc in sorted(docs.items()):
                doc_provider = (
                    FileRoleProvider(Path(args.roles) / f"{doc_id}.json")
                    if args.roles and Path(args.roles).is_dir()
                    else provider
                )
                for i, score in enumerate(score_document(doc, model, doc_provider), start=1):
                    fh.write(
                        json.dumps(
                            {
                                "doc_id": doc_id,
                                "sentence_index": i,
                                "score": score.value,
                                "uninformative": score.uninformative,
                            }
                        )
                        + "\n"
                    )
        return 0
    if not args.summaries:
        raise SnacError("grid training needs --summaries")
    docs = _load_summaries_dir(args.summaries)
    grids = []
    for doc_id, doc in sorted(docs.items()):
        doc_provider = (
            FileRoleProvider(Path(args.roles) / f"{doc_id}.json")
            if args.roles and Path(args.roles).is_dir()
            else provider
        )
        grids.append(build_entity_grid(doc, doc_provider))
    model = estimate_transitions(grids, smoothing=args.smoothing, corpus_id=args.summaries)
    save_model(model, args.out)
    _emit({"grids": len(grids), "smoothing": args.smoothing, "out": str(args.out)}, None)
    return 0


def _load_gold_bundle(args):
    if args.gold:
        data = json.loads(Path(args.gold).read_text(encoding="utf-8"))
        docs = {}
        for row in data["documents"]:
            doc = summary_from_dict(row, path=args.gold)
            docs[doc.doc_id] = doc
        sets_by_doc: dict[str, list[AnnotationSet]] = defaultdict(list)
        for row in data["annotation_sets"]:
            s = annotation_set_from_dict(row, path=args.gold)
            sets_by_doc[s.doc_id].append(s)
        return docs, dict(sets_by_doc)
    if args.summaries and args.annotations:
        return _load_summaries_dir(args.summaries), _load_annotations_dir(args.annotations)
    raise SnacError("eval needs --gold or both --summaries and --annotations")


def _cmd_eval(args) -> int:
    docs, sets_by_doc = _load_gold_bundle(args)
    if args.k is not None:
        aggregated = evaluation.reconstruct_eval_subset(
            sets_by_doc, docs, k=args.k, seed=args.seed
        )
    else:
        aggregated = {
            doc_id: aggregate_annotators(sets, docs[doc_id])
            for doc_id, sets in sorted(sets_by_doc.items())
            if doc_id in docs
        }
    gold = []
    for doc_id in sorted(aggregated):
        gold.extend(evaluation.build_gold(aggregated[doc_id], docs[doc_id]))
    preds = evaluation.load_predictions(args.preds, invert_scores=args.invert_scores)

    config = {
        "task": args.task,
        "preds": str(args.preds),
        "k": args.k,
        "seed": args.seed,
        "invert_scores": args.invert_scores,
    }
    if args.task == "binary":
        m = evaluation.binary_metrics(preds, gold, threshold=args.threshold)
        body = {
            "precision": m.precision,
            "recall": m.recall,
            "f1": m.f1,
            "counts": {"tp": m.tp, "fp": m.fp, "fn": m.fn, "tn": m.tn},
            "precision_defined": m.precision_defined,
        }
        config["threshold"] = args.threshold
    elif args.task == "roc":
        result = evaluation.roc_curve(preds, gold)
        body = {
            "auc": result.auc,
            "points": [list(p) for p in result.points],
            "thresholds": list(result.thresholds),
        }
    elif args.task == "fine":
        categories = (
            [parse_category(args.category)] if args.category else list(COHERENCE_CATEGORIES)
        )
        body = {}
        for category in categories:
            m = evaluation.finegrained_metrics(preds, gold, category, docs)
            body[category.value] = {
                "precision": m.precision,
                "recall": m.recall,
                "f1": m.f1,
                "overlap": m.overlap_fraction,
                "counts": {"tp": m.tp, "fp": m.fp, "fn": m.fn},
                "precision_defined": m.precision_defined,
                "overlap_defined": m.overlap_defined,
            }
    else:  # rap
        result = evaluation.recall_at_precision(preds, gold, args.target_precision)
        body = {
            "target_precision": result.target_precision,
            "threshold": result.threshold,
            "achieved_precision": result.achieved_precision,
            "recall": {c.value: r for c, r in sorted(result.per_category.items())},
            "overall_recall": result.overall,
        }
        config["target_precision"] = args.target_precision
    _emit({"task": args.task, "metrics": body, "config": config}, args.out)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    data_dir = args.data_dir or os.environ.get("SNAC_DATA_DIR")
    if not data_dir:
        raise SnacError("serve needs --data-dir or SNAC_DATA_DIR")
    app = create_app(data_dir, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


# -- parser ------------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="snac", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate annotation files against a summary")
    p.add_argument("--summary", required=True)
    p.add_argument("--annotations", nargs="+", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("project", help="project spans to binary unit labels")
    p.add_argument("--summary", required=True)
    p.add_argument("--annotations", nargs="+", required=True)
    p.add_argument("--level", choices=["sentence", "segment"], default="sentence")
    p.add_argument("--scope", choices=["coherence", "language", "all"], default="coherence")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_project)

    p = sub.add_parser("agree", help="inter-annotator agreement report")
    p.add_argument("--summaries", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument(
        "--level", choices=["token", "sentence", "segment", "summary"], default="sentence"
    )
    p.add_argument("--categories", help="comma-separated categories for token level")
    p.add_argument("--normalize", action="store_true",
                   help="union-normalize overlapping spans before token-level metrics")
    p.add_argument("--table", action="store_true", help="also print an aligned text table")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_agree)

    p = sub.add_parser("stats", help="error distributions and Likert correlations")
    p.add_argument("--summaries", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--dataset-id", default="")
    p.add_argument("--csv")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("corrupt", help="apply a corruption baseline to a summary")
    p.add_argument("--kind", choices=["shuffle", "repetition", "ne-bigram"], required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--summary", required=True)
    p.add_argument("--repeat-fraction", type=float, default=0.5)
    p.add_argument("--corpus", help="summary dir for top-bigram extraction")
    p.add_argument("--bigrams-file", help="precomputed bigram JSON list")
    p.add_argument("--bigram-k", type=int, default=200)
    p.add_argument("--ne-file", help="NE span file overriding the heuristic")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_corrupt)

    p = sub.add_parser("rouge", help="score candidate against reference")
    p.add_argument("--candidate", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--variant", choices=["R1", "R2", "RL", "all"], default="all")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_rouge)

    p = sub.add_parser("synthgen", help="generate synthetic coherence training triples")
    p.add_argument("--method", choices=["coref", "nextsent"], required=True)
    p.add_argument("--summaries", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--chains", help="dir of coref chain files (overrides heuristic)")
    p.add_argument("--max-per-doc", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synthgen)

    p = sub.add_parser("grid", help="train or apply an entity-grid transition model")
    p.add_argument("--summaries", help="training summaries (train mode)")
    p.add_argument("--roles", help="role file or dir of per-doc role files")
    p.add_argument("--smoothing", type=float, default=1.0)
    p.add_argument("--model", help="existing model (score mode)")
    p.add_argument("--score-summaries", help="summaries to score (score mode)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_grid)

    p = sub.add_parser("eval", help="score detector predictions against gold")
    p.add_argument("--preds", required=True)
    p.add_argument("--gold", help="gold bundle JSON (documents + annotation_sets)")
    p.add_argument("--summaries", help="alternative to --gold: summary dir")
    p.add_argument("--annotations", help="alternative to --gold: annotation dir")
    p.add_argument("--task", choices=["binary", "roc", "fine", "rap"], required=True)
    p.add_argument("--threshold", type=float)
    p.add_argument("--category")
    p.add_argument("--target-precision", type=float, default=0.7)
    p.add_argument("--k", type=int, help="reconstruct gold from k annotators per doc")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--invert-scores", action="store_true",
                   help="negate scores on ingestion (entity-grid / LM convention)")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--data-dir")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8470)
    p.add_argument("--ui", help="built frontend dir to serve at /")
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = args.func(args)
    except (SnacError, ValueError, OSError, KeyError) as exc:
        report = dumps_report(
            {
                "schema_version": SCHEMA_VERSION,
                "error": str(exc),
                "type": type(exc).__name__,
            }
        )
        sys.stdout.write(report)
        return 2
    return code


if __name__ == "__main__":
    raise SystemExit(main())
