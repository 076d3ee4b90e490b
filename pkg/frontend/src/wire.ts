/** Export/import of annotation files and the client-side rule mirror.
 *
 * The server's validation is authoritative; these checks mirror the same
 * rules so the UI can block obviously invalid commits before POSTing.
 */

import { CATEGORY_NAMES } from "./types.js";
import type {
  AnnotationFile,
  CategoryName,
  SummaryView,
  WireAnnotation,
  WireSpan,
} from "./types.js";
import { isSentenceAligned, sentenceRangeOfSegment } from "./selection.js";

const ANTECEDENT_REQUIRED: ReadonlySet<CategoryName> = new Set(["InconE", "RepE"]);

export function exportAnnotations(
  docId: string,
  annotatorId: string,
  annotations: WireAnnotation[],
  likert?: number,
): AnnotationFile {
  const file: AnnotationFile = {
    schema_version: "1",
    doc_id: docId,
    annotator_id: annotatorId,
    annotations: annotations.map(cloneAnnotation),
  };
  if (likert !== undefined) {
    file.likert = likert;
  }
  return file;
}

function cloneSpan(span: WireSpan): WireSpan {
  return { segment: span.segment, start: span.start, end: span.end };
}

function cloneAnnotation(a: WireAnnotation): WireAnnotation {
  const out: WireAnnotation = {
    category: a.category,
    segment: a.segment,
    start: a.start,
    end: a.end,
  };
  if (a.antecedent !== undefined) {
    out.antecedent = cloneSpan(a.antecedent);
  }
  return out;
}

function parseSpan(raw: unknown, label: string): WireSpan {
  const row = raw as Record<string, unknown>;
  const segment = Number(row["segment"]);
  const start = Number(row["start"]);
  const end = Number(row["end"]);
  if (!Number.isInteger(segment) || segment < 0) {
    throw new Error(`${label}: bad segment index`);
  }
  if (!Number.isInteger(start) || !Number.isInteger(end) || start < 0 || end <= start) {
    throw new Error(`${label}: bad char range [${start}, ${end})`);
  }
  return { segment, start, end };
}

/** Parse an annotation file, rejecting unknown categories and bad spans. */
export function parseAnnotationFile(data: unknown): AnnotationFile {
  const row = data as Record<string, unknown>;
  if (row["schema_version"] !== "1") {
    throw new Error(`unsupported schema_version: ${String(row["schema_version"])}`);
  }
  const docId = String(row["doc_id"] ?? "");
  const annotatorId = String(row["annotator_id"] ?? "");
  if (!docId || !annotatorId) {
    throw new Error("doc_id and annotator_id are required");
  }
  const annotations: WireAnnotation[] = [];
  for (const [i, entry] of ((row["annotations"] as unknown[]) ?? []).entries()) {
    const raw = entry as Record<string, unknown>;
    const category = String(raw["category"]) as CategoryName;
    if (!CATEGORY_NAMES.includes(category)) {
      throw new Error(`annotation ${i}: unknown category ${String(raw["category"])}`);
    }
    const span = parseSpan(raw, `annotation ${i}`);
    const parsed: WireAnnotation = { category, ...span };
    if (raw["antecedent"] !== undefined && raw["antecedent"] !== null) {
      parsed.antecedent = parseSpan(raw["antecedent"], `annotation ${i} antecedent`);
    }
    annotations.push(parsed);
  }
  const file: AnnotationFile = {
    schema_version: "1",
    doc_id: docId,
    annotator_id: annotatorId,
    annotations,
  };
  if (row["likert"] !== undefined && row["likert"] !== null) {
    file.likert = Number(row["likert"]);
  }
  if (row["revision"] !== undefined) {
    file.revision = Number(row["revision"]);
  }
  return file;
}

export function annotationsEqual(a: WireAnnotation, b: WireAnnotation): boolean {
  return JSON.stringify(cloneAnnotation(a)) === JSON.stringify(cloneAnnotation(b));
}

/** Mirror of the server-side rules, for immediate inline feedback. */
export function revalidate(annotation: WireAnnotation, summary: SummaryView): string[] {
  const problems: string[] = [];
  const needsAntecedent = ANTECEDENT_REQUIRED.has(annotation.category);
  if (needsAntecedent && annotation.antecedent === undefined) {
    problems.push(`${annotation.category} requires an antecedent span`);
  }
  if (!needsAntecedent && annotation.antecedent !== undefined) {
    problems.push(`${annotation.category} does not take an antecedent`);
  }
  if (annotation.antecedent !== undefined && annotation.antecedent.segment > annotation.segment) {
    problems.push("antecedent must come from the context or the same segment");
  }
  if (annotation.segment < summary.segments.length) {
    const [lo, hi] = sentenceRangeOfSegment(summary, annotation.segment);
    const segStart = summary.sentences[lo].start;
    const segEnd = summary.sentences[hi - 1].end;
    if (annotation.start < segStart || annotation.end > segEnd) {
      problems.push("span lies outside its segment");
    }
  }
  if (annotation.category === "SceneE") {
    if (!isSentenceAligned(summary.sentences, { start: annotation.start, end: annotation.end })) {
      problems.push("SceneE spans must cover whole sentences");
    }
  }
  return problems;
}
