/** Pure selection logic: token snapping, sentence snapping, commit guards.
 *
 * Everything here is deterministic over plain data so it can be tested
 * without a DOM; the app layer only translates mouse events into calls.
 */

import type { CategoryInfo, CharRange, SummaryView, WireAnnotation } from "./types.js";

/** Char range covered by an inclusive token index range within one sentence list. */
export function charRangeFromTokens(
  tokens: CharRange[],
  firstIndex: number,
  lastIndex: number,
): CharRange {
  if (firstIndex > lastIndex) {
    [firstIndex, lastIndex] = [lastIndex, firstIndex];
  }
  if (firstIndex < 0 || lastIndex >= tokens.length) {
    throw new Error(`token index out of range: ${firstIndex}..${lastIndex}`);
  }
  return { start: tokens[firstIndex].start, end: tokens[lastIndex].end };
}

/** Expand an arbitrary char range to the token boundaries it touches. */
export function snapToTokens(tokens: CharRange[], range: CharRange): CharRange | null {
  const touched = tokens.filter((t) => t.start < range.end && range.start < t.end);
  if (touched.length === 0) {
    return null;
  }
  return { start: touched[0].start, end: touched[touched.length - 1].end };
}

/** Expand a char range to cover every sentence it intersects, whole. */
export function snapToSentences(sentences: CharRange[], range: CharRange): CharRange | null {
  const touched = sentences.filter((s) => s.start < range.end && range.start < s.end);
  if (touched.length === 0) {
    return null;
  }
  return { start: touched[0].start, end: touched[touched.length - 1].end };
}

export function isSentenceAligned(sentences: CharRange[], range: CharRange): boolean {
  return (
    sentences.some((s) => s.start === range.start) &&
    sentences.some((s) => s.end === range.end)
  );
}

/** Segment index of a char position, from cumulative segment boundaries. */
export function segmentOfPosition(summary: SummaryView, position: number): number {
  for (let seg = 0; seg < summary.segments.length; seg++) {
    const lastSentence = summary.segments[seg] - 1;
    if (position < summary.sentences[lastSentence].end + 1) {
      return seg;
    }
  }
  return summary.segments.length - 1;
}

export interface PendingAnnotation {
  span: CharRange | null;
  category: CategoryInfo | null;
  antecedent: CharRange | null;
  mode: "span" | "antecedent";
}

export function emptyPending(): PendingAnnotation {
  return { span: null, category: null, antecedent: null, mode: "span" };
}

export function withSpan(state: PendingAnnotation, span: CharRange): PendingAnnotation {
  return { ...state, span };
}

/** Choosing a category may re-snap the span and switches to antecedent mode
 * when the category demands one. */
export function withCategory(
  state: PendingAnnotation,
  category: CategoryInfo,
  sentences: CharRange[],
): PendingAnnotation {
  let span = state.span;
  if (span !== null && category.whole_sentence) {
    span = snapToSentences(sentences, span);
  }
  return {
    ...state,
    span,
    category,
    mode: category.requires_antecedent && state.antecedent === null ? "antecedent" : "span",
  };
}

export function withAntecedent(
  state: PendingAnnotation,
  antecedent: CharRange,
): PendingAnnotation {
  return { ...state, antecedent, mode: "span" };
}

/** A highlight cannot be committed without a category; InconE/RepE also
 * need an antecedent chosen from the context or the current segment. */
export function commitBlocker(state: PendingAnnotation): string | null {
  if (state.span === null) {
    return "select an error span first";
  }
  if (state.category === null) {
    return "choose an error category";
  }
  if (state.category.requires_antecedent && state.antecedent === null) {
    return `${state.category.display_name} needs the earlier span it refers to`;
  }
  return null;
}

/** Build the wire record for a committed highlight; null when blocked. */
export function buildAnnotation(
  state: PendingAnnotation,
  summary: SummaryView,
): WireAnnotation | null {
  if (commitBlocker(state) !== null || state.span === null || state.category === null) {
    return null;
  }
  let span = state.span;
  if (state.category.whole_sentence) {
    const snapped = snapToSentences(summary.sentences, span);
    if (snapped === null) {
      return null;
    }
    span = snapped;
  }
  const record: WireAnnotation = {
    category: state.category.name,
    segment: segmentOfPosition(summary, span.start),
    start: span.start,
    end: span.end,
  };
  if (state.category.requires_antecedent && state.antecedent !== null) {
    record.antecedent = {
      segment: segmentOfPosition(summary, state.antecedent.start),
      start: state.antecedent.start,
      end: state.antecedent.end,
    };
  }
  return record;
}

/** Sentence indices (into the visible list) belonging to a segment. */
export function sentenceRangeOfSegment(summary: SummaryView, segment: number): [number, number] {
  const lo = segment > 0 ? summary.segments[segment - 1] : 0;
  return [lo, summary.segments[segment]];
}
