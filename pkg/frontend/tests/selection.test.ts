import { describe, expect, it } from "vitest";

import {
  buildAnnotation,
  charRangeFromTokens,
  commitBlocker,
  emptyPending,
  isSentenceAligned,
  segmentOfPosition,
  sentenceRangeOfSegment,
  snapToSentences,
  snapToTokens,
  withAntecedent,
  withCategory,
  withSpan,
} from "../src/selection.js";
import type { CategoryInfo, SummaryView } from "../src/types.js";

// "Alpha one two. Beta three four. Gamma five six. Delta seven."
// sentences: [0,14) [15,31) [32,47) [48,60), segments [2, 4].
const summary: SummaryView = {
  doc_id: "doc-1",
  system_id: "test",
  text: "Alpha one two. Beta three four. Gamma five six. Delta seven.",
  sentences: [
    { start: 0, end: 14 },
    { start: 15, end: 31 },
    { start: 32, end: 47 },
    { start: 48, end: 60 },
  ],
  segments: [2, 4],
  tokens: [
    [
      { start: 0, end: 5 },
      { start: 6, end: 9 },
      { start: 10, end: 13 },
      { start: 13, end: 14 },
    ],
    [
      { start: 15, end: 19 },
      { start: 20, end: 25 },
      { start: 26, end: 30 },
      { start: 30, end: 31 },
    ],
    [
      { start: 32, end: 37 },
      { start: 38, end: 42 },
      { start: 43, end: 46 },
      { start: 46, end: 47 },
    ],
    [
      { start: 48, end: 53 },
      { start: 54, end: 59 },
      { start: 59, end: 60 },
    ],
  ],
  current_segment: 1,
  segment_count: 2,
  status: "in_progress",
};

const categories: Record<string, CategoryInfo> = {
  CharE: {
    name: "CharE",
    group: "coherence",
    display_name: "New Person not Introduced",
    requires_antecedent: false,
    whole_sentence: false,
  },
  SceneE: {
    name: "SceneE",
    group: "coherence",
    display_name: "Abrupt Transition from the Previous Scene",
    requires_antecedent: false,
    whole_sentence: true,
  },
  InconE: {
    name: "InconE",
    group: "coherence",
    display_name: "Inconsistent",
    requires_antecedent: true,
    whole_sentence: false,
  },
  RepE: {
    name: "RepE",
    group: "language",
    display_name: "Repetition",
    requires_antecedent: true,
    whole_sentence: false,
  },
};

describe("token and sentence snapping", () => {
  it("computes char ranges from token indices in either order", () => {
    const tokens = summary.tokens[0];
    expect(charRangeFromTokens(tokens, 1, 2)).toEqual({ start: 6, end: 13 });
    expect(charRangeFromTokens(tokens, 2, 1)).toEqual({ start: 6, end: 13 });
    expect(() => charRangeFromTokens(tokens, 0, 99)).toThrow();
  });

  it("snaps raw char ranges to token boundaries", () => {
    const tokens = summary.tokens.flat();
    expect(snapToTokens(tokens, { start: 7, end: 11 })).toEqual({ start: 6, end: 13 });
    expect(snapToTokens(tokens, { start: 14, end: 15 })).toBeNull(); // gap only
  });

  it("expands mid-sentence selections to whole sentences", () => {
    expect(snapToSentences(summary.sentences, { start: 20, end: 23 })).toEqual({
      start: 15,
      end: 31,
    });
    expect(snapToSentences(summary.sentences, { start: 28, end: 40 })).toEqual({
      start: 15,
      end: 47,
    });
  });

  it("recognizes sentence-aligned ranges", () => {
    expect(isSentenceAligned(summary.sentences, { start: 15, end: 31 })).toBe(true);
    expect(isSentenceAligned(summary.sentences, { start: 15, end: 47 })).toBe(true);
    expect(isSentenceAligned(summary.sentences, { start: 16, end: 31 })).toBe(false);
  });

  it("maps positions and segments", () => {
    expect(segmentOfPosition(summary, 0)).toBe(0);
    expect(segmentOfPosition(summary, 33)).toBe(1);
    expect(sentenceRangeOfSegment(summary, 0)).toEqual([0, 2]);
    expect(sentenceRangeOfSegment(summary, 1)).toEqual([2, 4]);
  });
});

describe("commit guards", () => {
  it("requires a span and a category", () => {
    let state = emptyPending();
    expect(commitBlocker(state)).toMatch(/span/);
    state = withSpan(state, { start: 32, end: 37 });
    expect(commitBlocker(state)).toMatch(/category/);
    state = withCategory(state, categories.CharE, summary.sentences);
    expect(commitBlocker(state)).toBeNull();
  });

  it("blocks InconE and RepE until an antecedent is chosen", () => {
    for (const name of ["InconE", "RepE"] as const) {
      let state = withSpan(emptyPending(), { start: 38, end: 42 });
      state = withCategory(state, categories[name], summary.sentences);
      expect(state.mode).toBe("antecedent");
      expect(commitBlocker(state)).toMatch(/earlier span/);
      expect(buildAnnotation(state, summary)).toBeNull();
      state = withAntecedent(state, { start: 6, end: 13 });
      expect(commitBlocker(state)).toBeNull();
      const record = buildAnnotation(state, summary);
      expect(record?.antecedent).toEqual({ segment: 0, start: 6, end: 13 });
    }
  });

  it("snaps SceneE selections to whole sentences", () => {
    let state = withSpan(emptyPending(), { start: 38, end: 42 }); // mid-sentence
    state = withCategory(state, categories.SceneE, summary.sentences);
    const record = buildAnnotation(state, summary);
    expect(record).not.toBeNull();
    expect(record!.start).toBe(32);
    expect(record!.end).toBe(47);
    expect(isSentenceAligned(summary.sentences, record!)).toBe(true);
  });

  it("fills segment indices from the span position", () => {
    let state = withSpan(emptyPending(), { start: 48, end: 53 });
    state = withCategory(state, categories.CharE, summary.sentences);
    const record = buildAnnotation(state, summary);
    expect(record?.segment).toBe(1);
  });
});
