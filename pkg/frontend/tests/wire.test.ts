import { describe, expect, it } from "vitest";

import { annotationsEqual, exportAnnotations, parseAnnotationFile, revalidate } from "../src/wire.js";
import type { SummaryView, WireAnnotation } from "../src/types.js";

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
  tokens: [[], [], [], []],
  current_segment: 1,
  segment_count: 2,
  status: "in_progress",
};

const annotations: WireAnnotation[] = [
  { category: "CharE", segment: 0, start: 0, end: 5 },
  {
    category: "RepE",
    segment: 1,
    start: 32,
    end: 37,
    antecedent: { segment: 0, start: 0, end: 5 },
  },
  { category: "SceneE", segment: 1, start: 32, end: 47 },
];

describe("annotation file round-trip", () => {
  it("export -> serialize -> parse is lossless", () => {
    const file = exportAnnotations("doc-1", "w1", annotations, 4);
    const parsed = parseAnnotationFile(JSON.parse(JSON.stringify(file)));
    expect(parsed).toEqual(file);
    expect(parsed.annotations.length).toBe(annotations.length);
    parsed.annotations.forEach((a, i) => {
      expect(annotationsEqual(a, annotations[i])).toBe(true);
    });
  });

  it("re-imported annotations still validate", () => {
    const file = exportAnnotations("doc-1", "w1", annotations);
    const parsed = parseAnnotationFile(JSON.parse(JSON.stringify(file)));
    for (const a of parsed.annotations) {
      expect(revalidate(a, summary)).toEqual([]);
    }
  });

  it("rejects unknown categories", () => {
    const file = exportAnnotations("doc-1", "w1", annotations);
    const raw = JSON.parse(JSON.stringify(file));
    raw.annotations[0].category = "MadeUpE";
    expect(() => parseAnnotationFile(raw)).toThrow(/unknown category/);
  });

  it("rejects bad schema versions and malformed spans", () => {
    expect(() => parseAnnotationFile({ schema_version: "7" })).toThrow(/schema_version/);
    const raw = JSON.parse(JSON.stringify(exportAnnotations("doc-1", "w1", annotations)));
    raw.annotations[0].end = raw.annotations[0].start;
    expect(() => parseAnnotationFile(raw)).toThrow(/char range/);
  });

  it("keeps server-assigned revisions when present", () => {
    const raw = JSON.parse(JSON.stringify(exportAnnotations("doc-1", "w1", [])));
    raw.revision = 3;
    expect(parseAnnotationFile(raw).revision).toBe(3);
  });
});

describe("client-side rule mirror", () => {
  it("flags missing antecedents on InconE and RepE", () => {
    const bare: WireAnnotation = { category: "InconE", segment: 1, start: 32, end: 37 };
    expect(revalidate(bare, summary).join(" ")).toMatch(/antecedent/);
  });

  it("flags forbidden antecedents elsewhere", () => {
    const wrong: WireAnnotation = {
      category: "CharE",
      segment: 0,
      start: 0,
      end: 5,
      antecedent: { segment: 0, start: 6, end: 9 },
    };
    expect(revalidate(wrong, summary).join(" ")).toMatch(/does not take/);
  });

  it("flags antecedents from later segments", () => {
    const backwards: WireAnnotation = {
      category: "RepE",
      segment: 0,
      start: 0,
      end: 5,
      antecedent: { segment: 1, start: 32, end: 37 },
    };
    expect(revalidate(backwards, summary).join(" ")).toMatch(/context/);
  });

  it("flags non-sentence-aligned SceneE spans", () => {
    const ragged: WireAnnotation = { category: "SceneE", segment: 1, start: 33, end: 47 };
    expect(revalidate(ragged, summary).join(" ")).toMatch(/whole sentences/);
  });

  it("flags spans outside their segment", () => {
    const outside: WireAnnotation = { category: "CharE", segment: 1, start: 0, end: 5 };
    expect(revalidate(outside, summary).join(" ")).toMatch(/outside its segment/);
  });
});
