import { describe, expect, it } from "vitest";

import { compareWithReference, overlaySummary } from "../src/overlay.js";
import type { WireAnnotation } from "../src/types.js";

const expertSpan: WireAnnotation = { category: "CharE", segment: 0, start: 10, end: 20 };

describe("training overlay comparison", () => {
  it("identical spans match", () => {
    const rows = compareWithReference([expertSpan], [{ ...expertSpan }]);
    expect(rows).toHaveLength(1);
    expect(rows[0].status).toBe("matched");
  });

  it("expert-only spans are missed", () => {
    const rows = compareWithReference([expertSpan], []);
    expect(rows[0].status).toBe("missed");
    expect(rows[0].expert).toEqual(expertSpan);
  });

  it("worker-only spans are extra", () => {
    const rows = compareWithReference([], [expertSpan]);
    expect(rows[0].status).toBe("extra");
  });

  it("overlapping same-category spans are partial", () => {
    const own: WireAnnotation = { category: "CharE", segment: 0, start: 15, end: 25 };
    const rows = compareWithReference([expertSpan], [own]);
    expect(rows[0].status).toBe("partial");
  });

  it("category mismatch never matches", () => {
    const own: WireAnnotation = { category: "RefE", segment: 0, start: 10, end: 20 };
    const rows = compareWithReference([expertSpan], [own]);
    const statuses = rows.map((r) => r.status).sort();
    expect(statuses).toEqual(["extra", "missed"]);
  });

  it("each own span is consumed once", () => {
    const second: WireAnnotation = { category: "CharE", segment: 0, start: 12, end: 18 };
    const rows = compareWithReference([expertSpan, second], [{ ...expertSpan }]);
    const counts = overlaySummary(rows);
    expect(counts.matched).toBe(1);
    expect(counts.missed).toBe(1);
    expect(counts.extra).toBe(0);
  });

  it("summary counts add up", () => {
    const rows = compareWithReference(
      [expertSpan, { category: "SceneE", segment: 1, start: 40, end: 80 }],
      [{ ...expertSpan }, { category: "GramE", segment: 0, start: 0, end: 4 }],
    );
    const counts = overlaySummary(rows);
    expect(counts.matched + counts.partial + counts.missed + counts.extra).toBe(rows.length);
  });
});
