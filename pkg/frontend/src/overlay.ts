/** Training-mode comparison between expert reference spans and own spans. */

import type { WireAnnotation } from "./types.js";

export type OverlayStatus = "matched" | "partial" | "missed" | "extra";

export interface OverlayRow {
  status: OverlayStatus;
  expert?: WireAnnotation;
  own?: WireAnnotation;
}

function sameSpan(a: WireAnnotation, b: WireAnnotation): boolean {
  return a.segment === b.segment && a.start === b.start && a.end === b.end;
}

function overlapping(a: WireAnnotation, b: WireAnnotation): boolean {
  return a.start < b.end && b.start < a.end;
}

/** Align expert and own annotations per category: exact span matches first,
 * then overlapping spans as partial matches, the rest missed/extra. */
export function compareWithReference(
  expert: WireAnnotation[],
  own: WireAnnotation[],
): OverlayRow[] {
  const rows: OverlayRow[] = [];
  const ownLeft = [...own];

  const takeOwn = (predicate: (o: WireAnnotation) => boolean): WireAnnotation | undefined => {
    const index = ownLeft.findIndex(predicate);
    return index === -1 ? undefined : ownLeft.splice(index, 1)[0];
  };

  const pending: WireAnnotation[] = [];
  for (const reference of expert) {
    const exact = takeOwn((o) => o.category === reference.category && sameSpan(o, reference));
    if (exact !== undefined) {
      rows.push({ status: "matched", expert: reference, own: exact });
    } else {
      pending.push(reference);
    }
  }
  for (const reference of pending) {
    const partial = takeOwn(
      (o) => o.category === reference.category && overlapping(o, reference),
    );
    if (partial !== undefined) {
      rows.push({ status: "partial", expert: reference, own: partial });
    } else {
      rows.push({ status: "missed", expert: reference });
    }
  }
  for (const leftover of ownLeft) {
    rows.push({ status: "extra", own: leftover });
  }
  return rows;
}

export function overlaySummary(rows: OverlayRow[]): Record<OverlayStatus, number> {
  const counts: Record<OverlayStatus, number> = {
    matched: 0,
    partial: 0,
    missed: 0,
    extra: 0,
  };
  for (const row of rows) {
    counts[row.status] += 1;
  }
  return counts;
}
