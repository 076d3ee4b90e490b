/** Browser client: task list, sequential segment annotation, training overlay.
 *
 * All decision logic lives in selection.ts / wire.ts / overlay.ts; this file
 * only translates DOM events into those calls and renders the results.
 */

import {
  ApiError,
  fetchAnnotations,
  fetchCategories,
  fetchReference,
  fetchSummary,
  fetchTasks,
  submitSegment,
} from "./api.js";
import { compareWithReference, overlaySummary } from "./overlay.js";
import {
  PendingAnnotation,
  buildAnnotation,
  commitBlocker,
  emptyPending,
  sentenceRangeOfSegment,
  snapToTokens,
  withAntecedent,
  withCategory,
  withSpan,
} from "./selection.js";
import type {
  AnnotationFile,
  CategoryInfo,
  CharRange,
  SummaryView,
  TaskView,
  WireAnnotation,
} from "./types.js";
import { exportAnnotations, revalidate } from "./wire.js";

interface AppState {
  annotator: string | null;
  categories: CategoryInfo[];
  tasks: TaskView[];
  summary: SummaryView | null;
  pending: PendingAnnotation;
  committed: WireAnnotation[]; // current segment, not yet POSTed
  reference: AnnotationFile | null;
  own: AnnotationFile | null;
  message: string;
  violations: string[];
  dragAnchor: number | null; // flat token index
  dragHead: number | null;
}

const state: AppState = {
  annotator: null,
  categories: [],
  tasks: [],
  summary: null,
  pending: emptyPending(),
  committed: [],
  reference: null,
  own: null,
  message: "",
  violations: [],
  dragAnchor: null,
  dragHead: null,
};

function root(): HTMLElement {
  const el = document.getElementById("app");
  if (!el) {
    throw new Error("missing #app container");
  }
  return el;
}

function flatTokens(summary: SummaryView): CharRange[] {
  return summary.tokens.flat();
}

// -- views ---------------------------------------------------------------------

function renderLogin(): void {
  root().innerHTML = `
    <section class="login">
      <h1>Coherence annotation</h1>
      <label>Annotator id <input id="annotator-input" autofocus /></label>
      <button id="login-button">Open tasks</button>
      <p class="message">${escapeHtml(state.message)}</p>
    </section>`;
  const input = document.getElementById("annotator-input") as HTMLInputElement;
  document.getElementById("login-button")!.addEventListener("click", () => {
    void login(input.value.trim());
  });
  input.addEventListener("keydown", (event) => {
    if (event.key === "Enter") {
      void login(input.value.trim());
    }
  });
}

async function login(annotator: string): Promise<void> {
  if (!annotator) {
    return;
  }
  try {
    state.tasks = await fetchTasks(annotator);
    state.annotator = annotator;
    state.message = "";
    renderTasks();
  } catch (error) {
    state.message = error instanceof Error ? error.message : String(error);
    renderLogin();
  }
}

function renderTasks(): void {
  const rows = state.tasks
    .map(
      (task) => `
      <tr>
        <td>${escapeHtml(task.doc_id)}</td>
        <td>${task.status}</td>
        <td>${task.current_segment} / ${task.segment_count}</td>
        <td><button data-doc="${escapeHtml(task.doc_id)}">
          ${task.status === "submitted" ? "review" : "annotate"}
        </button></td>
      </tr>`,
    )
    .join("");
  root().innerHTML = `
    <section class="tasks">
      <h1>Tasks for ${escapeHtml(state.annotator ?? "")}</h1>
      <table><thead><tr><th>summary</th><th>status</th><th>progress</th><th></th></tr></thead>
      <tbody>${rows}</tbody></table>
    </section>`;
  root()
    .querySelectorAll<HTMLButtonElement>("button[data-doc]")
    .forEach((button) =>
      button.addEventListener("click", () => void openTask(button.dataset.doc!)),
    );
}

async function openTask(docId: string): Promise<void> {
  if (!state.annotator) {
    return;
  }
  state.summary = await fetchSummary(docId, state.annotator);
  state.pending = emptyPending();
  state.committed = [];
  state.violations = [];
  state.message = "";
  state.reference = await fetchReference(docId).catch(() => null);
  state.own = await fetchAnnotations(docId, state.annotator).catch(() => null);
  if (state.categories.length === 0) {
    state.categories = await fetchCategories();
  }
  renderAnnotation();
}

function highlightClass(position: number, annotations: WireAnnotation[]): string {
  for (const a of annotations) {
    if (a.start <= position && position < a.end) {
      return ` hl hl-${a.category}`;
    }
  }
  return "";
}

function renderAnnotation(): void {
  const summary = state.summary;
  if (!summary || !state.annotator) {
    renderTasks();
    return;
  }
  const stored = state.own?.annotations ?? [];
  const tokens = flatTokens(summary);
  const currentSegment = Math.min(summary.current_segment, summary.segments.length - 1);
  const [curLo, curHi] = sentenceRangeOfSegment(summary, currentSegment);

  const selection = currentSelectionRange();
  const sentencesHtml = summary.sentences
    .map((sentence, index) => {
      const inCurrent =
        index >= curLo && index < curHi && summary.status !== "submitted";
      const sentenceTokens = summary.tokens[index];
      const base = tokens.findIndex((t) => t === sentenceTokens[0]);
      const spans = sentenceTokens
        .map((token, offset) => {
          const flat = base + offset;
          const selected =
            selection !== null && token.start < selection.end && selection.start < token.end;
          const classes =
            "tok" +
            (selected ? " selected" : "") +
            highlightClass(token.start, [...stored, ...state.committed]);
          return `<span class="${classes}" data-flat="${flat}">${escapeHtml(
            summary.text.slice(token.start, token.end),
          )}</span>`;
        })
        .join(" ");
      return `<span class="sentence ${inCurrent ? "current" : "context"}" data-sentence="${index}">${spans}</span>`;
    })
    .join(" ");

  const palette = state.categories
    .map(
      (category) => `
      <button class="cat cat-${category.name}${
        state.pending.category?.name === category.name ? " active" : ""
      }" data-category="${category.name}" title="${escapeHtml(category.display_name)}">
        ${escapeHtml(category.display_name)}
      </button>`,
    )
    .join("");

  const blocker = commitBlocker(state.pending);
  const committedRows = state.committed
    .map(
      (a, i) => `
      <li>
        <span class="cat-chip cat-${a.category}">${a.category}</span>
        "${escapeHtml(summary.text.slice(a.start, a.end))}"
        ${a.antecedent ? `&larr; "${escapeHtml(summary.text.slice(a.antecedent.start, a.antecedent.end))}"` : ""}
        <button data-remove="${i}">remove</button>
      </li>`,
    )
    .join("");

  const finalSegment = summary.current_segment === summary.segment_count - 1;
  const overlayHtml = renderOverlayBlock();

  root().innerHTML = `
    <section class="annotate">
      <header>
        <button id="back">&larr; tasks</button>
        <h1>${escapeHtml(summary.doc_id)}</h1>
        <span>segment ${Math.min(summary.current_segment + 1, summary.segment_count)} of ${summary.segment_count}
          &middot; ${summary.status}</span>
      </header>
      <article id="text" class="${state.pending.mode === "antecedent" ? "antecedent-mode" : ""}">
        ${sentencesHtml}
      </article>
      <aside>
        <div class="palette">${palette}</div>
        <p class="hint">${
          state.pending.mode === "antecedent"
            ? "Highlight the earlier span this error refers to; it fills the antecedent automatically."
            : "Drag across tokens in the current segment to select an error span."
        }</p>
        <p class="blocker">${blocker ? escapeHtml(blocker) : ""}</p>
        <button id="commit" ${blocker ? "disabled" : ""}>Add error</button>
        <ul class="committed">${committedRows}</ul>
        ${
          finalSegment
            ? `<label>Overall coherence (1-5)
                 <input id="likert" type="number" min="1" max="5" /></label>`
            : ""
        }
        <button id="submit" ${summary.status === "submitted" ? "disabled" : ""}>
          Submit segment (${state.committed.length} errors)
        </button>
        <button id="export">Export annotations</button>
        <ul class="violations">${state.violations
          .map((v) => `<li>${escapeHtml(v)}</li>`)
          .join("")}</ul>
        <p class="message">${escapeHtml(state.message)}</p>
      </aside>
      ${overlayHtml}
    </section>`;

  wireAnnotationEvents(summary, tokens);
}

function renderOverlayBlock(): string {
  if (!state.reference || !state.summary) {
    return "";
  }
  const own = [...(state.own?.annotations ?? []), ...state.committed];
  const rows = compareWithReference(state.reference.annotations, own);
  const counts = overlaySummary(rows);
  const text = state.summary.text;
  const items = rows
    .map((row) => {
      const source = row.expert ?? row.own!;
      const snippet = text.slice(source.start, Math.min(source.end, source.start + 80));
      return `<li class="overlay-${row.status}">
        <span class="cat-chip cat-${source.category}">${source.category}</span>
        <strong>${row.status}</strong> "${escapeHtml(snippet)}"
      </li>`;
    })
    .join("");
  return `
    <section class="overlay">
      <h2>Expert reference (${counts.matched} matched, ${counts.partial} partial,
        ${counts.missed} missed, ${counts.extra} extra)</h2>
      <ul>${items}</ul>
    </section>`;
}

function currentSelectionRange(): CharRange | null {
  if (state.dragAnchor === null || state.dragHead === null || !state.summary) {
    return null;
  }
  const tokens = flatTokens(state.summary);
  const lo = Math.min(state.dragAnchor, state.dragHead);
  const hi = Math.max(state.dragAnchor, state.dragHead);
  return { start: tokens[lo].start, end: tokens[hi].end };
}

function wireAnnotationEvents(summary: SummaryView, tokens: CharRange[]): void {
  document.getElementById("back")!.addEventListener("click", () => void refreshTasks());

  const article = document.getElementById("text")!;
  article.querySelectorAll<HTMLSpanElement>("span.tok").forEach((tokenEl) => {
    const flat = Number(tokenEl.dataset.flat);
    tokenEl.addEventListener("mousedown", (event) => {
      event.preventDefault();
      state.dragAnchor = flat;
      state.dragHead = flat;
      renderAnnotation();
    });
    tokenEl.addEventListener("mouseover", () => {
      if (state.dragAnchor !== null) {
        state.dragHead = flat;
        renderAnnotation();
      }
    });
    tokenEl.addEventListener("mouseup", () => {
      state.dragHead = flat;
      finishSelection(summary, tokens);
    });
  });

  root()
    .querySelectorAll<HTMLButtonElement>("button[data-category]")
    .forEach((button) =>
      button.addEventListener("click", () => {
        const category = state.categories.find(
          (c) => c.name === button.dataset.category,
        );
        if (category) {
          state.pending = withCategory(state.pending, category, summary.sentences);
          renderAnnotation();
        }
      }),
    );

  root()
    .querySelectorAll<HTMLButtonElement>("button[data-remove]")
    .forEach((button) =>
      button.addEventListener("click", () => {
        state.committed.splice(Number(button.dataset.remove), 1);
        renderAnnotation();
      }),
    );

  document.getElementById("commit")!.addEventListener("click", () => {
    const record = buildAnnotation(state.pending, summary);
    if (record === null) {
      return;
    }
    const problems = revalidate(record, summary);
    if (problems.length > 0) {
      state.violations = problems;
    } else {
      state.committed.push(record);
      state.pending = emptyPending();
      state.violations = [];
    }
    renderAnnotation();
  });

  document.getElementById("submit")!.addEventListener("click", () => {
    void doSubmit(summary);
  });

  document.getElementById("export")!.addEventListener("click", () => {
    const file = exportAnnotations(
      summary.doc_id,
      state.annotator ?? "",
      [...(state.own?.annotations ?? []), ...state.committed],
      state.own?.likert,
    );
    downloadJson(file, `${summary.doc_id}__${state.annotator}.json`);
  });
}

function finishSelection(summary: SummaryView, tokens: CharRange[]): void {
  const raw = currentSelectionRange();
  state.dragAnchor = null;
  state.dragHead = null;
  if (raw === null) {
    return;
  }
  const snapped = snapToTokens(tokens, raw);
  if (snapped === null) {
    return;
  }
  if (state.pending.mode === "antecedent") {
    state.pending = withAntecedent(state.pending, snapped);
  } else {
    state.pending = withSpan(state.pending, snapped);
    if (state.pending.category?.whole_sentence) {
      state.pending = withCategory(state.pending, state.pending.category, summary.sentences);
    }
  }
  renderAnnotation();
}

async function doSubmit(summary: SummaryView): Promise<void> {
  if (!state.annotator) {
    return;
  }
  const likertInput = document.getElementById("likert") as HTMLInputElement | null;
  const likert = likertInput?.value ? Number(likertInput.value) : undefined;
  try {
    await submitSegment(
      summary.doc_id,
      state.annotator,
      summary.current_segment,
      state.committed,
      likert,
    );
    state.committed = [];
    state.violations = [];
    state.message = "";
    await openTask(summary.doc_id); // server decides what becomes visible next
  } catch (error) {
    if (error instanceof ApiError) {
      state.violations = error.violations.map((v) => v.message);
      state.message = error.message;
    } else {
      state.message = String(error);
    }
    renderAnnotation();
  }
}

async function refreshTasks(): Promise<void> {
  if (state.annotator) {
    state.tasks = await fetchTasks(state.annotator);
  }
  state.summary = null;
  renderTasks();
}

function downloadJson(data: unknown, filename: string): void {
  const blob = new Blob([JSON.stringify(data, null, 2)], { type: "application/json" });
  const url = URL.createObjectURL(blob);
  const link = document.createElement("a");
  link.href = url;
  link.download = filename;
  link.click();
  URL.revokeObjectURL(url);
}

function escapeHtml(value: string): string {
  return value
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

document.addEventListener("mouseup", () => {
  // Abandon a drag that ends outside the text area.
  if (state.dragAnchor !== null && state.summary) {
    finishSelection(state.summary, flatTokens(state.summary));
  }
});

renderLogin();
