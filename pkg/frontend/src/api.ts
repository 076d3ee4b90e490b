/** Typed fetch client for the annotation service. */

import type {
  AnnotationFile,
  CategoryInfo,
  SubmitResponse,
  SummaryView,
  TaskView,
  Violation,
  WireAnnotation,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
    public violations: Violation[] = [],
  ) {
    super(message);
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(path, init);
  const body = (await response.json().catch(() => ({}))) as Record<string, unknown>;
  if (!response.ok) {
    throw new ApiError(
      response.status,
      String(body["error"] ?? response.statusText),
      (body["violations"] as Violation[]) ?? [],
    );
  }
  return body as T;
}

export function fetchCategories(): Promise<CategoryInfo[]> {
  return request<CategoryInfo[]>("/api/categories");
}

export async function fetchTasks(annotator: string): Promise<TaskView[]> {
  const body = await request<{ tasks: TaskView[] }>(
    `/api/tasks?annotator=${encodeURIComponent(annotator)}`,
  );
  return body.tasks;
}

export function fetchSummary(docId: string, annotator: string): Promise<SummaryView> {
  return request<SummaryView>(
    `/api/summary/${encodeURIComponent(docId)}?annotator=${encodeURIComponent(annotator)}`,
  );
}

export function fetchAnnotations(docId: string, annotator: string): Promise<AnnotationFile> {
  return request<AnnotationFile>(
    `/api/annotations/${encodeURIComponent(docId)}/${encodeURIComponent(annotator)}`,
  );
}

export function fetchReference(docId: string): Promise<AnnotationFile> {
  return request<AnnotationFile>(`/api/reference/${encodeURIComponent(docId)}`);
}

export function submitSegment(
  docId: string,
  annotatorId: string,
  segmentIndex: number,
  annotations: WireAnnotation[],
  likert?: number,
): Promise<SubmitResponse> {
  return request<SubmitResponse>("/api/annotations", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({
      doc_id: docId,
      annotator_id: annotatorId,
      segment_index: segmentIndex,
      annotations,
      ...(likert !== undefined ? { likert } : {}),
    }),
  });
}
