/** Wire types mirroring the annotation service's JSON payloads. */

export type CategoryName =
  | "CharE"
  | "RefE"
  | "SceneE"
  | "InconE"
  | "RepE"
  | "GramE"
  | "CorefE";

export const CATEGORY_NAMES: CategoryName[] = [
  "CharE",
  "RefE",
  "SceneE",
  "InconE",
  "RepE",
  "GramE",
  "CorefE",
];

export interface CategoryInfo {
  name: CategoryName;
  group: "coherence" | "language";
  display_name: string;
  requires_antecedent: boolean;
  whole_sentence: boolean;
}

export interface CharRange {
  start: number;
  end: number;
}

export interface SummaryView {
  doc_id: string;
  system_id: string;
  text: string;
  sentences: CharRange[];
  segments: number[]; // cumulative sentence counts for the visible segments
  tokens: CharRange[][]; // per visible sentence
  current_segment: number;
  segment_count: number;
  status: "pending" | "in_progress" | "submitted";
}

export interface TaskView {
  task_id: string;
  doc_id: string;
  annotator_id: string;
  status: "pending" | "in_progress" | "submitted";
  current_segment: number;
  segment_count: number;
}

export interface WireSpan {
  segment: number;
  start: number;
  end: number;
}

export interface WireAnnotation {
  category: CategoryName;
  segment: number;
  start: number;
  end: number;
  antecedent?: WireSpan;
}

export interface AnnotationFile {
  schema_version: string;
  doc_id: string;
  annotator_id: string;
  likert?: number;
  revision?: number;
  annotations: WireAnnotation[];
}

export interface SubmitResponse {
  revision: number;
  current_segment: number;
  status: string;
}

export interface Violation {
  index: number | null;
  code: string;
  message: string;
}
