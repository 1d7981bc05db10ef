export type Tag = "High" | "Low" | "Fixable";

export const TAGS: Tag[] = ["High", "Low", "Fixable"];
export const UNTAGGED = "Untagged";

/** One row of GET /api/segments, displayed verbatim (no recomputation). */
export interface SegmentSummary {
  id: string;
  text: string;
  normalized_text: string;
  duration: number;
  word_rate: number;
  char_rate: number;
  tag: string;
  note: string;
}

export interface SegmentPage {
  total: number;
  page: number;
  page_size: number;
  segments: SegmentSummary[];
}

export interface PeaksResponse {
  id: string;
  peaks: [number, number][];
}

export interface TagAck {
  id: string;
  tag: Tag;
  note: string;
  updated_at: number;
}

export interface Stats {
  counts: Record<string, number>;
  untagged: number;
  total: number;
}
