import { UNTAGGED, type SegmentSummary, type Tag } from "./types.js";

/**
 * Pure review-session state: which segments exist, which row is
 * selected, and where to go after a tag is acknowledged. All tag
 * state comes from the server; this class only mirrors acknowledged
 * values, never optimistic ones.
 */
export class ReviewSession {
  private cursor = 0;

  constructor(public segments: SegmentSummary[]) {}

  get size(): number {
    return this.segments.length;
  }

  current(): SegmentSummary | null {
    return this.segments[this.cursor] ?? null;
  }

  currentIndex(): number {
    return this.cursor;
  }

  select(index: number): void {
    if (this.segments.length === 0) return;
    this.cursor = Math.min(Math.max(index, 0), this.segments.length - 1);
  }

  next(): void {
    this.select(this.cursor + 1);
  }

  prev(): void {
    this.select(this.cursor - 1);
  }

  /** Index of the first untagged segment at or after `from`, wrapping
   *  around once; -1 when every segment is tagged. */
  nextUntagged(from: number = this.cursor): number {
    const n = this.segments.length;
    for (let step = 0; step < n; step++) {
      const i = (from + step) % n;
      if (this.segments[i].tag === UNTAGGED) return i;
    }
    return -1;
  }

  /** Record a server-acknowledged tag, then advance the cursor to the
   *  next untagged segment. Returns true while work remains. */
  applyTag(id: string, tag: Tag, note = ""): boolean {
    const i = this.segments.findIndex((s) => s.id === id);
    if (i < 0) throw new Error(`unknown segment ${id}`);
    this.segments[i] = { ...this.segments[i], tag, note };
    const target = this.nextUntagged(i + 1);
    if (target < 0) return false;
    this.cursor = target;
    return true;
  }

  isComplete(): boolean {
    return this.nextUntagged(0) < 0;
  }

  taggedCount(): number {
    return this.segments.filter((s) => s.tag !== UNTAGGED).length;
  }
}
