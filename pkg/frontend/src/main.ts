import { ApiClient, ApiError } from "./api.js";
import { ReviewSession } from "./session.js";
import { drawWaveform, xToTime } from "./waveform.js";
import { TAGS, UNTAGGED, type SegmentSummary, type Tag } from "./types.js";

const api = new ApiClient();

const $ = <T extends HTMLElement>(id: string): T =>
  document.getElementById(id) as T;

const listEl = $<HTMLUListElement>("segment-list");
const bannerEl = $<HTMLDivElement>("error-banner");
const progressEl = $<HTMLDivElement>("progress");
const transcriptEl = $<HTMLDivElement>("transcript");
const detailStatsEl = $<HTMLDivElement>("detail-stats");
const filterEl = $<HTMLSelectElement>("tag-filter");
const noteEl = $<HTMLInputElement>("tag-note");
const canvas = $<HTMLCanvasElement>("waveform");
const audio = $<HTMLAudioElement>("player");

let session = new ReviewSession([]);
let peaks: [number, number][] = [];
let missingAudio = new Set<string>();

function showError(message: string): void {
  bannerEl.textContent = message;
  bannerEl.classList.remove("hidden");
}

function clearError(): void {
  bannerEl.classList.add("hidden");
}

function tagClass(tag: string): string {
  return `badge badge-${tag.toLowerCase()}`;
}

function renderList(): void {
  listEl.replaceChildren();
  if (session.size === 0) {
    const empty = document.createElement("li");
    empty.className = "empty";
    empty.textContent = "No segments match this filter.";
    listEl.appendChild(empty);
    return;
  }
  session.segments.forEach((seg, i) => {
    const li = document.createElement("li");
    li.className = i === session.currentIndex() ? "row selected" : "row";
    if (missingAudio.has(seg.id)) li.classList.add("missing-audio");
    const badge = `<span class="${tagClass(seg.tag)}">${seg.tag}</span>`;
    li.innerHTML =
      `<span class="seg-id">${seg.id}</span>` +
      `<span class="seg-stats">${seg.duration.toFixed(2)}s · ` +
      `${seg.word_rate.toFixed(2)} w/s · ${seg.char_rate.toFixed(2)} c/s</span>` +
      badge;
    li.addEventListener("click", () => {
      void selectSegment(i);
    });
    listEl.appendChild(li);
  });
}

function renderDetail(): void {
  const seg = session.current();
  if (!seg) {
    transcriptEl.textContent = "";
    detailStatsEl.textContent = "";
    return;
  }
  transcriptEl.textContent = seg.text;
  detailStatsEl.textContent =
    `${seg.normalized_text} — ${seg.duration.toFixed(2)} s, ` +
    `${seg.word_rate.toFixed(2)} words/s, ${seg.char_rate.toFixed(2)} chars/s` +
    (seg.note ? ` — note: ${seg.note}` : "");
}

async function renderProgress(): Promise<void> {
  try {
    const stats = await api.stats();
    const parts = TAGS.map((t) => `${t} ${stats.counts[t] ?? 0}`);
    const done = stats.total - stats.untagged;
    progressEl.textContent =
      `${done}/${stats.total} tagged — ${parts.join(", ")}` +
      (stats.untagged === 0 && stats.total > 0 ? " — review complete" : "");
  } catch {
    /* progress is cosmetic; the banner covers real failures */
  }
}

function redrawWaveform(): void {
  const ctx = canvas.getContext("2d");
  const seg = session.current();
  if (!ctx || !seg) return;
  drawWaveform(ctx, peaks, audio.currentTime, seg.duration);
}

async function selectSegment(index: number): Promise<void> {
  session.select(index);
  const seg = session.current();
  renderList();
  renderDetail();
  if (!seg) return;
  audio.pause();
  audio.src = api.audioUrl(seg.id);
  peaks = [];
  redrawWaveform();
  try {
    peaks = (await api.peaks(seg.id, canvas.width)).peaks;
    missingAudio.delete(seg.id);
    clearError();
  } catch (err) {
    if (err instanceof ApiError && (err.status === 404 || err.status === 410)) {
      missingAudio.add(seg.id);
      renderList();
    }
    showError(`waveform unavailable: ${(err as Error).message}`);
  }
  redrawWaveform();
}

async function submitTag(tag: Tag): Promise<void> {
  const seg = session.current();
  if (!seg) return;
  try {
    const ack = await api.setTag(seg.id, tag, noteEl.value);
    noteEl.value = "";
    clearError();
    const more = session.applyTag(ack.id, ack.tag, ack.note);
    renderList();
    renderDetail();
    void renderProgress();
    if (more) {
      await selectSegment(session.currentIndex());
    } else {
      showError("All segments tagged. Review complete.");
    }
  } catch (err) {
    showError(`tag rejected: ${(err as Error).message}`);
  }
}

async function loadSegments(): Promise<void> {
  try {
    const filter = filterEl.value === "All" ? "" : filterEl.value;
    const page = await api.listSegments(filter);
    session = new ReviewSession(page.segments as SegmentSummary[]);
    clearError();
    const start = session.nextUntagged(0);
    await selectSegment(start >= 0 ? start : 0);
    void renderProgress();
  } catch (err) {
    showError(`cannot reach review service: ${(err as Error).message}`);
  }
}

function onKey(event: KeyboardEvent): void {
  if (event.target instanceof HTMLInputElement) return;
  const shortcuts: Record<string, Tag> = { "1": "High", "2": "Low", "3": "Fixable" };
  if (event.key in shortcuts) {
    void submitTag(shortcuts[event.key]);
  } else if (event.key === " ") {
    event.preventDefault();
    if (audio.paused) void audio.play();
    else audio.pause();
  } else if (event.key === "ArrowDown" || event.key === "j") {
    void selectSegment(session.currentIndex() + 1);
  } else if (event.key === "ArrowUp" || event.key === "k") {
    void selectSegment(session.currentIndex() - 1);
  }
}

canvas.addEventListener("click", (event) => {
  const seg = session.current();
  if (!seg) return;
  const rect = canvas.getBoundingClientRect();
  const x = ((event.clientX - rect.left) / rect.width) * canvas.width;
  audio.currentTime = xToTime(x, seg.duration, canvas.width);
  redrawWaveform();
});

audio.addEventListener("timeupdate", redrawWaveform);
audio.addEventListener("seeked", redrawWaveform);
document.addEventListener("keydown", onKey);
filterEl.addEventListener("change", () => void loadSegments());
$<HTMLButtonElement>("retry").addEventListener("click", () => void loadSegments());
for (const tag of TAGS) {
  $<HTMLButtonElement>(`tag-${tag.toLowerCase()}`).addEventListener(
    "click",
    () => void submitTag(tag),
  );
}
filterEl.replaceChildren(
  ...["All", UNTAGGED, ...TAGS].map((value) => {
    const opt = document.createElement("option");
    opt.value = value;
    opt.textContent = value;
    return opt;
  }),
);

void loadSegments();
