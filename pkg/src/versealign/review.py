"""HTTP service backing the human quality-review frontend.

Tags live in an append-only sidecar file next to the manifest, replayed
on startup with last-write-wins semantics, so an acknowledged tag always
survives a restart.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .audio import load_wav
from .pipeline import QUALITY_TAGS, TAG_UNTAGGED, SegmentRecord, parse_manifest

DEFAULT_PORT = 8517
DEFAULT_PEAK_BUCKETS = 800


@dataclass
class TagEntry:
    tag: str
    note: str
    updated_at: float


class TagStore:
    """Single-writer persistent tag map keyed by segment id.

    Every upsert is appended to the backing file before it is
    acknowledged; loading replays the log, keeping the last entry per id.
    """

    def __init__(self, path: str):
        self.path = path
        self._lock = threading.Lock()
        self.entries: dict[str, TagEntry] = {}
        if os.path.exists(path):
            with open(path, encoding="utf-8") as f:
                for line in f:
                    line = line.strip()
                    if not line:
                        continue
                    obj = json.loads(line)
                    self.entries[obj["id"]] = TagEntry(
                        obj["tag"], obj.get("note", ""), obj.get("updated_at", 0.0))

    def set(self, segment_id: str, tag: str, note: str = "") -> TagEntry:
        entry = TagEntry(tag, note, time.time())
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(json.dumps({"id": segment_id, "tag": tag, "note": note,
                                    "updated_at": entry.updated_at},
                                   ensure_ascii=False) + "\n")
                f.flush()
                os.fsync(f.fileno())
            self.entries[segment_id] = entry
        return entry

    def get(self, segment_id: str) -> TagEntry | None:
        return self.entries.get(segment_id)


def compute_peaks(samples: np.ndarray, buckets: int = DEFAULT_PEAK_BUCKETS):
    """Per-bucket [min, max] pairs for waveform rendering."""
    n = int(samples.size)
    if n == 0:
        return []
    buckets = min(buckets, n)
    edges = np.linspace(0, n, buckets + 1).astype(int)
    peaks = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        chunk = samples[lo:max(hi, lo + 1)]
        peaks.append([float(chunk.min()), float(chunk.max())])
    return peaks


class TagRequest(BaseModel):
    tag: str
    note: str = ""


def segment_summary(rec: SegmentRecord, store: TagStore) -> dict:
    entry = store.get(rec.id)
    return {
        "id": rec.id,
        "text": rec.text,
        "normalized_text": rec.normalized_text,
        "duration": rec.duration,
        "word_rate": rec.word_rate,
        "char_rate": rec.char_rate,
        "tag": entry.tag if entry else TAG_UNTAGGED,
        "note": entry.note if entry else "",
    }


def create_app(manifest_path: str, audio_dir: str, tag_path: str | None = None,
               static_dir: str | None = None) -> FastAPI:
    """Build the review API over one manifest.

    Audio paths in the manifest are resolved relative to ``audio_dir``.
    """
    records = parse_manifest(manifest_path)
    by_id = {rec.id: rec for rec in records}
    order = sorted(by_id)
    store = TagStore(tag_path or manifest_path + ".tags")

    app = FastAPI(title="versealign review")
    app.state.tag_store = store
    app.state.records = by_id

    @app.get("/api/segments")
    def list_segments(filter: str = "", page: int = 1, page_size: int = 50):
        if page < 1 or page_size < 1:
            raise HTTPException(422, "page and page_size must be >= 1")
        wanted = filter or None
        if wanted is not None and wanted not in QUALITY_TAGS + (TAG_UNTAGGED,):
            raise HTTPException(422, f"filter must be one of "
                                     f"{QUALITY_TAGS + (TAG_UNTAGGED,)}")
        summaries = [segment_summary(by_id[sid], store) for sid in order]
        if wanted is not None:
            summaries = [s for s in summaries if s["tag"] == wanted]
        total = len(summaries)
        lo = (page - 1) * page_size
        return {"total": total, "page": page, "page_size": page_size,
                "segments": summaries[lo:lo + page_size]}

    def _segment_audio(segment_id: str):
        rec = by_id.get(segment_id)
        if rec is None:
            raise HTTPException(404, f"unknown segment {segment_id!r}")
        path = os.path.join(audio_dir, rec.audio_filepath)
        if not os.path.exists(path):
            raise HTTPException(410, f"audio file missing: {path}")
        return path

    @app.get("/api/segments/{segment_id}/audio")
    def get_audio(segment_id: str):
        path = _segment_audio(segment_id)
        with open(path, "rb") as f:
            return Response(f.read(), media_type="audio/wav")

    @app.get("/api/segments/{segment_id}/peaks")
    def get_peaks(segment_id: str, buckets: int = DEFAULT_PEAK_BUCKETS):
        path = _segment_audio(segment_id)
        buf = load_wav(path)
        return {"id": segment_id, "peaks": compute_peaks(buf.samples, buckets)}

    @app.post("/api/segments/{segment_id}/tag")
    def set_tag(segment_id: str, req: TagRequest):
        if segment_id not in by_id:
            raise HTTPException(404, f"unknown segment {segment_id!r}")
        if req.tag not in QUALITY_TAGS:
            raise HTTPException(
                422, f"invalid tag {req.tag!r}; allowed: {', '.join(QUALITY_TAGS)}")
        entry = store.set(segment_id, req.tag, req.note)
        return {"id": segment_id, "tag": entry.tag, "note": entry.note,
                "updated_at": entry.updated_at}

    @app.get("/api/stats")
    def get_stats():
        counts = {tag: 0 for tag in QUALITY_TAGS}
        untagged = 0
        for sid in order:
            entry = store.get(sid)
            if entry is None:
                untagged += 1
            else:
                counts[entry.tag] += 1
        return {"counts": counts, "untagged": untagged, "total": len(order)}

    if static_dir and os.path.isdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="frontend")
    return app


def tagged_records(records, store: TagStore) -> list[SegmentRecord]:
    """Copy records with the store's current tags applied."""
    from dataclasses import replace
    out = []
    for rec in records:
        entry = store.get(rec.id)
        out.append(replace(rec, quality_tag=entry.tag) if entry else rec)
    return out
