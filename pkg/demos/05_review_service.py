"""Spin up the quality-review service over a small synthetic manifest
and exercise its API in-process (no browser needed).

Run: python3 demos/05_review_service.py

To review interactively instead, build the frontend (see frontend/README.md)
and run:
    versealign review serve --manifest <manifest> --audio-dir <dir> \
        --static-dir frontend/dist
"""

import os
import tempfile

import numpy as np
from fastapi.testclient import TestClient

from versealign.audio import AudioBuffer, save_wav
from versealign.pipeline import SegmentRecord, compute_quality_stats, emit_manifest
from versealign.review import create_app

work = tempfile.mkdtemp(prefix="versealign_review_")
audio_dir = os.path.join(work, "audio")
os.makedirs(audio_dir)

records = []
rng = np.random.default_rng(3)
for i in range(5):
    rec = compute_quality_stats(SegmentRecord(
        id=f"Mark_01_{i:03d}", audio_filepath=f"Mark_01_{i:03d}.wav",
        audio_start_sec=2.0 * i, duration=1.5 + 0.2 * i,
        text="Oba ka buba.", normalized_text="oba ka buba",
        uroman_tokens="o b a | k a | b u b a"))
    records.append(rec)
    n = round(rec.duration * 16000)
    save_wav(os.path.join(audio_dir, rec.audio_filepath),
             AudioBuffer(0.4 * np.sin(np.linspace(0, 200, n)), 16000))

manifest = os.path.join(work, "manifest.jsonl")
emit_manifest(records, manifest)

client = TestClient(create_app(manifest, audio_dir))

print("segments:", client.get("/api/stats").json())

print("\ntagging two segments...")
client.post("/api/segments/Mark_01_000/tag", json={"tag": "High"})
client.post("/api/segments/Mark_01_001/tag", json={"tag": "Low", "note": "hum"})
print("stats now:", client.get("/api/stats").json())

peaks = client.get("/api/segments/Mark_01_000/peaks",
                   params={"buckets": 8}).json()["peaks"]
print("\n8-bucket waveform peaks of segment 000:")
for lo, hi in peaks:
    print(f"  [{lo:+.3f}, {hi:+.3f}]")

print(f"\ntag sidecar written to {manifest}.tags (restart-safe)")
