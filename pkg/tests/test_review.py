import threading

import numpy as np
import pytest
from fastapi.testclient import TestClient

from versealign.audio import AudioBuffer, save_wav
from versealign.pipeline import (
    TAG_HIGH,
    FilterRules,
    emit_manifest,
    filter_segments,
    parse_manifest,
)
from versealign.review import TagStore, compute_peaks, create_app, tagged_records
from test_pipeline import make_record


@pytest.fixture
def corpus(tmp_path):
    records = [make_record(i, id=f"Mark_01_{i:03d}") for i in range(25)]
    manifest = tmp_path / "manifest.jsonl"
    emit_manifest(records, manifest)
    audio_dir = tmp_path / "audio"
    audio_dir.mkdir()
    rng = np.random.default_rng(0)
    for rec in records:
        buf = AudioBuffer(rng.uniform(-0.5, 0.5, 1600), 16000)
        save_wav(audio_dir / rec.audio_filepath, buf)
    return manifest, audio_dir, records


def make_client(corpus):
    manifest, audio_dir, _ = corpus
    app = create_app(str(manifest), str(audio_dir))
    return TestClient(app)


class TestListSegments:
    def test_fresh_manifest_all_untagged(self, corpus):
        client = make_client(corpus)
        resp = client.get("/api/segments", params={"filter": "Untagged"})
        assert resp.status_code == 200
        assert resp.json()["total"] == 25

    def test_pagination(self, corpus):
        client = make_client(corpus)
        sizes = []
        for page in (1, 2, 3, 4):
            resp = client.get("/api/segments",
                              params={"page": page, "page_size": 10})
            sizes.append(len(resp.json()["segments"]))
        assert sizes == [10, 10, 5, 0]

    def test_filter_high_after_tagging(self, corpus):
        client = make_client(corpus)
        client.post("/api/segments/Mark_01_003/tag", json={"tag": "High"})
        resp = client.get("/api/segments", params={"filter": "High"})
        ids = [s["id"] for s in resp.json()["segments"]]
        assert ids == ["Mark_01_003"]

    def test_summaries_expose_stats(self, corpus):
        client = make_client(corpus)
        seg = client.get("/api/segments").json()["segments"][0]
        assert {"id", "duration", "word_rate", "char_rate", "tag"} <= set(seg)


class TestAudio:
    def test_audio_is_riff(self, corpus):
        client = make_client(corpus)
        resp = client.get("/api/segments/Mark_01_000/audio")
        assert resp.status_code == 200
        assert resp.content[:4] == b"RIFF"

    def test_unknown_id_404(self, corpus):
        client = make_client(corpus)
        assert client.get("/api/segments/nope/audio").status_code == 404

    def test_missing_file_410(self, corpus):
        manifest, audio_dir, records = corpus
        (audio_dir / records[0].audio_filepath).unlink()
        client = make_client(corpus)
        resp = client.get(f"/api/segments/{records[0].id}/audio")
        assert resp.status_code == 410

    def test_peaks_payload(self, corpus):
        client = make_client(corpus)
        resp = client.get("/api/segments/Mark_01_000/peaks")
        peaks = resp.json()["peaks"]
        assert len(peaks) == 800
        assert all(lo <= hi for lo, hi in peaks)


class TestComputePeaks:
    def test_all_zero_audio(self):
        assert compute_peaks(np.zeros(100), 10) == [[0.0, 0.0]] * 10

    def test_bucket_count_capped_by_samples(self):
        assert len(compute_peaks(np.zeros(5), 800)) == 5

    def test_envelope_bounds_samples(self):
        samples = np.random.default_rng(2).uniform(-1, 1, 1000)
        for (lo, hi) in compute_peaks(samples, 50):
            assert -1 <= lo <= hi <= 1


class TestSetTag:
    def test_tag_then_retag_last_write_wins(self, corpus):
        client = make_client(corpus)
        client.post("/api/segments/Mark_01_001/tag", json={"tag": "High"})
        client.post("/api/segments/Mark_01_001/tag", json={"tag": "Low"})
        seg = client.get("/api/segments", params={"filter": "Low"}).json()
        assert [s["id"] for s in seg["segments"]] == ["Mark_01_001"]

    def test_invalid_tag_lists_allowed(self, corpus):
        client = make_client(corpus)
        resp = client.post("/api/segments/Mark_01_001/tag", json={"tag": "Great"})
        assert resp.status_code == 422
        assert "High" in resp.text and "Fixable" in resp.text

    def test_unknown_id(self, corpus):
        client = make_client(corpus)
        resp = client.post("/api/segments/nope/tag", json={"tag": "High"})
        assert resp.status_code == 404

    def test_note_persisted(self, corpus):
        client = make_client(corpus)
        client.post("/api/segments/Mark_01_002/tag",
                    json={"tag": "Fixable", "note": "clipped start"})
        seg = client.get("/api/segments", params={"filter": "Fixable"}).json()
        assert seg["segments"][0]["note"] == "clipped start"


class TestStats:
    def test_fresh_manifest(self, corpus):
        client = make_client(corpus)
        stats = client.get("/api/stats").json()
        assert stats["untagged"] == 25
        assert stats["total"] == 25

    def test_counts_sum_invariant(self, corpus):
        client = make_client(corpus)
        for i, tag in enumerate(["High", "Low", "Fixable", "High"]):
            client.post(f"/api/segments/Mark_01_{i:03d}/tag", json={"tag": tag})
        stats = client.get("/api/stats").json()
        assert sum(stats["counts"].values()) + stats["untagged"] == stats["total"]
        assert stats["untagged"] == 21


class TestPersistence:
    def test_tags_survive_restart(self, corpus):
        manifest, audio_dir, _ = corpus
        client = make_client(corpus)
        client.post("/api/segments/Mark_01_004/tag", json={"tag": "High"})
        # simulate kill-and-restart: new app over the same files
        client2 = TestClient(create_app(str(manifest), str(audio_dir)))
        seg = client2.get("/api/segments", params={"filter": "High"}).json()
        assert [s["id"] for s in seg["segments"]] == ["Mark_01_004"]

    def test_concurrent_distinct_ids_never_lose_writes(self, corpus, tmp_path):
        store = TagStore(str(tmp_path / "tags.jsonl"))
        ids = [f"seg_{i:03d}" for i in range(40)]

        def work(chunk):
            for sid in chunk:
                store.set(sid, TAG_HIGH)

        threads = [threading.Thread(target=work, args=(ids[i::4],)) for i in range(4)]
        for th in threads:
            th.start()
        for th in threads:
            th.join()
        reloaded = TagStore(store.path)
        assert set(reloaded.entries) == set(ids)

    def test_filter_consumes_exactly_the_high_set(self, corpus):
        manifest, audio_dir, records = corpus
        client = make_client(corpus)
        for i in (1, 5, 9):
            client.post(f"/api/segments/Mark_01_{i:03d}/tag", json={"tag": "High"})
        client.post("/api/segments/Mark_01_002/tag", json={"tag": "Low"})
        store = TagStore(str(manifest) + ".tags")
        tagged = tagged_records(parse_manifest(manifest), store)
        from dataclasses import replace
        rules = replace(FilterRules.disabled(), require_tag_high=True)
        kept, _ = filter_segments(tagged, rules)
        assert {r.id for r in kept} == {"Mark_01_001", "Mark_01_005", "Mark_01_009"}
