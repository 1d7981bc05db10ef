"""Acceptance suite: one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines.
"""

import itertools
import math
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from oracles import (
    brute_force_likelihood,
    construction_spans,
    edit_distance,
    exhaustive_best_alignment,
    fd_gradient,
    random_feasible_labels,
    random_log_probs,
    state_sequence,
)
from versealign.audio import AudioBuffer, cut_segment, peak_normalize, save_wav, to_mono_16k
from versealign.ctc import (
    LabelSequence,
    LogProbMatrix,
    collapse,
    ctc_gradient,
    ctc_log_likelihood,
    ctc_loss,
    forced_align,
    greedy_decode,
)
from versealign.metrics import cer, evaluate, eval_report, format_rate, wer
from versealign.pipeline import (
    ChapterPair,
    FilterRules,
    MANIFEST_CORE_FIELDS,
    align_chapter,
    canonical_key,
    discover_pairs,
    emit_manifest,
    filter_segments,
    parse_manifest,
    split_dataset,
    synth_emissions,
)
from versealign.review import TagStore, create_app, tagged_records
from versealign.text import build_vocab, decode_labels, encode_labels, normalize_line


def ok(message):
    print(f"\nPASS: {message}")


def test_ctc_likelihood_oracle():
    """200 random instances, T<=6, V<=4: exp(log-likelihood) matches
    brute-force path enumeration within 1e-9, in under 10 seconds."""
    started = time.monotonic()
    rng = np.random.default_rng(2024)
    for _ in range(200):
        t_len = int(rng.integers(1, 7))
        v = int(rng.integers(2, 5))
        em = LogProbMatrix(random_log_probs(rng, t_len, v))
        labels = random_feasible_labels(rng, t_len, v)
        expected = brute_force_likelihood(em.values, labels.tokens)
        got = math.exp(ctc_log_likelihood(em, labels))
        assert abs(got - expected) <= 1e-9, (t_len, v, labels.tokens)
    elapsed = time.monotonic() - started
    assert elapsed < 10.0
    ok(f"CTC likelihood matches brute-force enumeration on 200 instances "
       f"({elapsed:.2f}s)")


def test_ctc_gradient_check():
    """100 random instances, T<=5, V<=4: analytic gradient vs central
    finite differences (step 1e-5) within relative error 1e-4; rows sum
    to zero within 1e-9."""
    rng = np.random.default_rng(99)
    checked = 0
    while checked < 100:
        t_len = int(rng.integers(1, 6))
        v = int(rng.integers(2, 5))
        logits = rng.normal(scale=1.5, size=(t_len, v))
        labels = random_feasible_labels(rng, t_len, v)
        got = ctc_gradient(logits, labels)
        want = fd_gradient(logits, labels.tokens, step=1e-5)
        scale = max(np.max(np.abs(want)), 1e-12)
        assert np.max(np.abs(got - want)) / scale < 1e-4
        assert np.max(np.abs(got.sum(axis=1))) < 1e-9
        checked += 1
    ok("CTC gradient matches finite differences on 100 instances; "
       "rows sum to zero")


def test_forced_alignment_oracle():
    """T<=6, V<=3, uniform and random emissions, every feasible label
    sequence: Viterbi score and tie-broken path equal exhaustive search;
    spans collapse to the labels."""
    rng = np.random.default_rng(7)
    cases = 0
    for t_len in range(1, 7):
        for v in (2, 3):
            matrices = [np.full((t_len, v), math.log(1 / v))]
            matrices += [random_log_probs(rng, t_len, v) for _ in range(2)]
            tokens = [i for i in range(v) if i != 0]
            label_sets = [()]
            for length in range(1, t_len + 1):
                label_sets += list(itertools.product(tokens, repeat=length))
            for values in matrices:
                em = LogProbMatrix(values)
                for labels in label_sets:
                    lab = LabelSequence(labels)
                    if lab.min_frames() > t_len:
                        continue
                    oracle = exhaustive_best_alignment(values, labels)
                    path, spans, score = forced_align(em, lab)
                    assert abs(score - oracle[2]) <= 1e-9
                    impl_states = state_sequence(path.states, labels)
                    assert impl_states == oracle[1], (t_len, v, labels)
                    assert collapse(path.states, 0) == labels
                    assert tuple(s.token for s in spans) == labels
                    cases += 1
    ok(f"forced alignment equals exhaustive max-path search with the "
       f"documented tie-break on {cases} instances")


def test_hand_check_fixture():
    """Uniform T=2 binary emissions, single-token labels: loss is
    -ln(0.75) within 1e-12 (3 of 4 enumerable paths match)."""
    em = LogProbMatrix(np.full((2, 2), math.log(0.5)))
    loss = ctc_loss(em, LabelSequence((1,)))
    assert abs(loss - (-math.log(0.75))) <= 1e-12
    assert abs(loss - 0.2876820724517809) <= 1e-12
    ok("uniform T=2 binary fixture: loss = -ln 0.75 within 1e-12")


def test_metrics_oracle():
    """wer/cer vs an independent quadratic edit-distance oracle on 500
    random pairs; the worked 1/3 example; pooled corpus rates."""
    rng = np.random.default_rng(11)
    alphabet = "abc "
    for _ in range(500):
        a = "".join(rng.choice(list(alphabet), size=rng.integers(0, 12)))
        b = "".join(rng.choice(list(alphabet), size=rng.integers(0, 12)))
        ref, hyp = normalize_line(a), normalize_line(b)
        if ref.split():
            assert wer(ref, hyp) == edit_distance(ref.split(), hyp.split()) / len(ref.split())
        if ref:
            from versealign.text import grapheme_clusters
            ref_g, hyp_g = grapheme_clusters(ref), grapheme_clusters(hyp)
            assert cer(ref, hyp) == edit_distance(ref_g, hyp_g) / len(ref_g)

    assert wer("a b c", "a x c") == 1 / 3

    report = evaluate([("s1", "a", "x"), ("s2", "a b c", "a x c")])
    assert report.wer == 2 / 4
    assert report.word_total.errors == 2
    assert report.word_total.reference_length == 4
    ok("wer/cer agree with the quadratic oracle on 500 pairs; "
       "wer('a b c','a x c') = 1/3; pooled rate is sum(errors)/sum(N)")


def test_end_to_end_synthetic_corpus(tmp_path):
    """Five synthetic chapters: alignment boundaries equal construction,
    WAV cuts partition the audio, greedy transcripts score WER/CER 0,
    the manifest round-trips with the six standard fields, and a seeded
    80/20 split of the 10 segments lands 8/2 reproducibly."""
    chapters = {
        "Mark_01": ["aba ka", "buba aba"],
        "Mark_02": ["ka ka buk", "ab ab"],
        "John_01": ["ku baba", "ak uba"],
        "John_02": ["bak abu", "kab ba"],
        "John_03": ["ubu ka", "ba kuk"],
    }
    fpt = 3
    vocab = build_vocab([v for verses in chapters.values() for v in verses])
    all_records = []
    eval_pairs = []
    for chapter_id, verses in chapters.items():
        joined = " ".join(verses)
        emissions = synth_emissions(joined, vocab, fpt)
        pair = ChapterPair(chapter_id, f"{chapter_id}.wav", f"{chapter_id}.txt",
                           tuple(verses))
        records = align_chapter(pair, emissions, vocab)
        assert len(records) == 2

        # boundaries must equal the construction exactly
        tokens = encode_labels(joined, vocab)
        spans = construction_spans(tokens, fpt)
        n1 = len(encode_labels(verses[0], vocab))
        v1 = (spans[0][1], spans[n1 - 1][2])
        v2 = (spans[n1 + 1][1], spans[-1][2])
        dt = emissions.frame_duration
        assert records[0].audio_start_sec == pytest.approx(v1[0] * dt, abs=1e-12)
        assert records[0].duration == pytest.approx((v1[1] - v1[0]) * dt, abs=1e-12)
        assert records[1].audio_start_sec == pytest.approx(v2[0] * dt, abs=1e-12)
        assert records[1].duration == pytest.approx((v2[1] - v2[0]) * dt, abs=1e-12)

        # segment cuts (verses plus the gaps around them) partition the audio
        rng = np.random.default_rng(hash(chapter_id) % 2**32)
        n_samples = round(emissions.num_frames * dt * 16000)
        buf = AudioBuffer(rng.uniform(-0.5, 0.5, n_samples), 16000)
        bounds = sorted({0, v1[0], v1[1], v2[0], v2[1], emissions.num_frames})
        pieces = [cut_segment(buf, a, b, dt).samples
                  for a, b in zip(bounds[:-1], bounds[1:])]
        assert np.array_equal(np.concatenate(pieces), buf.samples)

        decoded = decode_labels(greedy_decode(emissions).tokens, vocab)
        eval_pairs.append((chapter_id, joined, decoded))
        all_records.extend(records)

    report = evaluate(eval_pairs)
    assert report.wer == 0.0
    assert report.cer == 0.0

    manifest = tmp_path / "manifest.jsonl"
    emit_manifest(all_records, manifest)
    reparsed = parse_manifest(manifest)
    assert reparsed == all_records
    import json
    first = json.loads(manifest.read_text().splitlines()[0])
    assert set(MANIFEST_CORE_FIELDS) <= set(first)

    assert len(all_records) == 10
    split_a = split_dataset(all_records, 0.8, seed=42)
    split_b = split_dataset(all_records, 0.8, seed=42)
    assert sum(r.split == "train" for r in split_a) == 8
    assert sum(r.split == "test" for r in split_a) == 2
    assert [r.split for r in split_a] == [r.split for r in split_b]
    ok("end-to-end synthetic corpus: exact boundaries, partitioning cuts, "
       "WER/CER 0.0, manifest round-trip, reproducible 8/2 split")


def test_dsp_checks():
    """440 Hz at 44.1 kHz resampled to 16 kHz: peak 440 +- 1 Hz, length
    16000 +- 1; peak normalization hits -1 dBFS within 1e-6, idempotent."""
    t = np.arange(44100) / 44100
    buf = AudioBuffer(0.5 * np.sin(2 * math.pi * 440 * t), 44100)
    out = to_mono_16k(buf)
    assert abs(out.samples.size - 16000) <= 1
    spectrum = np.abs(np.fft.rfft(out.samples))
    peak_hz = np.argmax(spectrum) * 16000 / out.samples.size
    assert abs(peak_hz - 440) <= 1.0

    norm = peak_normalize(out, -1.0)
    target = 10 ** (-1 / 20)
    assert abs(np.max(np.abs(norm.samples)) - target) <= 1e-6
    again = peak_normalize(norm, -1.0)
    assert np.max(np.abs(again.samples - norm.samples)) <= 1e-6
    ok("resampled sine peaks at 440 +- 1 Hz with 16000 +- 1 samples; "
       "peak normalize hits -1 dBFS and is idempotent")


def test_pair_discovery(tmp_path):
    """The published source filenames canonicalize to Matthew_01 and pair."""
    assert canonical_key("B01__01_Matthew__IKKTBLN1DA.MP3") == "Matthew_01"
    assert canonical_key("ikkNT_070_MAT_01_read.txt") == "Matthew_01"
    audio = tmp_path / "audio"
    text = tmp_path / "text"
    audio.mkdir()
    text.mkdir()
    (audio / "B01__01_Matthew__IKKTBLN1DA.MP3").write_bytes(b"")
    (text / "ikkNT_070_MAT_01_read.txt").write_text("Verse.\n")
    pairs, unmatched = discover_pairs(audio, text)
    assert [p.chapter_id for p in pairs] == ["Matthew_01"]
    assert unmatched == []
    ok("source filenames map to the Matthew_01 pair")


def test_report_formatting():
    """A constructed corpus with 537741 errors over 1,000,000 reference
    words formats its pooled WER as 0.537741 to six decimal places."""
    bad_ref = "w " * 537741
    good_ref = "w " * 462259
    report = evaluate([
        ("all_deleted", bad_ref.strip(), ""),
        ("all_correct", good_ref.strip(), good_ref.strip()),
    ])
    assert report.word_total.errors == 537741
    assert report.word_total.reference_length == 1_000_000
    assert report.wer == 537741 / 1_000_000
    assert format_rate(report.wer) == "0.537741"
    assert format_rate(1 / 3) == "0.333333"
    ok("pooled report formats 537741/1000000 as 0.537741 (6 decimal places)")


def test_secondary_review_loop(tmp_path):
    """API-only review loop: serve a 10-segment manifest, tag 3 segments
    High, restart the service, and require_tag_high keeps exactly those 3."""
    from test_pipeline import make_record
    records = [make_record(i, id=f"John_01_{i:03d}",
                           audio_filepath=f"John_01_{i:03d}.wav")
               for i in range(10)]
    manifest = tmp_path / "manifest.jsonl"
    emit_manifest(records, manifest)
    audio_dir = tmp_path / "audio"
    audio_dir.mkdir()
    for rec in records:
        save_wav(audio_dir / rec.audio_filepath,
                 AudioBuffer(np.zeros(1600), 16000))

    client = TestClient(create_app(str(manifest), str(audio_dir)))
    high_ids = {"John_01_002", "John_01_005", "John_01_007"}
    for sid in high_ids:
        resp = client.post(f"/api/segments/{sid}/tag", json={"tag": "High"})
        assert resp.status_code == 200

    # restart: fresh app and store over the same files
    client2 = TestClient(create_app(str(manifest), str(audio_dir)))
    listed = client2.get("/api/segments", params={"filter": "High"}).json()
    assert {s["id"] for s in listed["segments"]} == high_ids

    from dataclasses import replace
    store = TagStore(str(manifest) + ".tags")
    tagged = tagged_records(parse_manifest(manifest), store)
    kept, _ = filter_segments(tagged,
                              replace(FilterRules.disabled(), require_tag_high=True))
    assert {r.id for r in kept} == high_ids
    ok("review loop: 3 High tags survive a restart and drive the filter")
