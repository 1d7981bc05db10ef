"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import json
import sys

import click

from . import audio as audio_mod
from . import ctc, metrics, pipeline, text
from .config import Config, ConfigError, load_config


class DataError(Exception):
    """Wraps errors caused by bad input data (exit code 2)."""


def _load_cfg(ctx) -> Config:
    return ctx.obj["config"]


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True),
              help="Key-value config file.")
@click.option("--seed", type=int, default=None, help="Override the config seed.")
@click.pass_context
def cli(ctx, config_path, seed):
    """Corpus construction and evaluation toolkit for CTC forced alignment."""
    cfg = load_config(config_path) if config_path else Config()
    if seed is not None:
        cfg.seed = seed
    ctx.obj = {"config": cfg}


@cli.command()
@click.argument("input_file", type=click.Path(exists=True))
@click.option("-o", "--output", type=click.Path(), default=None,
              help="Write normalized lines here instead of stdout.")
def normalize(input_file, output):
    """Normalize a transcript file (dedup, drop empties)."""
    with open(input_file, encoding="utf-8") as f:
        lines = f.read().splitlines()
    normalized = text.normalize_corpus(lines)
    out = "\n".join(normalized) + ("\n" if normalized else "")
    if output:
        with open(output, "w", encoding="utf-8") as f:
            f.write(out)
    else:
        click.echo(out, nl=False)


@cli.command()
@click.argument("audio_dir", type=click.Path(exists=True, file_okay=False))
@click.argument("text_dir", type=click.Path(exists=True, file_okay=False))
def pairs(audio_dir, text_dir):
    """Discover chapter audio/text pairs by canonical name."""
    found, unmatched = pipeline.discover_pairs(audio_dir, text_dir)
    for pair in found:
        click.echo(f"{pair.chapter_id}\t{pair.audio_path}\t{pair.text_path}")
    if unmatched:
        click.echo("# unmatched:", err=True)
        for path in unmatched:
            click.echo(f"#   {path}", err=True)


@cli.command()
@click.argument("emission_file", type=click.Path(exists=True))
@click.argument("text_file", type=click.Path(exists=True))
@click.option("--chapter-id", default=None, help="Defaults to the text file's canonical key.")
@click.option("--audio-file", "audio_file", type=click.Path(), default=None,
              help="Chapter audio whose name seeds the pair.")
@click.option("-o", "--manifest", "manifest_out", type=click.Path(), required=True)
@click.pass_context
def align(ctx, emission_file, text_file, chapter_id, audio_file, manifest_out):
    """Force-align one chapter's emissions to its verses; write a manifest."""
    cfg = _load_cfg(ctx)
    try:
        emissions = ctc.read_emission_file(emission_file)
        if emissions.tokens is None:
            raise DataError("emission file lacks a vocabulary line")
        vocab = text.Vocab(emissions.tokens)
        chapter = chapter_id or pipeline.canonical_key(text_file)
        if chapter is None:
            raise DataError(f"cannot derive a chapter id from {text_file!r}; "
                            "pass --chapter-id")
        with open(text_file, encoding="utf-8") as f:
            verse_lines = tuple(f.read().splitlines())
        pair = pipeline.ChapterPair(chapter, audio_file or "", text_file, verse_lines)
        records = pipeline.align_chapter(pair, emissions, vocab,
                                         wildcard=cfg.wildcard)
        pipeline.emit_manifest(records, manifest_out)
        click.echo(f"wrote {len(records)} segments to {manifest_out}")
    except (ctc.EmissionFileError, ctc.InvalidLabelError,
            pipeline.ChapterAlignmentError, ValueError) as e:
        raise DataError(str(e)) from e


@cli.command()
@click.argument("manifest", type=click.Path(exists=True))
@click.argument("chapter_wav", type=click.Path(exists=True))
@click.option("-o", "--out-dir", type=click.Path(file_okay=False), required=True)
@click.pass_context
def segment(ctx, manifest, chapter_wav, out_dir):
    """Cut per-segment WAVs from a chapter recording."""
    import os
    cfg = _load_cfg(ctx)
    try:
        records = pipeline.parse_manifest(manifest)
        buf = audio_mod.to_mono_16k(audio_mod.load_wav(chapter_wav))
        buf = audio_mod.peak_normalize(buf, cfg.target_dbfs)
        os.makedirs(out_dir, exist_ok=True)
        for rec in records:
            start = round(rec.audio_start_sec / cfg.frame_duration)
            end = round((rec.audio_start_sec + rec.duration) / cfg.frame_duration)
            cut = audio_mod.cut_segment(buf, start, end, cfg.frame_duration)
            audio_mod.save_wav(os.path.join(out_dir, rec.audio_filepath), cut)
        click.echo(f"wrote {len(records)} segment files to {out_dir}")
    except (pipeline.ManifestError, audio_mod.WavParseError,
            audio_mod.UnsupportedFormatError, audio_mod.SpanOutOfRangeError) as e:
        raise DataError(str(e)) from e


@cli.command()
@click.argument("manifest", type=click.Path(exists=True))
@click.option("-o", "--output", type=click.Path(), default=None,
              help="Rewrite manifest with refreshed stats (default: in place).")
def stats(manifest, output):
    """Recompute word/char counts and rates for every record."""
    try:
        records = [pipeline.compute_quality_stats(r)
                   for r in pipeline.parse_manifest(manifest)]
        pipeline.emit_manifest(records, output or manifest)
        click.echo(f"updated stats for {len(records)} records")
    except (pipeline.ManifestError, pipeline.InvalidRecordError) as e:
        raise DataError(str(e)) from e


@cli.command("filter")
@click.argument("manifest", type=click.Path(exists=True))
@click.option("-o", "--output", type=click.Path(), required=True)
@click.option("--rejected", "rejected_out", type=click.Path(), default=None)
@click.option("--require-high/--no-require-high", default=None,
              help="Keep only High-tagged segments (overrides config).")
@click.pass_context
def filter_cmd(ctx, manifest, output, rejected_out, require_high):
    """Apply quality rules; write kept records (and optionally rejects)."""
    cfg = _load_cfg(ctx)
    try:
        rules = pipeline.FilterRules(
            cfg.min_duration, cfg.max_duration, cfg.min_word_rate,
            cfg.max_word_rate, cfg.min_char_rate, cfg.max_char_rate,
            cfg.require_tag_high if require_high is None else require_high)
    except pipeline.FilterConfigError as e:
        raise DataError(str(e)) from e
    try:
        records = pipeline.parse_manifest(manifest)
        kept, rejected = pipeline.filter_segments(records, rules)
        pipeline.emit_manifest(kept, output)
        if rejected_out:
            with open(rejected_out, "w", encoding="utf-8") as f:
                for rec, reason in rejected:
                    f.write(json.dumps({"id": rec.id, "reason": reason}) + "\n")
        click.echo(f"kept {len(kept)}, rejected {len(rejected)}")
    except pipeline.ManifestError as e:
        raise DataError(str(e)) from e


@cli.command()
@click.argument("manifest", type=click.Path(exists=True))
@click.option("-o", "--output", type=click.Path(), default=None)
@click.option("--ratio", type=float, default=None, help="Train fraction.")
@click.pass_context
def split(ctx, manifest, output, ratio):
    """Assign train/test splits with a seeded shuffle."""
    cfg = _load_cfg(ctx)
    try:
        records = pipeline.parse_manifest(manifest)
        records = pipeline.split_dataset(records, ratio or cfg.split_ratio,
                                         cfg.seed, cfg.split_by_chapter)
        pipeline.emit_manifest(records, output or manifest)
        n_train = sum(1 for r in records if r.split == pipeline.SPLIT_TRAIN)
        click.echo(f"train {n_train}, test {len(records) - n_train}")
    except (pipeline.ManifestError, pipeline.EmptyDatasetError) as e:
        raise DataError(str(e)) from e


@cli.command("manifest")
@click.argument("manifest_path", type=click.Path(exists=True))
@click.option("--csv", "csv_out", type=click.Path(), default=None,
              help="Also emit the metadata CSV.")
def manifest_cmd(manifest_path, csv_out):
    """Validate a manifest; optionally export the metadata CSV."""
    try:
        records = pipeline.parse_manifest(manifest_path)
        if csv_out:
            pipeline.emit_metadata_csv(records, csv_out)
        click.echo(f"{len(records)} records OK")
    except (pipeline.ManifestError, pipeline.InvalidRecordError) as e:
        raise DataError(str(e)) from e


@cli.command("eval")
@click.option("--manifest", "manifest_path", type=click.Path(exists=True), required=True)
@click.option("--hyp", "hyp_path", type=click.Path(exists=True), required=True,
              help="Hypothesis file: id<TAB>text per line.")
@click.option("--report", "report_out", type=click.Path(), default=None,
              help="Write the machine-readable report here.")
def eval_cmd(manifest_path, hyp_path, report_out):
    """Score hypotheses against manifest references (pooled WER/CER)."""
    try:
        records = pipeline.parse_manifest(manifest_path)
        hypotheses = {}
        with open(hyp_path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                if "\t" not in line:
                    raise DataError(f"{hyp_path}:{lineno}: expected id<TAB>text")
                seg_id, hyp = line.split("\t", 1)
                if seg_id in hypotheses:
                    raise DataError(f"{hyp_path}:{lineno}: duplicate id {seg_id!r}")
                hypotheses[seg_id] = hyp
        report = metrics.eval_report(records, hypotheses)
        click.echo(metrics.render_report(report))
        if report_out:
            with open(report_out, "w", encoding="utf-8") as f:
                for obj in metrics.report_records(report):
                    f.write(json.dumps(obj, ensure_ascii=False) + "\n")
    except (pipeline.ManifestError, ValueError) as e:
        raise DataError(str(e)) from e


@cli.group()
def review():
    """Human quality review."""


@review.command()
@click.option("--manifest", "manifest_path", type=click.Path(exists=True), required=True)
@click.option("--audio-dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--tags", "tag_path", type=click.Path(), default=None,
              help="Tag sidecar file (default: <manifest>.tags).")
@click.option("--static-dir", type=click.Path(), default=None,
              help="Built frontend assets to serve at /.")
@click.option("--port", type=int, default=None)
@click.pass_context
def serve(ctx, manifest_path, audio_dir, tag_path, static_dir, port):
    """Run the review service."""
    import uvicorn

    from .review import create_app
    cfg = _load_cfg(ctx)
    try:
        app = create_app(manifest_path, audio_dir, tag_path, static_dir)
    except pipeline.ManifestError as e:
        raise DataError(str(e)) from e
    uvicorn.run(app, host="127.0.0.1", port=port or cfg.review_port)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Abort:
        return 1
    except click.ClickException as e:
        e.show()
        return 1
    except ConfigError as e:
        click.echo(f"config error: {e}", err=True)
        return 1
    except DataError as e:
        click.echo(f"error: {e}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
