"""Command-line interface: ingest, search, eval, analyze, denseset, serve.

Configuration is resolved in one place with a fixed precedence: built-in
defaults, then the key=value config file, then command-line flags, then
the TZR_ENCODER_URL / TZR_INDEX environment variables. The same resolved
EngineConfig feeds every verb, so a config file written for `tzr ingest`
drives `tzr serve` unchanged.
"""

from __future__ import annotations

import functools
import json
import os
from dataclasses import fields as dataclass_fields
from pathlib import Path

import click

from .denseset import AnnotationSet, build_denseset
from .encoders import EncoderError, resolve_encoder
from .index import RetrievalIndex, load_eval_pairs, save_eval_pairs
from .ingest import EngineConfig, IngestError, IngestJob, ingest
from .pipeline import MODES, PipelineParams

ENV_ENCODER = "TZR_ENCODER_URL"
ENV_INDEX = "TZR_INDEX"

_PARAM_FIELDS = {f.name: f.type for f in dataclass_fields(PipelineParams)}
_INT_KEYS = {
    "kernel",
    "stride",
    "clusters",
    "kmeans_seed",
    "kmeans_max_iters",
    "grid_rows",
    "grid_cols",
}
_FLOAT_KEYS = {"threshold", "kmeans_tol", "fps"}
_TOP_KEYS = {"encoder_url", "index_path", "http_bind", "mode", "fps"}


def parse_config_file(path) -> dict:
    """Parse a flat key=value config file (comments with #, quotes optional)."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise click.ClickException(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip().strip("\"'")
        if key not in _TOP_KEYS and key not in _PARAM_FIELDS:
            raise click.ClickException(f"{path}:{lineno}: unknown config key {key!r}")
        values[key] = value
    return values


def _convert(key: str, value):
    if isinstance(value, str):
        try:
            if key in _INT_KEYS:
                return int(value)
            if key in _FLOAT_KEYS:
                return float(value)
        except ValueError as exc:
            raise click.ClickException(f"config key {key}: {exc}") from exc
    return value


def resolve_engine_config(config_path: str | None, flag_values: dict) -> EngineConfig:
    """Merge defaults, config file, flags, and env vars into an EngineConfig."""
    merged: dict = {}
    if config_path:
        merged.update(parse_config_file(config_path))
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    if os.environ.get(ENV_ENCODER):
        merged["encoder_url"] = os.environ[ENV_ENCODER]
    if os.environ.get(ENV_INDEX):
        merged["index_path"] = os.environ[ENV_INDEX]

    merged = {k: _convert(k, v) for k, v in merged.items()}
    if "mode" in merged and merged["mode"] not in MODES:
        raise click.ClickException(f"mode must be one of {MODES}")

    try:
        params = PipelineParams().with_overrides(
            **{k: v for k, v in merged.items() if k in _PARAM_FIELDS}
        )
        return EngineConfig(
            encoder_url=merged.get("encoder_url"),
            index_path=merged.get("index_path", "tzr.idx"),
            http_bind=merged.get("http_bind", "127.0.0.1:8765"),
            mode=merged.get("mode", "inverse_attention"),
            fps=merged.get("fps", 1.0),
            params=params,
        )
    except (TypeError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc


def config_options(fn):
    """Flags shared by every verb; None means "not provided"."""
    decorators = [
        click.option("--config", "config_path", type=click.Path(exists=True), default=None, help="key=value config file"),
        click.option("--encoder", "encoder_url", default=None, help="encoder selector: builtin:test or http(s) URL"),
        click.option("--index", "index_path", type=click.Path(), default=None, help="index file path"),
        click.option("--mode", type=click.Choice(MODES), default=None, help="embedding mode for ingest"),
        click.option("--fps", type=float, default=None, help="video sampling rate"),
        click.option("--threshold", type=float, default=None, help="low-attention cutoff"),
        click.option("--kernel", type=int, default=None, help="detection window side"),
        click.option("--stride", type=int, default=None, help="detection window step"),
        click.option("--clusters", type=int, default=None, help="max merged regions"),
        click.option("--kmeans-seed", type=int, default=None, help="clustering seed"),
        click.option("--kmeans-max-iters", type=int, default=None, help="clustering iteration cap"),
        click.option("--kmeans-tol", type=float, default=None, help="clustering convergence tolerance"),
        click.option("--grid-rows", type=int, default=None, help="grid baseline rows"),
        click.option("--grid-cols", type=int, default=None, help="grid baseline cols"),
        click.option("--bind", "http_bind", default=None, help="serve address host:port"),
    ]
    for dec in reversed(decorators):
        fn = dec(fn)
    return fn


def _engine_config(kwargs: dict) -> EngineConfig:
    config_path = kwargs.pop("config_path")
    return resolve_engine_config(config_path, kwargs)


def friendly_errors(fn):
    """Surface operational failures as one-line errors, not tracebacks."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except FileNotFoundError as exc:
            raise click.ClickException(f"file not found: {exc.filename or exc}") from exc
        except (EncoderError, IngestError, ValueError) as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


@click.group()
@click.version_option(package_name="tzr")
def main():
    """Training-free semantic frame retrieval for crowded scenes."""


@main.command("ingest")
@click.argument("source", type=click.Path(exists=True))
@config_options
@friendly_errors
def ingest_cmd(source, **kwargs):
    """Embed a video or image directory into a retrieval index."""
    cfg = _engine_config(kwargs)
    job = IngestJob(
        source=source,
        index_path=cfg.index_path,
        params=cfg.params,
        mode=cfg.mode,
        fps=cfg.fps,
        encoder=cfg.encoder_url,
    )
    report = ingest(job)
    click.echo(report.summary())


@main.command("search")
@click.argument("query")
@click.option("--k", type=int, default=10, show_default=True, help="results to return")
@click.option("--global-only", is_flag=True, help="score against whole-frame embeddings only")
@config_options
@friendly_errors
def search_cmd(query, k, global_only, **kwargs):
    """Rank indexed frames against a text query."""
    cfg = _engine_config(kwargs)
    index = RetrievalIndex.load(cfg.index_path)
    encoder = resolve_encoder(cfg.encoder_url)
    results = index.topk(encoder.encode_text(query), k, global_only=global_only)
    for rank, r in enumerate(results, 1):
        record = index.get(r.frame_id)
        ts = "-" if record.frame.timestamp is None else f"{record.frame.timestamp:.3f}s"
        click.echo(
            f"{rank:3d}. frame {r.frame_id:>6d}  score {r.score:+.4f}  "
            f"{r.best_source:<10s}  {ts:>10s}  {record.frame.source_uri}"
        )


@main.command("eval")
@click.argument("pairs_file", type=click.Path(exists=True))
@click.option("--k", "k_values", type=int, multiple=True, default=(1, 5, 10), show_default=True)
@click.option("--global-only", is_flag=True, help="score against whole-frame embeddings only")
@config_options
@friendly_errors
def eval_cmd(pairs_file, k_values, global_only, **kwargs):
    """Compute recall@K for query/relevant pairs (JSONL) over the index."""
    cfg = _engine_config(kwargs)
    index = RetrievalIndex.load(cfg.index_path)
    encoder = resolve_encoder(cfg.encoder_url)
    pairs = load_eval_pairs(pairs_file)
    click.echo(f"{len(pairs)} queries against {len(index)} frames")
    for k in sorted(set(k_values)):
        value = index.recall_at_k(pairs, k, encoder.encode_text, global_only=global_only)
        click.echo(f"recall@{k} = {value:.4f}")


@main.command("analyze")
@click.argument("image", type=click.Path(exists=True))
@click.option("--query", default=None, help="text query to score the crops against")
@click.option("--out", "out_path", type=click.Path(), default=None, help="write full stage JSON here")
@config_options
@friendly_errors
def analyze_cmd(image, query, out_path, **kwargs):
    """Run the detection pipeline on one image and show every stage."""
    import cv2

    from .server import analysis_payload

    cfg = _engine_config(kwargs)
    encoder = resolve_encoder(cfg.encoder_url)
    bgr = cv2.imread(image, cv2.IMREAD_COLOR)
    if bgr is None:
        raise click.ClickException(f"undecodable image: {image}")
    payload = analysis_payload(cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB), cfg.params, query, encoder)

    click.echo(f"image {payload['frame']['width']}x{payload['frame']['height']}")
    click.echo(f"low-attention windows: {len(payload['candidates'])}")
    for i, (box, members) in enumerate(zip(payload["regions"], payload["member_counts"])):
        # labeled from 1 to line up with search's "region:<j>" source strings
        line = f"region {i + 1}: box={box} members={members}"
        if payload["region_cosines"] is not None:
            line += f" cosine={payload['region_cosines'][i]:+.4f}"
        click.echo(line)
    if query is not None:
        click.echo(f"global cosine: {payload['global_cosine']:+.4f}")
        best = payload["best"]
        click.echo(f"best: {best['source']} score {best['score']:+.4f}")
    if out_path:
        Path(out_path).write_text(json.dumps(payload, indent=2), encoding="utf-8")
        click.echo(f"stage JSON written to {out_path}")


@main.command("denseset")
@click.argument("annotations", type=click.Path(exists=True))
@click.option("--out", "out_path", type=click.Path(), default="denseset_pairs.jsonl", show_default=True, help="eval-pairs JSONL output")
@click.option("--captions-out", type=click.Path(), default=None, help="optional CSV of image_id,caption,instance_count")
@friendly_errors
def denseset_cmd(annotations, out_path, captions_out):
    """Build the crowded-decile benchmark from COCO-style annotations."""
    ann = AnnotationSet.from_coco_json(annotations)
    pairs, eval_pairs, report = build_denseset(ann)
    save_eval_pairs(eval_pairs, out_path)
    click.echo(report.summary())
    click.echo(f"eval pairs written to {out_path}")
    if captions_out:
        lines = ["image_id,caption,instance_count"]
        lines += [f"{p.image_id},{p.caption},{p.instance_count}" for p in pairs]
        Path(captions_out).write_text("\n".join(lines) + "\n", encoding="utf-8")
        click.echo(f"captions written to {captions_out}")


@main.command("serve")
@click.option("--frontend", type=click.Path(), default=None, help="static console build to mount at /console")
@config_options
@friendly_errors
def serve_cmd(frontend, **kwargs):
    """Serve the HTTP API over a saved index."""
    from .server import serve

    cfg = _engine_config(kwargs)
    if not Path(cfg.index_path).exists():
        raise click.ClickException(f"index not found: {cfg.index_path} (run `tzr ingest` first)")
    click.echo(f"serving {cfg.index_path} on http://{cfg.http_bind}")
    serve(cfg, frontend_dir=frontend)


if __name__ == "__main__":
    main()
