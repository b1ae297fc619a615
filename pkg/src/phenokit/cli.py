"""Command-line entry point wiring the pipeline stages together.

Subcommands operate on file manifests and write their outputs
atomically, so an interrupted run never leaves partial manifests or
reports behind. Exit codes: 0 success, 2 validation failure (with a
JSON error report on stderr), 64 usage error, 66 missing input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Sequence

from . import annotate, backends, curate, mask, merge, metrics, tiler
from ._io import (
    RASTER_SUFFIXES,
    atomic_write_json,
    atomic_write_text,
    load_image,
    read_json,
    save_image,
)
from .core import BBox, Detection, HoleClass, SeverityScore
from .errors import PhenoKitError, ValidationError

EX_OK = 0
EX_VALIDATION = 2
EX_USAGE = 64
EX_NOINPUT = 66

WORKERS_ENV = "PHENOKIT_WORKERS"


@dataclass(frozen=True)
class RunConfig:
    """Shared pipeline knobs with their standard defaults."""

    tile_size: int = tiler.DEFAULT_TILE_SIZE
    overlap_ratio: float = tiler.DEFAULT_OVERLAP_RATIO
    pad: float = 18.0
    conf_threshold: float = merge.DEFAULT_CONF_THRESHOLD
    nms_iou: float = merge.DEFAULT_NMS_IOU
    seed: int = 0
    workers: int = 1


class MissingInputError(PhenoKitError, FileNotFoundError):
    """A declared input path does not exist."""


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage problems by default; the CLI contract
    # reserves 2 for validation failures and uses 64 for usage.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _require(path: str | Path, what: str = "input") -> Path:
    path = Path(path)
    if not path.exists():
        raise MissingInputError(f"{what} not found: {path}")
    return path


def _error_report(exc: BaseException) -> None:
    report = {"error": type(exc).__name__, "detail": str(exc)}
    print(json.dumps(report), file=sys.stderr)


def _workers(args: argparse.Namespace) -> int:
    if getattr(args, "workers", None):
        return args.workers
    env = os.environ.get(WORKERS_ENV)
    return max(1, int(env)) if env else 1


def _map_ordered(fn: Callable, items: Sequence, workers: int) -> list:
    """Apply fn preserving input order, optionally on a worker pool."""
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _list_rasters(directory: Path) -> list[Path]:
    rasters = [p for p in sorted(directory.iterdir())
               if p.suffix.lower() in RASTER_SUFFIXES]
    if not rasters:
        raise MissingInputError(f"no raster images in {directory}")
    return rasters


# ---------------------------------------------------------------------------
# convert: point annotations -> label files

def _read_points_csv(path: Path) -> dict[str, tuple[tuple[int, int], list[annotate.PointAnnotation]]]:
    import csv as _csv

    by_image: dict[str, tuple[tuple[int, int], list[annotate.PointAnnotation]]] = {}
    with open(path, newline="", encoding="utf-8") as handle:
        reader = _csv.DictReader(handle)
        required = {"image", "width", "height", "x", "y", "class_id"}
        if reader.fieldnames is None or required - set(reader.fieldnames):
            raise ValidationError(
                f"{path}: points CSV needs columns {sorted(required)}"
            )
        for number, row in enumerate(reader, start=2):
            try:
                image = row["image"]
                dims = (int(row["width"]), int(row["height"]))
                point = annotate.PointAnnotation(
                    float(row["x"]), float(row["y"]),
                    HoleClass(int(row["class_id"])),
                )
            except ValueError as exc:
                raise ValidationError(f"{path} row {number}: {exc}") from None
            by_image.setdefault(image, (dims, []))[1].append(point)
            if by_image[image][0] != dims:
                raise ValidationError(
                    f"{path} row {number}: inconsistent dims for {image}"
                )
    return by_image


def cmd_convert(args: argparse.Namespace) -> int:
    points_path = _require(args.points, "points file")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    by_image = _read_points_csv(points_path)
    for image, (dims, points) in by_image.items():
        boxes = [annotate.point_to_box(p, args.pad, dims) for p in points]
        annotate.write_labels(boxes, dims, out_dir / f"{Path(image).stem}.txt")
    print(f"wrote {len(by_image)} label files to {out_dir}")
    return EX_OK


# ---------------------------------------------------------------------------
# mask: composite images onto black backgrounds

def cmd_mask(args: argparse.Namespace) -> int:
    in_dir = _require(args.input, "image directory")
    mask_dir = _require(args.masks, "mask directory")
    rasters = _list_rasters(in_dir)
    pairs = []
    for raster in rasters:
        mask_path = mask_dir / f"{raster.stem}.png"
        _require(mask_path, f"mask for {raster.name}")
        pairs.append((raster, mask_path))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    def process(pair: tuple[Path, Path]) -> str:
        raster, mask_path = pair
        composited = mask.apply_mask(load_image(raster), mask.load_mask(mask_path))
        # PNG keeps the exact-black background byte-for-byte.
        out_path = out_dir / f"{raster.stem}.png"
        save_image(composited, out_path)
        return str(out_path)

    written = _map_ordered(process, pairs, _workers(args))
    print(f"masked {len(written)} images into {out_dir}")
    return EX_OK


# ---------------------------------------------------------------------------
# tile: slice images (and labels) into overlapping tiles

def _tile_one_image(image_path: Path, args: argparse.Namespace,
                    out_dir: Path) -> list[dict[str, Any]]:
    image = load_image(image_path)
    height, width = image.shape[:2]
    grid = tiler.plan_tiles((width, height), args.tile, args.overlap)
    label_path = Path(args.labels) / f"{image_path.stem}.txt" if args.labels else None
    boxes: list[BBox] = []
    if label_path is not None:
        boxes = annotate.read_labels(label_path, (width, height))
    per_tile = [
        tiler.clip_annotations(boxes, tile, args.min_visibility)
        for tile in grid.tiles
    ]
    if args.drop_empty:
        kept = [i for i, clipped in enumerate(per_tile) if clipped]
        grid = tiler.filter_empty(grid, per_tile)
        per_tile = [per_tile[i] for i in kept]
    entries = []
    for tile, clipped in zip(grid.tiles, per_tile):
        tile_file = out_dir / tiler.tile_name(image_path.stem, tile.row, tile.col)
        save_image(tiler.crop_tile(image, tile), tile_file)
        tile_label: str | None = None
        if args.labels:
            label_file = tile_file.with_suffix(".txt")
            annotate.write_labels(clipped, (tile.width, tile.height), label_file)
            tile_label = str(label_file)
        entries.append(tiler.manifest_entry(
            str(image_path), tile, str(tile_file), tile_label,
        ))
    return entries


def cmd_tile(args: argparse.Namespace) -> int:
    in_dir = _require(args.input, "image directory")
    if args.labels:
        _require(args.labels, "label directory")
    rasters = _list_rasters(in_dir)
    if args.labels:
        for raster in rasters:
            _require(Path(args.labels) / f"{raster.stem}.txt",
                     f"labels for {raster.name}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    per_image = _map_ordered(
        lambda raster: _tile_one_image(raster, args, out_dir),
        rasters, _workers(args),
    )
    entries = [entry for group in per_image for entry in group]
    manifest_path = out_dir / "tiles.json"
    tiler.write_tile_manifest(entries, manifest_path)
    print(f"wrote {len(entries)} tiles and {manifest_path}")
    return EX_OK


# ---------------------------------------------------------------------------
# detect: run a backend over a tile manifest

def _build_detector(args: argparse.Namespace,
                    entries: Sequence[dict[str, Any]]) -> backends.DetectorBackend:
    if args.backend == "blob":
        return backends.blob_detector(
            args.intensity_threshold, args.min_area, args.max_area,
        )
    if args.backend == "replay":
        if not args.predictions:
            raise ValidationError("--backend replay requires --predictions")
        manifest = backends.read_prediction_manifest(
            _require(args.predictions, "prediction manifest"))
        return backends.replay_detector(manifest)
    if args.backend == "perturbed":
        truth: dict[str, list[BBox]] = {}
        for entry in entries:
            if not entry.get("label_path"):
                raise ValidationError(
                    "--backend perturbed needs label_path for every tile"
                )
            truth[tiler.entry_key(entry)] = annotate.read_labels(
                _require(entry["label_path"], "tile labels"),
                (entry["w"], entry["h"]),
            )
        cfg = backends.PerturbConfig(
            drop_prob=args.drop_prob, jitter_px=args.jitter,
            false_positive_rate=args.fp_rate, rng_seed=args.seed,
        )
        return backends.perturbed_detector(truth, cfg)
    raise ValidationError(f"unknown backend {args.backend!r}")


def _patch_for(entry: dict[str, Any], needs_pixels: bool) -> backends.TilePatch:
    pixels = None
    if needs_pixels:
        pixels = load_image(_require(entry["tile_path"], "tile raster"))
    return backends.TilePatch(
        tiler.entry_key(entry), entry["w"], entry["h"], pixels,
    )


def cmd_detect(args: argparse.Namespace) -> int:
    manifest_path = _require(args.tiles, "tile manifest")
    entries = tiler.read_tile_manifest(manifest_path)
    detector = _build_detector(args, entries)
    needs_pixels = args.backend == "blob"

    def process(entry: dict[str, Any]) -> tuple[str, list[Detection]]:
        patch = _patch_for(entry, needs_pixels)
        return patch.key, detector.detect(patch)

    results = _map_ordered(process, entries, _workers(args))
    payload = backends.prediction_manifest_json(dict(results))
    atomic_write_json(args.out, payload)
    total = sum(len(v) for v in payload.values())
    print(f"wrote {total} detections over {len(results)} tiles to {args.out}")
    return EX_OK


# ---------------------------------------------------------------------------
# merge: fuse per-tile detections into global sets

def _grids_from_entries(
        entries: Sequence[dict[str, Any]],
) -> dict[str, tuple[tiler.TileGrid, list[str]]]:
    """Rebuild per-image grids (and aligned tile keys) from a manifest."""
    by_image: dict[str, list[dict[str, Any]]] = {}
    for entry in entries:
        by_image.setdefault(entry["source_image"], []).append(entry)
    grids = {}
    for image, group in by_image.items():
        tiles = tuple(tiler.entry_tile(entry) for entry in group)
        width = max(t.ox + t.width for t in tiles)
        height = max(t.oy + t.height for t in tiles)
        grid = tiler.TileGrid(
            width, height, max(t.width for t in tiles), 0.0, tiles,
        )
        grids[image] = (grid, [tiler.entry_key(entry) for entry in group])
    return grids


def cmd_merge(args: argparse.Namespace) -> int:
    entries = tiler.read_tile_manifest(_require(args.tiles, "tile manifest"))
    predictions = backends.read_prediction_manifest(
        _require(args.detections, "detections file"))
    cfg = merge.MergeConfig(args.conf, args.nms_iou)
    merged: dict[str, list[Detection]] = {}
    for image, (grid, keys) in _grids_from_entries(entries).items():
        per_tile = [predictions.get(key, []) for key in keys]
        merged[image] = merge.merge_tiles(per_tile, grid, cfg)
    merge.write_detections(merged, args.out)
    total = sum(len(v) for v in merged.values())
    print(f"wrote {total} merged detections to {args.out}")
    return EX_OK


# ---------------------------------------------------------------------------
# count: aggregate merged detections into damage counts

def _per_image_counts_csv(merged: dict[str, list[Detection]]) -> str:
    import csv as _csv
    import io as _io

    buffer = _io.StringIO()
    writer = _csv.writer(buffer)
    writer.writerow(["image", "fecal", "no_fecal", "total"])
    for image in merged:
        counts = merge.count_by_class(merged[image])
        fecal = counts[HoleClass.FECAL]
        no_fecal = counts[HoleClass.NO_FECAL]
        writer.writerow([image, fecal, no_fecal, fecal + no_fecal])
    return buffer.getvalue()


def cmd_count(args: argparse.Namespace) -> int:
    merged = merge.read_detections(_require(args.merged, "merged detections"))
    if not args.manifest:
        atomic_write_text(args.out, _per_image_counts_csv(merged))
        print(f"wrote per-image counts to {args.out}")
        return EX_OK
    records = curate.read_image_manifest(_require(args.manifest, "image manifest"))
    roots = []
    for (genotype, replication), images in curate.group_roots(records).items():
        sections = [
            (curate.resolve_section(record), merged.get(record.path, []))
            for record in images
        ]
        roots.append(curate.aggregate_root_damage(genotype, replication, sections))
    atomic_write_text(args.out, curate.root_records_csv(roots))
    print(f"wrote {len(roots)} root records to {args.out}")
    return EX_OK


# ---------------------------------------------------------------------------
# curate / split

def cmd_curate(args: argparse.Namespace) -> int:
    records = curate.read_image_manifest(_require(args.manifest, "image manifest"))
    plots = curate.group_plots(records)
    if args.drop_class is not None:
        plots = curate.drop_class(plots, SeverityScore(args.drop_class))
    if args.undersample:
        score_text, _, target_text = args.undersample.partition(":")
        try:
            score = SeverityScore(int(score_text))
            target = int(target_text)
        except ValueError:
            raise ValidationError(
                f"--undersample expects SCORE:TARGET, got {args.undersample!r}"
            ) from None
        plots = curate.undersample(plots, score, target, args.seed)
    curate.write_plots(plots, args.out)
    print(f"wrote {len(plots)} plots to {args.out}")
    return EX_OK


def cmd_split(args: argparse.Namespace) -> int:
    plots = curate.read_plots(_require(args.plots, "plots file"))
    try:
        ratios = tuple(float(r) for r in args.ratios.split(","))
    except ValueError:
        raise ValidationError(f"bad --ratios {args.ratios!r}") from None
    if len(ratios) != 3:
        raise ValidationError("--ratios needs three comma-separated values")
    manifest = curate.stratified_split(plots, ratios, args.seed)
    curate.write_split_manifest(manifest, args.out)
    print(
        f"split {len(plots)} plots into "
        f"{len(manifest.train)}/{len(manifest.val)}/{len(manifest.test)} "
        f"(train/val/test) at {args.out}"
    )
    return EX_OK


# ---------------------------------------------------------------------------
# eval-det / eval-cls

def _read_truth_boxes(path: Path) -> dict[str, list[BBox]]:
    records = read_json(path)
    if not isinstance(records, list):
        raise ValidationError("truth file must be a JSON array")
    grouped: dict[str, list[BBox]] = {}
    for record in records:
        grouped.setdefault(record.get("image", ""), []).append(BBox(
            record["x_min"], record["y_min"],
            record["x_max"], record["y_max"], int(record["class"]),
        ))
    return grouped


def _write_report(prefix: str, csv_text: str, payload: dict[str, Any]) -> None:
    base = Path(prefix)
    if base.suffix.lower() in (".csv", ".json"):
        base = base.with_suffix("")
    atomic_write_text(base.with_suffix(".csv"), csv_text)
    atomic_write_json(base.with_suffix(".json"), payload)
    print(f"wrote {base.with_suffix('.csv')} and {base.with_suffix('.json')}")


def cmd_eval_det(args: argparse.Namespace) -> int:
    predictions = merge.read_detections(_require(args.pred, "predictions"))
    truths = _read_truth_boxes(_require(args.truth, "truth file"))
    report = metrics.evaluate_detections(predictions, truths, args.iou)
    _write_report(args.out, metrics.detection_report_csv(report),
                  metrics.detection_report_json(report))
    return EX_OK


def cmd_eval_cls(args: argparse.Namespace) -> int:
    scores = backends.read_score_manifest(_require(args.pred, "predictions"))
    records = curate.read_image_manifest(_require(args.truth, "truth manifest"))
    plots = curate.group_plots(records)
    classifier = backends.replay_classifier(
        scores, allowed=tuple(SeverityScore))
    pairs = []
    for plot in plots:
        predicted, _ = classifier.classify(backends.PlotPair(plot.plot_id))
        pairs.append((plot.severity, predicted))
    classes = sorted(
        {true for true, _ in pairs} | {pred for _, pred in pairs},
        key=lambda s: s.value,
    )
    report = metrics.class_report(metrics.confusion_matrix(pairs, classes))
    _write_report(args.out, metrics.class_report_csv(report),
                  metrics.class_report_json(report))
    return EX_OK


# ---------------------------------------------------------------------------
# pipeline: mask -> tile -> detect -> merge -> count

def _pipeline_one(image_path: Path, masks_dir: str | None, cfg: RunConfig,
                  detector: backends.DetectorBackend) -> tuple[str, list[Detection]]:
    image = load_image(image_path)
    if masks_dir:
        mask_path = Path(masks_dir) / f"{image_path.stem}.png"
        image = mask.apply_mask(image, mask.load_mask(mask_path))
    height, width = image.shape[:2]
    grid = tiler.plan_tiles((width, height), cfg.tile_size, cfg.overlap_ratio)
    per_tile = []
    for tile in grid.tiles:
        patch = backends.TilePatch(
            tiler.tile_key(str(image_path), tile.row, tile.col),
            tile.width, tile.height, tiler.crop_tile(image, tile),
        )
        per_tile.append(detector.detect(patch))
    merge_cfg = merge.MergeConfig(cfg.conf_threshold, cfg.nms_iou)
    return str(image_path), merge.merge_tiles(per_tile, grid, merge_cfg)


def cmd_pipeline(args: argparse.Namespace) -> int:
    in_dir = _require(args.input, "image directory")
    rasters = _list_rasters(in_dir)
    if args.masks:
        _require(args.masks, "mask directory")
        for raster in rasters:
            _require(Path(args.masks) / f"{raster.stem}.png",
                     f"mask for {raster.name}")
    if args.backend == "replay":
        manifest = backends.read_prediction_manifest(
            _require(args.predictions, "prediction manifest"))
        detector: backends.DetectorBackend = backends.replay_detector(manifest)
    elif args.backend == "blob":
        detector = backends.blob_detector(
            args.intensity_threshold, args.min_area, args.max_area)
    else:
        raise ValidationError(
            f"pipeline supports blob and replay backends, not {args.backend!r}"
        )
    cfg = RunConfig(
        tile_size=args.tile, overlap_ratio=args.overlap,
        conf_threshold=args.conf, nms_iou=args.nms_iou,
        seed=args.seed, workers=_workers(args),
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = _map_ordered(
        lambda raster: _pipeline_one(raster, args.masks, cfg, detector),
        rasters, cfg.workers,
    )
    merged = dict(results)
    merge.write_detections(merged, out_dir / "merged.json")
    atomic_write_text(out_dir / "counts.csv", _per_image_counts_csv(merged))
    total = sum(len(v) for v in merged.values())
    print(f"pipeline finished: {total} detections over {len(merged)} images")
    return EX_OK


# ---------------------------------------------------------------------------
# parser

def _add_worker_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--workers", type=int, default=None,
                        help=f"worker threads (default ${WORKERS_ENV} or 1)")


def _add_blob_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--intensity-threshold", type=int, default=100,
                        help="pixels darker than this are blob candidates")
    parser.add_argument("--min-area", type=int, default=30)
    parser.add_argument("--max-area", type=int, default=150)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="phenokit",
                     description="Weevil damage assessment pipelines")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("convert", help="point annotations to label files")
    p.add_argument("--points", required=True)
    p.add_argument("--pad", type=float, default=18.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("mask", help="composite images onto black backgrounds")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--masks", required=True)
    p.add_argument("--out", required=True)
    _add_worker_flags(p)
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("tile", help="slice images into overlapping tiles")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--tile", type=int, default=tiler.DEFAULT_TILE_SIZE)
    p.add_argument("--overlap", type=float, default=tiler.DEFAULT_OVERLAP_RATIO)
    p.add_argument("--labels", default=None)
    p.add_argument("--min-visibility", type=float,
                   default=tiler.DEFAULT_MIN_VISIBILITY)
    p.add_argument("--drop-empty", action="store_true",
                   help="remove tiles without annotations")
    p.add_argument("--out", required=True)
    _add_worker_flags(p)
    p.set_defaults(func=cmd_tile)

    p = sub.add_parser("detect", help="run a detector backend over tiles")
    p.add_argument("--tiles", required=True, help="tile manifest JSON")
    p.add_argument("--backend", choices=("blob", "replay", "perturbed"),
                   default="blob")
    p.add_argument("--predictions", default=None,
                   help="stored predictions for --backend replay")
    _add_blob_flags(p)
    p.add_argument("--drop-prob", type=float, default=0.0)
    p.add_argument("--jitter", type=float, default=0.0)
    p.add_argument("--fp-rate", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_worker_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("merge", help="fuse per-tile detections globally")
    p.add_argument("--detections", required=True)
    p.add_argument("--tiles", required=True, help="tile manifest JSON")
    p.add_argument("--conf", type=float, default=merge.DEFAULT_CONF_THRESHOLD)
    p.add_argument("--nms-iou", type=float, default=merge.DEFAULT_NMS_IOU)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("count", help="aggregate detections into hole counts")
    p.add_argument("--merged", required=True)
    p.add_argument("--manifest", default=None,
                   help="image manifest for per-root aggregation")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("curate", help="group, filter, and balance plots")
    p.add_argument("--manifest", required=True)
    p.add_argument("--drop-class", type=int, default=None)
    p.add_argument("--undersample", default=None, metavar="SCORE:TARGET")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_curate)

    p = sub.add_parser("split", help="stratified train/val/test split")
    p.add_argument("--plots", required=True)
    p.add_argument("--ratios", default="0.8,0.1,0.1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("eval-det", help="detection metrics (AP, mAP@0.5)")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--iou", type=float, default=0.5)
    p.add_argument("--out", required=True, help="report path prefix")
    p.set_defaults(func=cmd_eval_det)

    p = sub.add_parser("eval-cls", help="classification metrics")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True, help="image manifest CSV")
    p.add_argument("--out", required=True, help="report path prefix")
    p.set_defaults(func=cmd_eval_cls)

    p = sub.add_parser("pipeline",
                       help="mask, tile, detect, merge, and count in one run")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--masks", default=None)
    p.add_argument("--backend", choices=("blob", "replay"), default="blob")
    p.add_argument("--predictions", default=None)
    _add_blob_flags(p)
    p.add_argument("--tile", type=int, default=tiler.DEFAULT_TILE_SIZE)
    p.add_argument("--overlap", type=float, default=tiler.DEFAULT_OVERLAP_RATIO)
    p.add_argument("--conf", type=float, default=merge.DEFAULT_CONF_THRESHOLD)
    p.add_argument("--nms-iou", type=float, default=merge.DEFAULT_NMS_IOU)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_worker_flags(p)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EX_USAGE
    try:
        return args.func(args)
    except MissingInputError as exc:
        _error_report(exc)
        return EX_NOINPUT
    except FileNotFoundError as exc:
        _error_report(exc)
        return EX_NOINPUT
    except PhenoKitError as exc:
        _error_report(exc)
        return EX_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
