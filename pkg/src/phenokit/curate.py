"""Dataset composition: plot grouping, balancing, splitting, pairing,
and per-root damage aggregation.

All sampling flows through an explicit seed, so any curation run can be
reproduced exactly from its manifest and seed.
"""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from ._io import atomic_write_json, atomic_write_text, load_image, read_json
from .core import VALID_SECTIONS, Detection, HoleClass, ImageRecord, SeverityScore
from .errors import (
    EmptyInputError,
    InvalidParameterError,
    SeverityConflictError,
    ValidationError,
)
from .merge import count_by_class

DEFAULT_RATIOS = (0.8, 0.1, 0.1)

MANIFEST_COLUMNS = (
    "image_path", "plot_id", "section", "severity", "replication",
    "width", "height", "mask_path",
)


@dataclass(frozen=True)
class PlotRecord:
    """A field experimental unit: one or two images plus its expert score."""

    plot_id: str
    images: tuple[str, ...]
    severity: SeverityScore
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not 1 <= len(self.images) <= 2:
            raise ValidationError(
                f"plot {self.plot_id}: expected 1 or 2 images, "
                f"got {len(self.images)}"
            )


@dataclass(frozen=True)
class SplitManifest:
    """Disjoint train/val/test partitions of a plot set."""

    train: tuple[str, ...]
    val: tuple[str, ...]
    test: tuple[str, ...]
    seed: int
    ratios: tuple[float, float, float] = DEFAULT_RATIOS


@dataclass(frozen=True)
class ImagePair:
    """A dual-input sample; second is None when a black placeholder
    of the first image's dimensions stands in for a missing view."""

    first: str
    second: str | None
    synthetic_black: bool


@dataclass(frozen=True)
class SectionDamage:
    section: str
    fecal: int
    no_fecal: int

    @property
    def total(self) -> int:
        return self.fecal + self.no_fecal


@dataclass(frozen=True)
class RootDamageRecord:
    """Hole counts for one root (genotype x replication), by section."""

    genotype: str
    replication: int
    sections: tuple[SectionDamage, ...]

    @property
    def fecal_count(self) -> int:
        return sum(s.fecal for s in self.sections)

    @property
    def no_fecal_count(self) -> int:
        return sum(s.no_fecal for s in self.sections)

    @property
    def total(self) -> int:
        return self.fecal_count + self.no_fecal_count


def group_plots(records: Sequence[ImageRecord]) -> list[PlotRecord]:
    """Batch images into one record per plot, in first-seen order.

    Plots have exactly one expert score by protocol, so conflicting
    severities within a plot are an error, not a vote.
    """
    grouped: dict[str, list[ImageRecord]] = {}
    for record in records:
        if record.plot_id is None:
            raise ValidationError(f"image {record.path} has no plot_id")
        if record.severity is None:
            raise ValidationError(f"image {record.path} has no severity")
        grouped.setdefault(record.plot_id, []).append(record)
    plots = []
    for plot_id, members in grouped.items():
        severities = {m.severity for m in members}
        if len(severities) > 1:
            raise SeverityConflictError(
                f"plot {plot_id} labelled with multiple severities: "
                f"{sorted(s.value for s in severities)}"
            )
        if len(members) > 2:
            raise ValidationError(
                f"plot {plot_id} has {len(members)} images, expected <= 2"
            )
        plots.append(PlotRecord(
            plot_id, tuple(m.path for m in members), members[0].severity,
        ))
    return plots


def drop_class(plots: Sequence[PlotRecord],
               score: SeverityScore) -> list[PlotRecord]:
    """Remove every plot of the given severity, preserving order."""
    return [p for p in plots if p.severity != score]


def undersample(plots: Sequence[PlotRecord], score: SeverityScore,
                target: int, seed: int) -> list[PlotRecord]:
    """Reduce one severity class to exactly ``target`` plots.

    Dual-image plots are kept first; the remainder is filled from
    single-image plots sampled uniformly under the seed. Other classes
    pass through untouched, and input order is preserved.
    """
    matching = [p for p in plots if p.severity == score]
    if target > len(matching):
        raise InvalidParameterError(
            f"target {target} exceeds the {len(matching)} available "
            f"plots of score {score.value}"
        )
    duals = [p.plot_id for p in matching if len(p.images) == 2]
    singles = [p.plot_id for p in matching if len(p.images) == 1]
    rng = random.Random(seed)
    if target <= len(duals):
        keep = set(rng.sample(duals, target))
    else:
        keep = set(duals) | set(rng.sample(singles, target - len(duals)))
    return [p for p in plots if p.severity != score or p.plot_id in keep]


def _largest_remainder(counts: Sequence[int], ratio: float) -> list[int]:
    # Per-class floors topped up toward ceil(total * ratio), largest
    # fractional remainders first. The global target is a ceiling so
    # a 10% cut of 383 plots allocates 39, not 38.
    exact = [count * ratio for count in counts]
    base = [math.floor(x) for x in exact]
    target = math.ceil(sum(counts) * ratio)
    extras = target - sum(base)
    order = sorted(range(len(counts)),
                   key=lambda i: (-(exact[i] - base[i]), i))
    allocation = list(base)
    for i in order[:extras]:
        allocation[i] += 1
    return allocation


def stratified_split(plots: Sequence[PlotRecord],
                     ratios: tuple[float, float, float] = DEFAULT_RATIOS,
                     seed: int = 0) -> SplitManifest:
    """Partition plots into train/val/test stratified by severity.

    Per class, plots are shuffled under the seed; validation and test
    take their largest-remainder allocations and training absorbs the
    rest. Deterministic for a given seed.
    """
    if not plots:
        raise EmptyInputError("no plots to split")
    if not math.isclose(sum(ratios), 1.0, abs_tol=1e-9):
        raise InvalidParameterError(f"ratios must sum to 1, got {ratios}")
    by_class: dict[SeverityScore, list[str]] = {}
    for plot in plots:
        by_class.setdefault(plot.severity, []).append(plot.plot_id)
    classes = sorted(by_class, key=lambda s: s.value)
    counts = [len(by_class[c]) for c in classes]
    val_alloc = _largest_remainder(counts, ratios[1])
    test_alloc = _largest_remainder(counts, ratios[2])
    rng = random.Random(seed)
    train: list[str] = []
    val: list[str] = []
    test: list[str] = []
    for cls, count, n_val, n_test in zip(classes, counts, val_alloc, test_alloc):
        n_test = min(n_test, count - n_val)  # tiny classes cannot overdraw
        ids = list(by_class[cls])
        rng.shuffle(ids)
        val.extend(ids[:n_val])
        test.extend(ids[n_val:n_val + n_test])
        train.extend(ids[n_val + n_test:])
    return SplitManifest(tuple(train), tuple(val), tuple(test), seed, ratios)


def make_pairs(plot: PlotRecord) -> ImagePair:
    """Build the dual-input sample for a plot.

    Single-image plots get a synthetic all-black second view so every
    sample has the same shape.
    """
    if len(plot.images) == 0:
        raise ValidationError(f"plot {plot.plot_id} has no images")
    if len(plot.images) == 2:
        return ImagePair(plot.images[0], plot.images[1], False)
    return ImagePair(plot.images[0], None, True)


def black_placeholder(image: np.ndarray) -> np.ndarray:
    """All-black stand-in with the same dimensions as a real view."""
    return np.zeros_like(image)


def load_pair(pair: ImagePair, loader=load_image) -> tuple[np.ndarray, np.ndarray]:
    """Materialize both views of a pair as arrays."""
    first = loader(pair.first)
    if pair.synthetic_black:
        return first, black_placeholder(first)
    return first, loader(pair.second)


def parse_genotype_section(name: str) -> tuple[str, str] | None:
    """Split an image label like ``NASPOT A`` into (genotype, section).

    Recognizes space, underscore, and hyphen separators; returns None
    when the trailing token is not a section letter.
    """
    stem = name.rsplit(".", 1)[0] if "." in name else name
    for separator in (" ", "_", "-"):
        head, _, tail = stem.rpartition(separator)
        if head and tail.upper() in VALID_SECTIONS:
            return head, tail.upper()
    return None


def aggregate_root_damage(
        genotype: str, replication: int,
        sections: Iterable[tuple[str, Sequence[Detection]]]) -> RootDamageRecord:
    """Sum per-class hole counts over a root's imaged sections."""
    seen: set[str] = set()
    damage = []
    for section, detections in sections:
        if section not in VALID_SECTIONS:
            raise ValidationError(
                f"root {genotype}/{replication}: unknown section {section!r}"
            )
        if section in seen:
            raise ValidationError(
                f"root {genotype}/{replication}: duplicate section {section}"
            )
        seen.add(section)
        counts = count_by_class(detections)
        damage.append(SectionDamage(
            section, counts[HoleClass.FECAL], counts[HoleClass.NO_FECAL],
        ))
    return RootDamageRecord(genotype, replication, tuple(damage))


def group_roots(records: Sequence[ImageRecord]) -> dict[tuple[str, int], list[ImageRecord]]:
    """Group lab images by (genotype, replication), in first-seen order."""
    roots: dict[tuple[str, int], list[ImageRecord]] = {}
    for record in records:
        if record.plot_id is None:
            raise ValidationError(f"image {record.path} has no genotype")
        replication = 1 if record.replication is None else record.replication
        roots.setdefault((record.plot_id, replication), []).append(record)
    return roots


def resolve_section(record: ImageRecord) -> str:
    """Section from the manifest, falling back to the label convention."""
    if record.section is not None:
        return record.section
    parsed = parse_genotype_section(Path(record.path).name)
    if parsed is None:
        raise ValidationError(
            f"image {record.path}: no section column and the file name "
            f"does not end in a section letter"
        )
    return parsed[1]


# ---------------------------------------------------------------------------
# Manifest formats

def read_image_manifest(path: str | Path) -> list[ImageRecord]:
    """Read the input CSV manifest into image records."""
    records = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise ValidationError(f"{path}: empty manifest")
        missing = {"image_path", "width", "height"} - set(reader.fieldnames)
        if missing:
            raise ValidationError(
                f"{path}: manifest missing columns {sorted(missing)}"
            )
        for number, row in enumerate(reader, start=2):
            try:
                severity = row.get("severity") or None
                records.append(ImageRecord(
                    path=row["image_path"],
                    width=int(row["width"]),
                    height=int(row["height"]),
                    plot_id=row.get("plot_id") or None,
                    section=(row.get("section") or None),
                    replication=(int(row["replication"])
                                 if row.get("replication") else None),
                    severity=(SeverityScore(int(severity))
                              if severity else None),
                    mask_path=row.get("mask_path") or None,
                ))
            except (KeyError, ValueError) as exc:
                raise ValidationError(f"{path} row {number}: {exc}") from None
    return records


def image_manifest_csv(records: Sequence[ImageRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(MANIFEST_COLUMNS)
    for r in records:
        writer.writerow([
            r.path, r.plot_id or "", r.section or "",
            r.severity.value if r.severity else "",
            r.replication if r.replication is not None else "",
            r.width, r.height, r.mask_path or "",
        ])
    return buffer.getvalue()


def write_image_manifest(records: Sequence[ImageRecord],
                         path: str | Path) -> None:
    atomic_write_text(path, image_manifest_csv(records))


def plots_to_json(plots: Sequence[PlotRecord]) -> list[dict[str, Any]]:
    return [
        {
            "plot_id": p.plot_id,
            "severity": p.severity.value,
            "images": list(p.images),
        }
        for p in plots
    ]


def plots_from_json(payload: Sequence[Mapping[str, Any]]) -> list[PlotRecord]:
    return [
        PlotRecord(
            entry["plot_id"],
            tuple(entry["images"]),
            SeverityScore(int(entry["severity"])),
        )
        for entry in payload
    ]


def write_plots(plots: Sequence[PlotRecord], path: str | Path) -> None:
    atomic_write_json(path, plots_to_json(plots))


def read_plots(path: str | Path) -> list[PlotRecord]:
    return plots_from_json(read_json(path))


def write_split_manifest(manifest: SplitManifest, path: str | Path) -> None:
    atomic_write_json(path, {
        "seed": manifest.seed,
        "ratios": list(manifest.ratios),
        "train": list(manifest.train),
        "val": list(manifest.val),
        "test": list(manifest.test),
    })


def read_split_manifest(path: str | Path) -> SplitManifest:
    payload = read_json(path)
    return SplitManifest(
        tuple(payload["train"]), tuple(payload["val"]), tuple(payload["test"]),
        int(payload["seed"]), tuple(payload["ratios"]),
    )


def root_records_csv(records: Sequence[RootDamageRecord]) -> str:
    """Per-root counts, one row per (genotype, replication)."""
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    section_columns = [f"section_{s.lower()}" for s in VALID_SECTIONS]
    writer.writerow([
        "genotype", "replication", "fecal_count", "no_fecal_count", "total",
        *section_columns,
    ])
    for record in records:
        totals = {s.section: s.total for s in record.sections}
        writer.writerow([
            record.genotype, record.replication,
            record.fecal_count, record.no_fecal_count, record.total,
            *[totals.get(s, "") for s in VALID_SECTIONS],
        ])
    return buffer.getvalue()
