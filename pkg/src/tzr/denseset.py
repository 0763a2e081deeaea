"""Crowded-benchmark builder over COCO-style instance annotations.

Selects the most object-crowded decile of a dataset and captions each
selected image with an object class appearing exactly once in it, emitting
query/relevant eval pairs. Captions picked this way are deliberately
under-descriptive: one class name can match many images, which is what
makes the benchmark hard.

Input is the COCO instances JSON subset: images[] (id, file_name, width,
height), annotations[] (image_id, category_id), categories[] (id, name).
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field

from .index import EvalPair


@dataclass(frozen=True)
class AnnotationSet:
    """Object-instance annotations for a set of images."""

    images: tuple[tuple[int, str, int, int], ...]  # (image_id, file_name, w, h)
    instances: tuple[tuple[int, int], ...]  # (image_id, class_id)
    classes: tuple[tuple[int, str], ...]  # (class_id, name)

    def __post_init__(self):
        image_ids = {i for i, *_ in self.images}
        class_ids = {c for c, _ in self.classes}
        for image_id, class_id in self.instances:
            if image_id not in image_ids:
                raise ValueError(f"instance references unknown image {image_id}")
            if class_id not in class_ids:
                raise ValueError(f"instance references unknown class {class_id}")

    @classmethod
    def from_coco_json(cls, path) -> "AnnotationSet":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        try:
            images = tuple(
                (int(i["id"]), str(i.get("file_name", "")), int(i.get("width", 0)), int(i.get("height", 0)))
                for i in doc["images"]
            )
            instances = tuple(
                (int(a["image_id"]), int(a["category_id"])) for a in doc["annotations"]
            )
            classes = tuple((int(c["id"]), str(c["name"])) for c in doc["categories"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed COCO annotations: {exc}") from exc
        return cls(images=images, instances=instances, classes=classes)


@dataclass(frozen=True)
class DensePair:
    """One emitted benchmark entry."""

    image_id: int
    caption: str  # a class name occurring exactly once in the image
    instance_count: int


@dataclass
class DensesetReport:
    total_images: int
    selected_images: int
    decile_threshold: int
    emitted: int
    dropped_no_singleton: int
    vocabulary_size: int
    notes: list[str] = field(default_factory=list)

    def summary(self) -> str:
        lines = [
            f"images: {self.total_images}",
            f"crowded-decile threshold (instances): {self.decile_threshold}",
            f"selected: {self.selected_images}",
            f"emitted pairs: {self.emitted}",
            f"dropped (no singleton class): {self.dropped_no_singleton}",
            f"class vocabulary size: {self.vocabulary_size}",
        ]
        lines.extend(self.notes)
        return "\n".join(lines)


def count_instances(ann: AnnotationSet) -> dict[int, int]:
    """Total object instances per image; unannotated images count 0."""
    counts = {image_id: 0 for image_id, *_ in ann.images}
    for image_id, _ in ann.instances:
        counts[image_id] += 1
    return counts


def select_top_decile(counts: dict[int, int]) -> set[int]:
    """The most crowded ~10% of images.

    The threshold is the ceil(N/10)-th largest instance count; every image
    at or above it is kept, so ties at the threshold can push the
    selection past 10%.
    """
    if not counts:
        raise ValueError("empty image set")
    ordered = sorted(counts.values(), reverse=True)
    threshold = ordered[math.ceil(0.10 * len(ordered)) - 1]
    return {image_id for image_id, c in counts.items() if c >= threshold}


def decile_threshold(counts: dict[int, int]) -> int:
    ordered = sorted(counts.values(), reverse=True)
    return ordered[math.ceil(0.10 * len(ordered)) - 1]


def pick_singleton_class(
    image_classes: list[int],
    rarity: dict[int, int],
) -> int | None:
    """Choose the caption class for one image.

    Among classes occurring exactly once in the image, returns the one
    with the lowest global frequency (ties break toward the lowest
    class_id); None when nothing is singleton.
    """
    singletons = [c for c, n in Counter(image_classes).items() if n == 1]
    if not singletons:
        return None
    return min(singletons, key=lambda c: (rarity.get(c, 0), c))


def build_denseset(
    ann: AnnotationSet,
    relevance: str = "caption",
) -> tuple[list[DensePair], list[EvalPair], DensesetReport]:
    """Run the full benchmark construction.

    Selects the crowded decile, captions each selected image with its
    rarest singleton class (rarity counted over the selected subset), and
    emits eval pairs whose query is the class name. With
    relevance="caption" a query's relevant set is the selected images
    assigned that caption; relevance="contains" instead counts every
    selected image containing the class at all.
    """
    if relevance not in ("caption", "contains"):
        raise ValueError("relevance must be 'caption' or 'contains'")

    counts = count_instances(ann)
    selected = select_top_decile(counts)
    threshold = decile_threshold(counts)
    class_names = dict(ann.classes)

    per_image: dict[int, list[int]] = {i: [] for i in selected}
    for image_id, class_id in ann.instances:
        if image_id in selected:
            per_image[image_id].append(class_id)

    rarity = Counter(c for classes in per_image.values() for c in classes)

    pairs: list[DensePair] = []
    dropped = 0
    for image_id in sorted(selected):
        choice = pick_singleton_class(per_image[image_id], rarity)
        if choice is None:
            dropped += 1
            continue
        pairs.append(
            DensePair(
                image_id=image_id,
                caption=class_names[choice],
                instance_count=counts[image_id],
            )
        )

    name_to_id = {name: cid for cid, name in ann.classes}
    eval_pairs: list[EvalPair] = []
    for caption in sorted({p.caption for p in pairs}):
        if relevance == "caption":
            relevant = {p.image_id for p in pairs if p.caption == caption}
        else:
            cid = name_to_id[caption]
            captioned = {p.image_id for p in pairs}
            relevant = {
                i for i in captioned if cid in per_image[i]
            }
        eval_pairs.append(EvalPair(query=caption, relevant=frozenset(relevant)))

    report = DensesetReport(
        total_images=len(ann.images),
        selected_images=len(selected),
        decile_threshold=threshold,
        emitted=len(pairs),
        dropped_no_singleton=dropped,
        vocabulary_size=len(ann.classes),
    )
    if len(ann.classes) != 81:
        count = len(ann.classes)
        report.notes.append(
            f"note: input vocabulary has {count} class{'es' if count != 1 else ''}"
        )
    return pairs, eval_pairs, report
