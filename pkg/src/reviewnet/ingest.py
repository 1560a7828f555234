"""Review data model and file ingestion.

Reads review files (csv or jsonl) and image-embedding files (jsonl),
validates every record, and groups reviews into per-product, time-ordered
review sets. Loaded values are plain immutable records; loading the same
file twice, or the same rows in a different order, produces identical
output.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

REVIEW_FIELDS = [
    "product_id",
    "reviewer_id",
    "rating",
    "timestamp",
    "text",
    "helpful_votes",
    "has_photo",
    "label",
]
EMBEDDING_FIELDS = ["owner", "product_id", "review_id", "image_id", "vector"]

LABELS = ("fake_buyer", "organic")
OWNERS = ("product_image", "review_image")
EMBEDDING_DIM = 2048

_EPOCH = datetime(1970, 1, 1)


class IngestError(ValueError):
    """Raised for malformed or inconsistent input files."""


@dataclass(frozen=True)
class ReviewRecord:
    """One review of one product by one reviewer."""

    product_id: str
    reviewer_id: str
    rating: int
    timestamp: float  # days since epoch, fractional
    text: str
    helpful_votes: int
    has_photo: bool
    label: str | None = None


@dataclass(frozen=True, eq=False)
class ImageEmbedding:
    """A 2048-dim feature vector for one product or review image."""

    owner: str
    product_id: str
    review_id: str | None
    image_id: str
    vector: np.ndarray


@dataclass
class ProductReviewSet:
    """All reviews of one product, sorted by (timestamp, reviewer_id)."""

    product_id: str
    reviews: list[ReviewRecord]
    label: str | None = None


def parse_timestamp(value) -> float:
    """Accept a numeric day count or an ISO-8601 date/datetime; return fractional days since 1970-01-01."""
    if isinstance(value, (int, float)):
        return float(value)
    text = str(value).strip()
    try:
        return float(text)
    except ValueError:
        pass
    try:
        dt = datetime.fromisoformat(text)
    except ValueError:
        raise IngestError(f"timestamp not numeric or ISO-8601: {value!r}")
    if dt.tzinfo is not None:
        dt = dt.astimezone(timezone.utc).replace(tzinfo=None)
    return (dt - _EPOCH).total_seconds() / 86400.0


def _parse_bool(value, line: int):
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("true", "1"):
        return True
    if text in ("false", "0"):
        return False
    raise IngestError(f"line {line}: has_photo must be boolean, got {value!r}")


def _make_record(raw: dict, line: int) -> ReviewRecord:
    for key in ("product_id", "reviewer_id"):
        if raw.get(key) in (None, ""):
            raise IngestError(f"line {line}: {key} is empty")
    try:
        rating = int(raw["rating"])
    except (TypeError, ValueError):
        raise IngestError(f"line {line}: rating is not an integer: {raw['rating']!r}")
    if rating not in (1, 2, 3, 4, 5):
        raise IngestError(f"line {line}: rating must be in 1..5, got {rating}")
    try:
        timestamp = parse_timestamp(raw["timestamp"])
    except IngestError as exc:
        raise IngestError(f"line {line}: {exc}")
    try:
        helpful = int(raw["helpful_votes"])
    except (TypeError, ValueError):
        raise IngestError(
            f"line {line}: helpful_votes is not an integer: {raw['helpful_votes']!r}"
        )
    if helpful < 0:
        raise IngestError(f"line {line}: helpful_votes must be >= 0, got {helpful}")
    label = raw.get("label")
    if label in ("", None):
        label = None
    elif label not in LABELS:
        raise IngestError(
            f"line {line}: label must be one of {LABELS} or empty, got {label!r}"
        )
    text = raw.get("text")
    if text is None:
        text = ""
    return ReviewRecord(
        product_id=str(raw["product_id"]),
        reviewer_id=str(raw["reviewer_id"]),
        rating=rating,
        timestamp=timestamp,
        text=str(text),
        helpful_votes=helpful,
        has_photo=_parse_bool(raw["has_photo"], line),
        label=label,
    )


def _iter_raw_reviews(path: Path, fmt: str):
    """Yield (raw dict, 1-based file line number) for every data row."""
    if fmt == "csv":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise IngestError(f"{path}: empty file")
            if sorted(reader.fieldnames) != sorted(REVIEW_FIELDS):
                raise IngestError(
                    f"{path}: header {reader.fieldnames} does not match "
                    f"expected fields {REVIEW_FIELDS}"
                )
            for i, row in enumerate(reader):
                if None in row.values() or None in row:
                    raise IngestError(f"line {i + 2}: wrong number of fields")
                yield row, i + 2
    elif fmt == "jsonl":
        with open(path, encoding="utf-8") as fh:
            for i, raw_line in enumerate(fh):
                if not raw_line.strip():
                    continue
                try:
                    obj = json.loads(raw_line)
                except json.JSONDecodeError as exc:
                    raise IngestError(f"line {i + 1}: invalid JSON: {exc}")
                keys = set(obj)
                required = set(REVIEW_FIELDS) - {"label"}
                if not required <= keys or not keys <= set(REVIEW_FIELDS):
                    raise IngestError(
                        f"line {i + 1}: keys {sorted(keys)} do not match schema "
                        f"{REVIEW_FIELDS}"
                    )
                yield obj, i + 1
    else:
        raise ValueError(f"format must be 'csv' or 'jsonl', got {fmt!r}")


def group_reviews(records: list[ReviewRecord]) -> list[ProductReviewSet]:
    """Group records by product, sort each group by (timestamp, reviewer_id).

    Rejects inconsistent product-level labels. Output order is sorted by
    product_id, so the result does not depend on input order.
    """
    by_product: dict[str, list[ReviewRecord]] = {}
    for rec in records:
        by_product.setdefault(rec.product_id, []).append(rec)
    sets = []
    for pid in sorted(by_product):
        group = sorted(by_product[pid], key=lambda r: (r.timestamp, r.reviewer_id))
        labels = {r.label for r in group}
        if len(labels) > 1:
            raise IngestError(
                f"product {pid}: inconsistent labels {sorted(str(x) for x in labels)}"
            )
        sets.append(ProductReviewSet(product_id=pid, reviews=group, label=group[0].label))
    return sets


def load_reviews(path, fmt: str | None = None) -> list[ProductReviewSet]:
    """Load a reviews file and return per-product review sets.

    The format is inferred from the extension unless given explicitly.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"reviews file not found: {path}")
    if fmt is None:
        fmt = "jsonl" if path.suffix in (".jsonl", ".json") else "csv"
    records = []
    seen: dict[tuple, int] = {}
    for raw, line in _iter_raw_reviews(path, fmt):
        rec = _make_record(raw, line)
        key = (rec.product_id, rec.reviewer_id, rec.timestamp)
        if key in seen:
            raise IngestError(
                f"line {line}: duplicate (product_id, reviewer_id, timestamp) "
                f"{key} first seen at line {seen[key]}"
            )
        seen[key] = line
        records.append(rec)
    if not records:
        raise IngestError(f"{path}: no review records")
    return group_reviews(records)


def write_reviews(path, sets: list[ProductReviewSet], fmt: str | None = None) -> None:
    """Write review sets back to csv or jsonl in the ingest schema."""
    path = Path(path)
    if fmt is None:
        fmt = "jsonl" if path.suffix in (".jsonl", ".json") else "csv"
    rows = [r for s in sorted(sets, key=lambda s: s.product_id) for r in s.reviews]
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(REVIEW_FIELDS)
            for r in rows:
                writer.writerow(
                    [
                        r.product_id,
                        r.reviewer_id,
                        r.rating,
                        repr(r.timestamp),
                        r.text,
                        r.helpful_votes,
                        "true" if r.has_photo else "false",
                        r.label or "",
                    ]
                )
    elif fmt == "jsonl":
        with open(path, "w", encoding="utf-8") as fh:
            for r in rows:
                obj = {
                    "product_id": r.product_id,
                    "reviewer_id": r.reviewer_id,
                    "rating": r.rating,
                    "timestamp": r.timestamp,
                    "text": r.text,
                    "helpful_votes": r.helpful_votes,
                    "has_photo": r.has_photo,
                    "label": r.label,
                }
                fh.write(json.dumps(obj) + "\n")
    else:
        raise ValueError(f"format must be 'csv' or 'jsonl', got {fmt!r}")


def load_embeddings(path) -> list[ImageEmbedding]:
    """Load image embeddings from a jsonl file, one 2048-dim vector per line."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"embeddings file not found: {path}")
    out = []
    with open(path, encoding="utf-8") as fh:
        for i, raw_line in enumerate(fh):
            if not raw_line.strip():
                continue
            line = i + 1
            try:
                obj = json.loads(raw_line)
            except json.JSONDecodeError as exc:
                raise IngestError(f"line {line}: invalid JSON: {exc}")
            missing = set(EMBEDDING_FIELDS) - {"review_id"} - set(obj)
            if missing:
                raise IngestError(f"line {line}: missing keys {sorted(missing)}")
            owner = obj["owner"]
            if owner not in OWNERS:
                raise IngestError(
                    f"line {line}: owner must be one of {OWNERS}, got {owner!r}"
                )
            review_id = obj.get("review_id")
            if owner == "review_image" and review_id in (None, ""):
                raise IngestError(f"line {line}: review_image requires a review_id")
            vector = np.asarray(obj["vector"], dtype=np.float64)
            if vector.ndim != 1 or vector.shape[0] != EMBEDDING_DIM:
                raise IngestError(
                    f"line {line}: vector must have {EMBEDDING_DIM} entries, "
                    f"got {vector.size}"
                )
            if not np.all(np.isfinite(vector)):
                raise IngestError(f"line {line}: vector has non-finite entries")
            if not np.any(vector):
                raise IngestError(f"line {line}: zero vector (similarity undefined)")
            out.append(
                ImageEmbedding(
                    owner=owner,
                    product_id=str(obj["product_id"]),
                    review_id=None if review_id in (None, "") else str(review_id),
                    image_id=str(obj["image_id"]),
                    vector=vector,
                )
            )
    return out


def write_embeddings(path, embeddings: list[ImageEmbedding]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in embeddings:
            obj = {
                "owner": e.owner,
                "product_id": e.product_id,
                "review_id": e.review_id,
                "image_id": e.image_id,
                "vector": [float(v) for v in e.vector],
            }
            fh.write(json.dumps(obj) + "\n")


def index_embeddings(
    embeddings: list[ImageEmbedding],
) -> dict[tuple[str, str], list[ImageEmbedding]]:
    """Index embeddings by (product_id, owner)."""
    index: dict[tuple[str, str], list[ImageEmbedding]] = {}
    for e in embeddings:
        index.setdefault((e.product_id, e.owner), []).append(e)
    return index
