"""Assembly of the per-product feature table.

Combines the network, metadata, image, and (optionally) wide text blocks
into one matrix with a stable column order, and round-trips it through CSV
with shortest round-trip float formatting so identical inputs produce
byte-identical files.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import content_features, network_features
from .content_features import ImageSimRow, MetadataRow
from .graph import project
from .ingest import ImageEmbedding, ProductReviewSet
from .network_features import SolverConfig

NETWORK_COLUMNS = ["degree", "eigenvector_cent", "pagerank", "clustering_coef"]
METADATA_COLUMNS = [f.name for f in fields(MetadataRow)]
IMAGE_COLUMNS = [f.name for f in fields(ImageSimRow)]
TOP2_NETWORK_COLUMNS = ["clustering_coef", "eigenvector_cent"]


def text_column_names(top_k: int = 1000) -> list[str]:
    width = max(4, len(str(top_k)))
    return [f"tfidf_{i + 1:0{width}d}" for i in range(top_k)]


@dataclass
class FeatureTable:
    """Per-product feature vectors with named columns and optional labels."""

    product_ids: list[str]
    columns: list[str]
    matrix: np.ndarray
    labels: list[int | None] | None = None
    text_terms: list[str] | None = None

    def column(self, name: str) -> np.ndarray:
        return self.matrix[:, self.columns.index(name)]

    def select(self, names: list[str]) -> np.ndarray:
        missing = [n for n in names if n not in self.columns]
        if missing:
            raise KeyError(f"unknown feature columns: {missing}")
        idx = [self.columns.index(n) for n in names]
        return self.matrix[:, idx]

    def label_array(self) -> np.ndarray:
        if self.labels is None or any(v is None for v in self.labels):
            raise ValueError("feature table has incomplete labels")
        return np.asarray(self.labels, dtype=np.int64)

    def to_csv(self, path) -> None:
        has_labels = self.labels is not None and any(
            v is not None for v in self.labels
        )
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            header = ["product_id"] + (["label"] if has_labels else []) + self.columns
            writer.writerow(header)
            for i, pid in enumerate(self.product_ids):
                row = [pid]
                if has_labels:
                    lab = self.labels[i]
                    row.append("" if lab is None else str(int(lab)))
                row.extend(repr(float(v)) for v in self.matrix[i])
                writer.writerow(row)

    @classmethod
    def from_csv(cls, path) -> "FeatureTable":
        path = Path(path)
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if not header or header[0] != "product_id":
                raise ValueError(f"{path}: not a feature table (missing product_id)")
            has_labels = len(header) > 1 and header[1] == "label"
            start = 2 if has_labels else 1
            columns = header[start:]
            ids, labels, rows = [], [], []
            for row in reader:
                ids.append(row[0])
                if has_labels:
                    labels.append(int(row[1]) if row[1] != "" else None)
                rows.append([float(v) for v in row[start:]])
        matrix = np.asarray(rows, dtype=np.float64)
        return cls(
            product_ids=ids,
            columns=columns,
            matrix=matrix,
            labels=labels if has_labels else None,
        )


def label_to_int(label: str | None) -> int | None:
    if label is None:
        return None
    return 1 if label == "fake_buyer" else 0


def compute_feature_table(
    review_sets: list[ProductReviewSet],
    embeddings: list[ImageEmbedding] | None = None,
    *,
    solver: SolverConfig | None = None,
    with_text: bool = False,
    tfidf_mode: str = "additive",
    text_top_k: int = 1000,
    text_selection: str = "per_product",
    angular: bool = False,
) -> FeatureTable:
    """Compute every enabled feature group for every product.

    The co-reviewer network is projected from the given review sets; image
    columns fall back to missing flags when no embeddings are supplied.
    """
    review_sets = sorted(review_sets, key=lambda s: s.product_id)
    solver = solver or SolverConfig()
    net = project(review_sets)
    net_feats = network_features.compute_all(net, solver)

    columns = NETWORK_COLUMNS + METADATA_COLUMNS + IMAGE_COLUMNS
    blocks = []
    embeddings = embeddings or []
    for s in review_sets:
        meta = content_features.metadata_features(s, tfidf_mode)
        img = content_features.image_features(s.product_id, embeddings, angular)
        row = [net_feats[name][s.product_id] for name in NETWORK_COLUMNS]
        row.extend(meta.as_dict().values())
        row.extend(img.as_dict().values())
        blocks.append(row)
    matrix = np.asarray(blocks, dtype=np.float64)

    text_terms = None
    if with_text:
        text_block, text_terms = content_features.text_feature_matrix(
            review_sets, top_k=text_top_k, mode=tfidf_mode, selection=text_selection
        )
        matrix = np.hstack([matrix, text_block])
        columns = columns + text_column_names(text_top_k)

    return FeatureTable(
        product_ids=[s.product_id for s in review_sets],
        columns=columns,
        matrix=matrix,
        labels=[label_to_int(s.label) for s in review_sets],
        text_terms=text_terms,
    )


def feature_groups(table: FeatureTable) -> dict[str, list[str]]:
    """Built-in named column groups present in the table."""
    groups = {
        "network": list(NETWORK_COLUMNS),
        "top2_network": list(TOP2_NETWORK_COLUMNS),
        "metadata": list(METADATA_COLUMNS),
        "image": list(IMAGE_COLUMNS),
    }
    text_cols = [c for c in table.columns if re.fullmatch(r"tfidf_\d+", c)]
    if text_cols:
        groups["text"] = text_cols
    groups["all"] = list(table.columns)
    return {
        name: cols
        for name, cols in groups.items()
        if all(c in table.columns for c in cols)
    }
