"""Product co-reviewer network.

Projects per-product review sets onto a weighted undirected product-product
graph: an edge (i, j) exists when at least one reviewer reviewed both
products, and its weight is the number of distinct such reviewers. A
reviewer who reviewed the same product twice still counts once per product
pair. Products with no shared reviewers stay in the node set as isolated
nodes.

The projection runs one pass over reviewers: a reviewer with k products
contributes k*(k-1)/2 pair increments, so the cost is the sum of k_u^2 over
reviewers, which keeps million-edge projections tractable.
"""

from __future__ import annotations

import csv

import numpy as np

from .ingest import ProductReviewSet


class ProductNetwork:
    """Weighted undirected product graph with a CSR view for the solvers."""

    def __init__(self, products: list[str], edge_i, edge_j, edge_w):
        self.products = list(products)
        self.index = {p: i for i, p in enumerate(self.products)}
        self.edge_i = np.asarray(edge_i, dtype=np.int64)
        self.edge_j = np.asarray(edge_j, dtype=np.int64)
        self.edge_w = np.asarray(edge_w, dtype=np.int64)
        n = len(self.products)
        self.n = n
        # adjacency stored in both directions, sorted by source then target
        src = np.concatenate([self.edge_i, self.edge_j])
        dst = np.concatenate([self.edge_j, self.edge_i])
        wgt = np.concatenate([self.edge_w, self.edge_w])
        order = np.lexsort((dst, src))
        self.adj_src = src[order]
        self.adj_dst = dst[order]
        self.adj_w = wgt[order]
        counts = np.bincount(self.adj_src, minlength=n)
        self.indptr = np.concatenate([[0], np.cumsum(counts)])

    @property
    def num_edges(self) -> int:
        return int(self.edge_i.size)

    def neighbors(self, i: int) -> np.ndarray:
        return self.adj_dst[self.indptr[i] : self.indptr[i + 1]]

    def weighted_degrees(self) -> np.ndarray:
        """Per-node sum of incident edge weights (shared-reviewer counts)."""
        return np.bincount(self.adj_src, weights=self.adj_w, minlength=self.n).astype(
            np.int64
        )

    def binary_degrees(self) -> np.ndarray:
        """Per-node neighbor counts on the binary adjacency."""
        return np.diff(self.indptr)

    def adjacency_matvec(self, x: np.ndarray) -> np.ndarray:
        """y = A x on the binary adjacency."""
        return np.bincount(self.adj_src, weights=x[self.adj_dst], minlength=self.n)

    def dense_adjacency(self) -> np.ndarray:
        """Binary adjacency as a dense float matrix (small graphs only)."""
        a = np.zeros((self.n, self.n))
        a[self.adj_src, self.adj_dst] = 1.0
        return a

    def edges(self):
        """Iterate (product_i, product_j, weight) with product_i < product_j."""
        for i, j, w in zip(self.edge_i, self.edge_j, self.edge_w):
            yield self.products[i], self.products[j], int(w)


def project(review_sets: list[ProductReviewSet]) -> ProductNetwork:
    """Build the co-reviewer network from per-product review sets."""
    if not review_sets:
        raise ValueError("cannot project an empty list of review sets")
    products = sorted(s.product_id for s in review_sets)
    if len(set(products)) != len(products):
        raise ValueError("duplicate product_id across review sets")
    index = {p: i for i, p in enumerate(products)}
    n = len(products)

    reviewer_products: dict[str, set[int]] = {}
    for s in review_sets:
        pi = index[s.product_id]
        for r in s.reviews:
            reviewer_products.setdefault(r.reviewer_id, set()).add(pi)

    blocks_i, blocks_j = [], []
    for prods in reviewer_products.values():
        if len(prods) < 2:
            continue
        arr = np.fromiter(sorted(prods), dtype=np.int64)
        ii, jj = np.triu_indices(arr.size, k=1)
        blocks_i.append(arr[ii])
        blocks_j.append(arr[jj])

    if not blocks_i:
        return ProductNetwork(products, [], [], [])

    pi = np.concatenate(blocks_i)
    pj = np.concatenate(blocks_j)
    keys = pi * n + pj
    uniq, counts = np.unique(keys, return_counts=True)
    return ProductNetwork(products, uniq // n, uniq % n, counts)


def export_edges(net: ProductNetwork, min_weight: int = 1) -> list[tuple[str, str, int]]:
    """Edge rows (product_i, product_j, weight) with weight >= min_weight.

    Each unordered pair appears once, sorted lexicographically.
    """
    if min_weight < 1:
        raise ValueError(f"min_weight must be >= 1, got {min_weight}")
    return [(a, b, w) for a, b, w in net.edges() if w >= min_weight]


def write_edge_csv(path, net: ProductNetwork, min_weight: int = 1) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["product_i", "product_j", "weight"])
        writer.writerows(export_edges(net, min_weight))
