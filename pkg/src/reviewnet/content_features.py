"""Features computed from review content: text, metadata, and images.

Text scoring works at two levels. Within one product, every review gets a
sparse TF-IDF weight vector over its own terms (tf is the term count over
the review length; idf is log of the product's review count over the number
of its reviews containing the term; the two combine additively by default,
multiplicatively on request) and the product's text-similarity feature is
the mean pairwise cosine of those vectors. Across products, each product's
concatenated reviews form one document and the same tf/idf scoring against
the product corpus yields the wide text block, keeping each product's
top-scoring terms.

Image features summarize pairwise cosine similarities of precomputed
embedding vectors in three groups: review-to-review with each review
collapsed to the mean of its images, all pairs of individual review images,
and product images against review images.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, fields

import numpy as np

from .ingest import ImageEmbedding, ProductReviewSet, index_embeddings

# lowercase, split on runs of non-alphanumerics, drop pure-digit tokens
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    return [t for t in _TOKEN_RE.findall(text.lower()) if not t.isdigit()]


def _combine(tf: float, idf: float, mode: str) -> float:
    if mode == "additive":
        return tf + idf
    if mode == "multiplicative":
        return tf * idf
    raise ValueError(f"mode must be 'additive' or 'multiplicative', got {mode!r}")


@dataclass
class TermStats:
    """Token counts per review plus per-term document frequency for one product."""

    review_counts: list[Counter]
    doc_freq: Counter
    n_reviews: int


def term_stats(product: ProductReviewSet) -> TermStats:
    review_counts = [Counter(tokenize(r.text)) for r in product.reviews]
    doc_freq = Counter()
    for counts in review_counts:
        doc_freq.update(counts.keys())
    return TermStats(review_counts, doc_freq, len(product.reviews))


def tfidf_vectors(
    product: ProductReviewSet, mode: str = "additive"
) -> list[dict[str, float]]:
    """Sparse per-review TF-IDF weights over the terms present in each review."""
    stats = term_stats(product)
    n = stats.n_reviews
    vectors = []
    for counts in stats.review_counts:
        length = sum(counts.values())
        if length == 0:
            vectors.append({})
            continue
        vec = {}
        for term, freq in counts.items():
            tf = freq / length
            idf = math.log(n / stats.doc_freq[term])
            vec[term] = _combine(tf, idf, mode)
        vectors.append(vec)
    return vectors


def _sparse_cosine(u: dict[str, float], v: dict[str, float]) -> float:
    nu = math.sqrt(sum(x * x for x in u.values()))
    nv = math.sqrt(sum(x * x for x in v.values()))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    if len(u) > len(v):
        u, v = v, u
    dot = sum(w * v[t] for t, w in u.items() if t in v)
    return dot / (nu * nv)


def tfidf_similarity(
    product: ProductReviewSet, mode: str = "additive"
) -> tuple[float, bool]:
    """Mean pairwise cosine similarity of per-review TF-IDF vectors.

    Returns (similarity, missing). Products with fewer than two non-empty
    reviews get (0.0, True).
    """
    nonempty = [i for i, r in enumerate(product.reviews) if tokenize(r.text)]
    if len(nonempty) < 2:
        return 0.0, True
    vectors = tfidf_vectors(product, mode)
    sims = []
    for a in range(len(nonempty)):
        for b in range(a + 1, len(nonempty)):
            sims.append(_sparse_cosine(vectors[nonempty[a]], vectors[nonempty[b]]))
    return sum(sims) / len(sims), False


@dataclass
class MetadataRow:
    """Per-product metadata features; gaps are in days between consecutive reviews."""

    n_reviews: int
    avg_rating: float
    gap_avg: float
    gap_min: float
    gap_max: float
    gap_std: float
    share_helpful: float
    share_1star: float
    share_5star: float
    share_photo: float
    stdev_review_len: float
    tfidf_sim: float
    tfidf_sim_missing: bool

    def as_dict(self) -> dict[str, float]:
        return {f.name: float(getattr(self, f.name)) for f in fields(self)}


def metadata_features(
    product: ProductReviewSet, tfidf_mode: str = "additive"
) -> MetadataRow:
    """Summary statistics of ratings, timing, helpfulness, photos, and text length."""
    reviews = sorted(product.reviews, key=lambda r: (r.timestamp, r.reviewer_id))
    n = len(reviews)
    ratings = np.array([r.rating for r in reviews], dtype=np.float64)
    times = np.array([r.timestamp for r in reviews], dtype=np.float64)
    lengths = np.array([len(tokenize(r.text)) for r in reviews], dtype=np.float64)
    if n >= 2:
        gaps = np.diff(times)
        gap_stats = (gaps.mean(), gaps.min(), gaps.max(), gaps.std())
    else:
        gap_stats = (0.0, 0.0, 0.0, 0.0)
    sim, missing = tfidf_similarity(product, tfidf_mode)
    return MetadataRow(
        n_reviews=n,
        avg_rating=float(ratings.mean()),
        gap_avg=float(gap_stats[0]),
        gap_min=float(gap_stats[1]),
        gap_max=float(gap_stats[2]),
        gap_std=float(gap_stats[3]),
        share_helpful=float(np.mean([r.helpful_votes >= 1 for r in reviews])),
        share_1star=float(np.mean(ratings == 1)),
        share_5star=float(np.mean(ratings == 5)),
        share_photo=float(np.mean([r.has_photo for r in reviews])),
        stdev_review_len=float(lengths.std()),
        tfidf_sim=float(sim),
        tfidf_sim_missing=missing,
    )


def cosine_similarity(u, v) -> float:
    """u.v / (|u||v|); raises on zero-length or mismatched vectors."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"vector shapes differ: {u.shape} vs {v.shape}")
    nu = math.sqrt(float(u @ u))
    nv = math.sqrt(float(v @ v))
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine similarity undefined for zero vectors")
    return float(u @ v) / (nu * nv)


def angular_similarity(cos_sim: float) -> float:
    """Map a cosine similarity onto 1 - arccos(s)/pi."""
    return 1.0 - math.acos(max(-1.0, min(1.0, cos_sim))) / math.pi


_IMAGE_GROUPS = ("img_sim", "sim_review", "sim_product")


@dataclass
class ImageSimRow:
    """Per-product aggregates of pairwise image similarity, three groups.

    img_sim: review-level pairs, each review collapsed to the mean of its
    image vectors. sim_review: all pairs of individual review images.
    sim_product: every (product image, review image) pair. A group with no
    pairs reports zeros and its missing flag.
    """

    img_sim_avg: float = 0.0
    img_sim_min: float = 0.0
    img_sim_max: float = 0.0
    img_sim_std: float = 0.0
    img_sim_missing: bool = True
    sim_review_avg: float = 0.0
    sim_review_min: float = 0.0
    sim_review_max: float = 0.0
    sim_review_std: float = 0.0
    sim_review_missing: bool = True
    sim_product_avg: float = 0.0
    sim_product_min: float = 0.0
    sim_product_max: float = 0.0
    sim_product_std: float = 0.0
    sim_product_missing: bool = True

    def as_dict(self) -> dict[str, float]:
        return {f.name: float(getattr(self, f.name)) for f in fields(self)}


def _pair_sims_within(vectors: list[np.ndarray], angular: bool) -> list[float]:
    sims = []
    for a in range(len(vectors)):
        for b in range(a + 1, len(vectors)):
            s = cosine_similarity(vectors[a], vectors[b])
            sims.append(angular_similarity(s) if angular else s)
    return sims


def _pair_sims_across(
    left: list[np.ndarray], right: list[np.ndarray], angular: bool
) -> list[float]:
    sims = []
    for u in left:
        for v in right:
            s = cosine_similarity(u, v)
            sims.append(angular_similarity(s) if angular else s)
    return sims


def image_features(
    product_id: str,
    embeddings: list[ImageEmbedding],
    angular: bool = False,
) -> ImageSimRow:
    """Pairwise-similarity aggregates for one product's images."""
    index = index_embeddings(embeddings)
    product_imgs = [e.vector for e in index.get((product_id, "product_image"), [])]
    review_embs = index.get((product_id, "review_image"), [])
    review_imgs = [e.vector for e in review_embs]

    by_review: dict[str, list[np.ndarray]] = {}
    for e in review_embs:
        by_review.setdefault(e.review_id, []).append(e.vector)
    review_means = [
        np.mean(vecs, axis=0) for _, vecs in sorted(by_review.items())
    ]

    row = ImageSimRow()
    groups = {
        "img_sim": _pair_sims_within(review_means, angular),
        "sim_review": _pair_sims_within(review_imgs, angular),
        "sim_product": _pair_sims_across(product_imgs, review_imgs, angular),
    }
    for name, sims in groups.items():
        if not sims:
            continue
        arr = np.asarray(sims)
        setattr(row, f"{name}_avg", float(arr.mean()))
        setattr(row, f"{name}_min", float(arr.min()))
        setattr(row, f"{name}_max", float(arr.max()))
        setattr(row, f"{name}_std", float(arr.std()))
        setattr(row, f"{name}_missing", False)
    return row


def product_documents(review_sets: list[ProductReviewSet]) -> list[list[str]]:
    """Concatenate each product's reviews into one token list."""
    docs = []
    for s in review_sets:
        tokens: list[str] = []
        for r in s.reviews:
            tokens.extend(tokenize(r.text))
        docs.append(tokens)
    return docs


def text_feature_matrix(
    review_sets: list[ProductReviewSet],
    top_k: int = 1000,
    mode: str = "additive",
    selection: str = "per_product",
) -> tuple[np.ndarray, list[str]]:
    """Product-level TF-IDF block: one document per product, scored against
    the product corpus.

    Columns are the corpus terms ranked by total score over all products
    (ties broken lexicographically), capped at top_k. With
    selection='per_product' each product keeps only its own top_k scoring
    terms and reports zero elsewhere; 'global' keeps every product's score
    on the shared columns. Returns (matrix, column terms); the matrix always
    has top_k columns, zero-padded when the corpus has fewer terms.
    """
    if selection not in ("per_product", "global"):
        raise ValueError(f"selection must be 'per_product' or 'global', got {selection!r}")
    docs = product_documents(review_sets)
    n_docs = len(docs)
    doc_counts = [Counter(d) for d in docs]
    doc_freq = Counter()
    for counts in doc_counts:
        doc_freq.update(counts.keys())

    scores: list[dict[str, float]] = []
    totals: dict[str, float] = {}
    for counts in doc_counts:
        length = sum(counts.values())
        vec = {}
        for term, freq in counts.items():
            tf = freq / length
            idf = math.log(n_docs / doc_freq[term])
            vec[term] = _combine(tf, idf, mode)
        scores.append(vec)
        for term, val in vec.items():
            totals[term] = totals.get(term, 0.0) + val

    ranked = sorted(totals, key=lambda t: (-totals[t], t))
    columns = ranked[:top_k]
    col_index = {t: i for i, t in enumerate(columns)}

    matrix = np.zeros((n_docs, top_k))
    for row, vec in enumerate(scores):
        if selection == "per_product":
            keep = sorted(vec, key=lambda t: (-vec[t], t))[:top_k]
        else:
            keep = vec.keys()
        for term in keep:
            idx = col_index.get(term)
            if idx is not None:
                matrix[row, idx] = vec[term]
    return matrix, columns


def product_text_features(
    product: ProductReviewSet,
    corpus: list[ProductReviewSet],
    top_k: int = 1000,
    mode: str = "additive",
    selection: str = "per_product",
) -> np.ndarray:
    """One product's row of the corpus-level text block."""
    ids = [s.product_id for s in corpus]
    if product.product_id not in ids:
        corpus = list(corpus) + [product]
        ids.append(product.product_id)
    matrix, _ = text_feature_matrix(corpus, top_k=top_k, mode=mode, selection=selection)
    return matrix[ids.index(product.product_id)]
