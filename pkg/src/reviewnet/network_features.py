"""Per-product network features: degree, eigenvector centrality, PageRank,
clustering coefficient.

Degree sums the incident shared-reviewer counts (edge weights); the three
structural scores are computed on the binary adjacency. Eigenvector
centrality runs shifted power iteration (A + I keeps the iteration from
oscillating on bipartite-like graphs and leaves the dominant eigenvector
unchanged). PageRank iterates the damped random-walk fixed point; isolated
products are dangling nodes whose mass is redistributed uniformly. The
clustering coefficient of a product is the fraction of its neighbor pairs
that are themselves connected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import ProductNetwork

# above this size the dense triangle-counting path would not fit in memory
_DENSE_NODE_LIMIT = 3000


class ConvergenceError(RuntimeError):
    """An iterative solver did not reach its tolerance within max_iter."""


@dataclass
class SolverConfig:
    """Settings for the centrality solvers.

    alpha is the PageRank damping factor. pagerank_variant selects the
    standard update (neighbor mass split by the neighbor's own degree) or
    the 'literal' update that divides by the receiving node's neighbor
    count and renormalizes each sweep. clustering_variant 'neighbor_links'
    is the standard neighbor-pair definition; 'literal' keeps an
    alternative numerator that ignores links between neighbors (it exceeds
    1 for any node with 2+ neighbors and exists only for comparison runs).
    lambda1 is an output slot: it receives the dominant adjacency
    eigenvalue after eigenvector_centrality runs.
    """

    alpha: float = 0.85
    tol: float = 1e-10
    max_iter: int = 1000
    lambda1: float | None = None
    pagerank_variant: str = "standard"
    clustering_variant: str = "neighbor_links"

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.tol <= 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.pagerank_variant not in ("standard", "literal"):
            raise ValueError(f"unknown pagerank_variant {self.pagerank_variant!r}")
        if self.clustering_variant not in ("neighbor_links", "literal"):
            raise ValueError(f"unknown clustering_variant {self.clustering_variant!r}")


def degree(net: ProductNetwork) -> dict[str, int]:
    """Weighted degree: total reviewers shared with other products."""
    d = net.weighted_degrees()
    return {p: int(d[i]) for i, p in enumerate(net.products)}


def eigenvector_centrality(
    net: ProductNetwork, cfg: SolverConfig | None = None
) -> tuple[dict[str, float], float]:
    """Dominant eigenvector of the binary adjacency, unit Euclidean norm.

    Returns (scores, lambda1) and also stores lambda1 on the config.
    Raises ConvergenceError if the per-sweep max-norm change does not drop
    below tol within max_iter sweeps.
    """
    cfg = cfg or SolverConfig()
    if net.num_edges == 0:
        raise ValueError("centrality undefined on empty adjacency")
    n = net.n
    x = np.full(n, 1.0 / math.sqrt(n))
    delta = math.inf
    for _ in range(cfg.max_iter):
        y = net.adjacency_matvec(x) + x
        y /= math.sqrt(y @ y)
        delta = float(np.max(np.abs(y - x)))
        x = y
        if delta < cfg.tol:
            break
    else:
        raise ConvergenceError(
            f"eigenvector centrality: residual {delta:.3e} after "
            f"{cfg.max_iter} iterations (tol={cfg.tol:.1e})"
        )
    lam = float(x @ net.adjacency_matvec(x))
    cfg.lambda1 = lam
    return {p: float(x[i]) for i, p in enumerate(net.products)}, lam


def pagerank(net: ProductNetwork, cfg: SolverConfig | None = None) -> dict[str, float]:
    """Damped random-walk stationary scores, summing to 1 across products."""
    cfg = cfg or SolverConfig()
    n = net.n
    alpha = cfg.alpha
    b = net.binary_degrees().astype(np.float64)
    connected = b > 0
    p = np.full(n, 1.0 / n)
    inv_deg = np.zeros(n)
    inv_deg[connected] = 1.0 / b[connected]
    delta = math.inf
    for _ in range(cfg.max_iter):
        if cfg.pagerank_variant == "standard":
            inflow = net.adjacency_matvec(p * inv_deg)
            dangling = float(p[~connected].sum())
            new_p = (1.0 - alpha) / n + alpha * (inflow + dangling / n)
        else:  # literal: divide the incoming sum by the receiver's degree
            inflow = net.adjacency_matvec(p)
            new_p = (1.0 - alpha) / n + alpha * inflow * inv_deg
            new_p[~connected] = (1.0 - alpha) / n
            new_p /= new_p.sum()
        delta = float(np.max(np.abs(new_p - p)))
        p = new_p
        if delta < cfg.tol:
            break
    else:
        raise ConvergenceError(
            f"pagerank: residual {delta:.3e} after {cfg.max_iter} iterations "
            f"(tol={cfg.tol:.1e})"
        )
    return {q: float(p[i]) for i, q in enumerate(net.products)}


def _neighbor_link_counts(net: ProductNetwork) -> np.ndarray:
    """For each node, twice the number of edges among its neighbors."""
    n = net.n
    if n <= _DENSE_NODE_LIMIT:
        a = net.dense_adjacency()
        paths2 = a @ a  # [i, j] = common-neighbor counts, exact small integers
        return (paths2 * a).sum(axis=1)
    counts = np.zeros(n)
    mask = np.zeros(n, dtype=bool)
    for i in range(n):
        nbrs = net.neighbors(i)
        if nbrs.size < 2:
            continue
        mask[nbrs] = True
        total = 0
        for j in nbrs:
            total += int(mask[net.neighbors(j)].sum())
        counts[i] = total
        mask[nbrs] = False
    return counts


def clustering_coefficient(
    net: ProductNetwork, cfg: SolverConfig | None = None
) -> dict[str, float]:
    """Fraction of a product's neighbor pairs that share reviewers themselves.

    Products with fewer than two neighbors score 0.
    """
    cfg = cfg or SolverConfig()
    k = net.binary_degrees().astype(np.float64)
    denom = k * (k - 1.0)
    if cfg.clustering_variant == "neighbor_links":
        numer = _neighbor_link_counts(net)  # already counts each link twice
    else:  # literal: numerator counts ordered neighbor pairs times 2
        numer = 2.0 * k * k
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(denom > 0, numer / np.where(denom > 0, denom, 1.0), 0.0)
    return {p: float(c[i]) for i, p in enumerate(net.products)}


def compute_all(
    net: ProductNetwork, cfg: SolverConfig | None = None
) -> dict[str, dict[str, float]]:
    """All four network features, keyed by feature name."""
    cfg = cfg or SolverConfig()
    eig, _ = eigenvector_centrality(net, cfg)
    return {
        "degree": degree(net),
        "eigenvector_cent": eig,
        "pagerank": pagerank(net, cfg),
        "clustering_coef": clustering_coefficient(net, cfg),
    }
