"""Weighted digraphs, walk sums and the spectral threshold for the graph variant.

The tree in the branching model is replaced by a nonnegative adjacency
operator ``A``.  Walks of length ``k`` from the seed contribute with
discount ``(alpha*q)**(k-1)``; the infinite horizon exists when
``alpha * q * rho(A) < 1``.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field
from typing import Iterable

import networkx as nx
import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .analytic import check_alpha, check_q, _check_depth, _check_real
from .errors import ModelOverflow, NotConverged, ValidationError


@dataclass(frozen=True, eq=False)
class WeightedDigraph:
    """Immutable digraph on nodes ``0..n-1`` with nonnegative arc weights.

    Parallel arcs are merged by summing their weights.  ``forward`` holds the
    operator with ``forward[dst, src] = weight`` so that ``forward @ x``
    pushes mass one hop along the arcs.
    """

    n: int
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    forward: sparse.csr_matrix = field(repr=False)

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable[tuple]) -> "WeightedDigraph":
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
            raise ValidationError(f"node count must be a positive integer, got {n!r}", key="n")
        n = int(n)
        triples = []
        for arc in arcs:
            if len(arc) == 2:
                s, t = arc
                wt = 1.0
            else:
                s, t, wt = arc
            triples.append((int(s), int(t), float(wt)))
        if triples:
            src = np.array([a[0] for a in triples], dtype=np.int64)
            dst = np.array([a[1] for a in triples], dtype=np.int64)
            wts = np.array([a[2] for a in triples], dtype=np.float64)
        else:
            src = dst = np.zeros(0, dtype=np.int64)
            wts = np.zeros(0, dtype=np.float64)
        if np.any((src < 0) | (src >= n) | (dst < 0) | (dst >= n)):
            raise ValidationError(f"arc endpoint outside 0..{n - 1}", key="arcs")
        if np.any(~np.isfinite(wts)) or np.any(wts < 0):
            raise ValidationError("arc weights must be finite and nonnegative", key="weight")
        if np.any(src == dst):
            warnings.warn("graph has self-loops; they inflate walk counts", stacklevel=2)

        # merge duplicates by summation, in sorted (src, dst) order
        order = np.lexsort((dst, src))
        src, dst, wts = src[order], dst[order], wts[order]
        if len(src):
            new = np.ones(len(src), dtype=bool)
            new[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1])
            groups = np.cumsum(new) - 1
            src, dst, wts = src[new], dst[new], np.bincount(groups, weights=wts)
        forward = sparse.csr_matrix((wts, (dst, src)), shape=(n, n))
        for arr in (src, dst, wts):
            arr.setflags(write=False)
        return cls(n, src, dst, wts, forward)

    @property
    def num_arcs(self) -> int:
        return len(self.src)

    def arcs(self) -> list[tuple[int, int, float]]:
        return [(int(s), int(t), float(w)) for s, t, w in zip(self.src, self.dst, self.weight)]

    def out_weight(self, node: int) -> float:
        return float(self.weight[self.src == node].sum())

    def successors(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for s, t in zip(self.src.tolist(), self.dst.tolist()):
            out[s].append(t)
        return out

    def is_unit_weight(self) -> bool:
        return bool(np.all(self.weight == 1.0))

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """One forward hop: ``y[j] = sum_i weight(i->j) * x[i]``."""
        return self.forward @ x

    def to_dense(self) -> np.ndarray:
        """Adjacency matrix with ``A[src, dst] = weight``."""
        return self.forward.T.toarray()

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightedDigraph):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.src, other.src)
                and np.array_equal(self.dst, other.dst) and np.array_equal(self.weight, other.weight))

    __hash__ = None


def check_seed(g: WeightedDigraph, seed_node: int) -> int:
    if isinstance(seed_node, bool) or not isinstance(seed_node, (int, np.integer)):
        raise ValidationError(f"seed node must be an integer, got {seed_node!r}", key="seed_node")
    if not 0 <= seed_node < g.n:
        raise ValidationError(f"seed node {seed_node} outside 0..{g.n - 1}", key="seed_node")
    return int(seed_node)


# --------------------------------------------------------------------- generators

def _undirected(n: int, edges) -> WeightedDigraph:
    arcs = []
    for u, v in edges:
        arcs.append((u, v))
        arcs.append((v, u))
    return WeightedDigraph.from_arcs(n, arcs)


def _positive_int(name, value, minimum=1) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < minimum:
        raise ValidationError(f"{name} must be an integer >= {minimum}, got {value!r}", key=name)
    return int(value)


def b_ary_tree(b: int, depth: int) -> WeightedDigraph:
    """Complete ``b``-ary tree of the given depth, arcs pointing parent -> child; root is node 0."""
    b = _positive_int("b", b)
    depth = _positive_int("depth", depth, 0)
    n = sum(b**k for k in range(depth + 1))
    arcs = [(i, b * i + c + 1) for i in range((n - 1) // b if b else 0) for c in range(b)]
    return WeightedDigraph.from_arcs(n, arcs)


def complete_graph(n: int) -> WeightedDigraph:
    n = _positive_int("n", n)
    return WeightedDigraph.from_arcs(n, [(i, j) for i in range(n) for j in range(n) if i != j])


def cycle_graph(n: int) -> WeightedDigraph:
    n = _positive_int("n", n, 3)
    return _undirected(n, [(i, (i + 1) % n) for i in range(n)])


def star_graph(leaves: int) -> WeightedDigraph:
    """Hub 0 joined both ways to ``leaves`` leaf nodes."""
    leaves = _positive_int("leaves", leaves)
    return _undirected(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def erdos_renyi(n: int, p_edge: float, rng_seed: int) -> WeightedDigraph:
    n = _positive_int("n", n)
    p_edge = _check_real("p_edge", p_edge)
    if not 0.0 <= p_edge <= 1.0:
        raise ValidationError(f"p_edge must lie in [0, 1], got {p_edge!r}", key="p_edge")
    return _undirected(n, nx.gnp_random_graph(n, p_edge, seed=int(rng_seed)).edges())


def barabasi_albert(n: int, m_attach: int, rng_seed: int) -> WeightedDigraph:
    n = _positive_int("n", n, 2)
    m_attach = _positive_int("m_attach", m_attach)
    if m_attach >= n:
        raise ValidationError(f"m_attach must be < n, got m={m_attach}, n={n}", key="m_attach")
    return _undirected(n, nx.barabasi_albert_graph(n, m_attach, seed=int(rng_seed)).edges())


GRAPH_FAMILIES = {
    "tree": b_ary_tree,
    "er": erdos_renyi,
    "ba": barabasi_albert,
    "complete": complete_graph,
    "cycle": cycle_graph,
    "star": star_graph,
}


def generate_graph(family: str, **params) -> WeightedDigraph:
    """Build a unit-weight graph from a named family (see ``GRAPH_FAMILIES``)."""
    try:
        build = GRAPH_FAMILIES[family.lower()]
    except KeyError:
        raise ValidationError(f"unknown graph family {family!r}; choose from {sorted(GRAPH_FAMILIES)}",
                              key="family") from None
    return build(**params)


# --------------------------------------------------------------------- edge lists

_NODES_DIRECTIVE = "# nodes:"


def parse_edgelist(text: str, n: int | None = None) -> WeightedDigraph:
    """Parse ``src dst [weight]`` lines; ``#`` starts a comment.

    The node count comes from ``n``, else from a ``# nodes: N`` line, else
    from the largest index seen.
    """
    arcs = []
    declared = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        stripped = raw.strip()
        if stripped.lower().startswith(_NODES_DIRECTIVE):
            try:
                declared = int(stripped[len(_NODES_DIRECTIVE):].strip())
            except ValueError:
                raise ValidationError(f"line {lineno}: bad node-count directive {stripped!r}") from None
            continue
        body = raw.split("#", 1)[0].split()
        if not body:
            continue
        if len(body) not in (2, 3):
            raise ValidationError(f"line {lineno}: expected 'src dst [weight]', got {raw.strip()!r}")
        try:
            s, t = int(body[0]), int(body[1])
            wt = float(body[2]) if len(body) == 3 else 1.0
        except ValueError:
            raise ValidationError(f"line {lineno}: cannot parse {raw.strip()!r}") from None
        if s < 0 or t < 0:
            raise ValidationError(f"line {lineno}: negative node index")
        arcs.append((s, t, wt))
    if n is None:
        n = declared
    if n is None:
        n = max((max(s, t) for s, t, _ in arcs), default=-1) + 1
        if n == 0:
            raise ValidationError("edge list has no arcs and no node-count directive")
    return WeightedDigraph.from_arcs(n, arcs)


def load_edgelist(path: str | os.PathLike, n: int | None = None) -> WeightedDigraph:
    with open(path, encoding="utf-8") as fh:
        return parse_edgelist(fh.read(), n)


def format_edgelist(g: WeightedDigraph) -> str:
    lines = [f"{_NODES_DIRECTIVE} {g.n}"]
    lines += [f"{s} {t} {w:.17g}" for s, t, w in g.arcs()]
    return "\n".join(lines) + "\n"


def write_edgelist(g: WeightedDigraph, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_edgelist(g))


# --------------------------------------------------------------------- spectral radius

@dataclass(frozen=True)
class SpectralEstimate:
    rho: float
    iterations: int
    converged: bool
    tolerance: float


def _is_acyclic(g: WeightedDigraph) -> bool:
    if np.any(g.src == g.dst):
        return False
    ncomp, _ = connected_components(g.forward, directed=True, connection="strong")
    return ncomp == g.n


def spectral_radius(g: WeightedDigraph, tol: float = 1e-10, max_iter: int = 10000,
                    strict: bool = True) -> SpectralEstimate:
    """Perron root of ``A`` by power iteration on ``A + I``.

    The unit shift keeps periodic (e.g. bipartite) graphs from oscillating;
    it is subtracted on return.  Acyclic graphs are nilpotent and return 0
    directly.  With ``strict`` a non-converged run raises
    :class:`NotConverged`; otherwise the estimate comes back flagged.
    """
    if g.num_arcs == 0 or _is_acyclic(g):
        return SpectralEstimate(0.0, 0, True, tol)
    x = np.full(g.n, 1.0 / g.n)
    lam = prev = math.nan
    for it in range(1, max_iter + 1):
        y = g.matvec(x) + x
        lam = float(y.sum())  # x has unit L1 norm and is nonnegative
        x = y / lam
        if it > 1 and abs(lam - prev) <= tol * abs(lam):
            return SpectralEstimate(lam - 1.0, it, True, tol)
        prev = lam
    est = SpectralEstimate(max(lam - 1.0, 0.0), max_iter, False, tol)
    if strict:
        raise NotConverged(est)
    return est


@dataclass(frozen=True)
class NeumannCheck:
    """Outcome of the ``alpha*q*rho(A) < 1`` test; truthy when convergent."""

    convergent: bool
    margin: float
    spectral: SpectralEstimate

    def __bool__(self) -> bool:
        return self.convergent


def neumann_convergent(alpha: float, q: float, g: WeightedDigraph, tol: float = 1e-9,
                       spectral: SpectralEstimate | None = None) -> NeumannCheck:
    alpha = check_alpha(alpha)
    q = check_q(q)
    est = spectral if spectral is not None else spectral_radius(g)
    margin = alpha * q * est.rho
    return NeumannCheck(margin < 1.0 - tol, margin, est)


# --------------------------------------------------------------------- walk sums

def walk_layers(g: WeightedDigraph, seed_node: int, d: int) -> list[tuple[float, float]]:
    """L1 mass of ``A^k e_seed`` for ``k = 1..d`` as ``(mass, log_scale)`` pairs.

    The true mass is ``mass * exp(log_scale)``.  The walk vector is only
    rescaled once it passes 1e200, so ordinary graphs keep ``log_scale == 0``.
    """
    seed_node = check_seed(g, seed_node)
    d = _check_depth(d)
    x = np.zeros(g.n)
    x[seed_node] = 1.0
    log_scale = 0.0
    layers = []
    for _ in range(d):
        x = g.matvec(x)
        mass = math.fsum(x)
        layers.append((mass, log_scale))
        if mass > 1e200:
            x /= mass
            log_scale += math.log(mass)
    return layers


def graph_total(w: float, alpha: float, q: float, g: WeightedDigraph, seed_node: int, d: int) -> float:
    """Walk-sum total ``w * sum_{k=1..d} (alpha*q)**(k-1) * |A^k e_seed|_1``.

    Every length-``k`` walk out of the seed counts once with discount
    ``(alpha*q)**(k-1)``; the seed itself contributes nothing at ``k = 0``.
    On the out-degree-``b`` tree this equals the closed-form total.
    """
    w = _check_real("w", w)
    alpha = check_alpha(alpha)
    q = check_q(q)
    aq = alpha * q
    terms = []
    log_terms = []
    for k, (mass, log_scale) in enumerate(walk_layers(g, seed_node, d), 1):
        disc = aq ** (k - 1)
        if mass == 0.0 or disc == 0.0:
            continue
        if log_scale == 0.0:
            terms.append(mass * disc)
            log_terms.append(math.log(terms[-1]))
        else:
            log_t = log_scale + math.log(mass) + (k - 1) * math.log(aq)
            log_terms.append(log_t)
            terms.append(math.exp(log_t) if log_t < 709.0 else math.inf)
    if not terms:
        return 0.0
    total = w * math.fsum(terms) if all(map(math.isfinite, terms)) else math.inf
    if not math.isfinite(total):
        top = max(log_terms)
        log_mag = top + math.log(math.fsum(math.exp(t - top) for t in log_terms))
        raise ModelOverflow(log_mag + (math.log(abs(w)) if w else 0.0))
    return total
