"""
Blind recovery of the compatibility graph from measurement statistics.

Incompatibility of (u, w) is scored by how often a bright u is directly
followed by a bright w (either order). Orthogonal rays never do that; every
non-orthogonal pair of the set does so with probability at least 1/9.
The recovered graph is then relabeled onto the reference rays using only the
degree structure of the set.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from sicsim.analysis.tables import MINUS, CountTables, RecordsLike, RecordStream, Segment, as_stream
from sicsim.analysis.witnesses import Estimate
from sicsim.core.yuoh import N_RAYS, OrthGraph, build_rays, get_ray, reference_graph
from sicsim.utils.errors import CanonicalizationError, InsufficientDataError

DEFAULT_EPSILON_THRESHOLD = 0.05
BLIND_LETTERS = tuple(string.ascii_lowercase[:N_RAYS])

# Reference labels of the h block.
_H = ("h1", "h2", "h3")
_H0 = "h0"


def _epsilon_cells(tables: CountTables, u: int, w: int) -> Tuple[int, int]:
    both = int(tables.n2[u, w, MINUS, MINUS] + tables.n2[w, u, MINUS, MINUS])
    first_bright = int(tables.n2[u, w, MINUS].sum() + tables.n2[w, u, MINUS].sum())
    return both, first_bright


def _epsilon_from(tables: CountTables, u, w) -> Estimate:
    u, w = get_ray(u), get_ray(w)
    if u.id == w.id:
        raise ValueError("epsilon needs two different rays")
    both, n = _epsilon_cells(tables, u.id, w.id)
    if n == 0:
        cell = f"N(A_{u.label}=-1, A_{w.label})"
        raise InsufficientDataError(f"No bright-first pairs for ({u.label}, {w.label})", [cell])
    p = both / n
    return Estimate(p, math.sqrt(p * (1.0 - p) / n), n)


def epsilon(tables: CountTables, u, w) -> Estimate:
    """Symmetrized rate of a bright result directly following a bright result."""
    return _epsilon_from(tables, u, w)


def epsilon_conditioned(records: RecordsLike, u, w, i) -> Estimate:
    """Same estimator restricted to windows that follow a bright ray i."""
    return _epsilon_from(as_stream(records).conditioned(i), u, w)


@dataclass(frozen=True, eq=False)
class CompatibilityEstimate:
    eps: np.ndarray
    std_error: np.ndarray
    samples: np.ndarray
    threshold: float = DEFAULT_EPSILON_THRESHOLD

    def rows(self, labels: Optional[Tuple[str, ...]] = None) -> List[Dict]:
        labels = labels or tuple(r.label for r in build_rays())
        n = self.eps.shape[0]
        return [
            {
                "u": labels[u],
                "w": labels[w],
                "epsilon": float(self.eps[u, w]),
                "std_error": float(self.std_error[u, w]),
                "samples": int(self.samples[u, w]),
                "compatible": bool(self.eps[u, w] < self.threshold),
            }
            for u in range(n)
            for w in range(u + 1, n)
        ]


def epsilon_matrix(
    source: Union[CountTables, RecordStream],
    threshold: float = DEFAULT_EPSILON_THRESHOLD,
) -> CompatibilityEstimate:
    """Every off-diagonal epsilon; diagonal entries are NaN. Empty pairs stay NaN."""
    tables = source.tables() if isinstance(source, RecordStream) else source
    eps = np.full((N_RAYS, N_RAYS), np.nan)
    std = np.full((N_RAYS, N_RAYS), np.nan)
    samples = np.zeros((N_RAYS, N_RAYS), dtype=np.int64)
    for u in range(N_RAYS):
        for w in range(u + 1, N_RAYS):
            both, n = _epsilon_cells(tables, u, w)
            samples[u, w] = samples[w, u] = n
            if n:
                p = both / n
                eps[u, w] = eps[w, u] = p
                std[u, w] = std[w, u] = math.sqrt(p * (1.0 - p) / n)
    return CompatibilityEstimate(eps, std, samples, threshold)


def adjacency_from_data(
    eps: Union[CompatibilityEstimate, np.ndarray],
    threshold: Optional[float] = None,
) -> OrthGraph:
    """Edge iff epsilon is below the threshold."""
    if isinstance(eps, CompatibilityEstimate):
        threshold = eps.threshold if threshold is None else threshold
        eps = eps.eps
    threshold = DEFAULT_EPSILON_THRESHOLD if threshold is None else threshold
    eps = np.asarray(eps, dtype=float)
    n = eps.shape[0]
    off = ~np.eye(n, dtype=bool)
    if np.isnan(eps[off]).any():
        missing = [f"eps[{u},{w}]" for u, w in zip(*np.nonzero(np.isnan(eps) & off)) if u < w]
        raise InsufficientDataError("Epsilon matrix has empty pairs", missing)
    adj = np.zeros((n, n), dtype=bool)
    adj[off] = eps[off] < threshold
    return OrthGraph(adj & adj.T)


@dataclass(frozen=True)
class CanonicalLabeling:
    # permutation[i] is the observed vertex identified as reference ray i
    permutation: Tuple[int, ...]
    verified: bool

    def labeled(self, observed_labels=None) -> Dict[str, object]:
        rays = build_rays()
        return {
            rays[i].label: (observed_labels[v] if observed_labels is not None else v)
            for i, v in enumerate(self.permutation)
        }


def canonicalize(graph: OrthGraph) -> CanonicalLabeling:
    """Relabel a 13-vertex graph onto the reference rays by its block structure."""
    rid = {r.label: r.id for r in build_rays()}
    if graph.n_vertices != N_RAYS:
        raise CanonicalizationError(1, f"expected {N_RAYS} vertices, got {graph.n_vertices}")
    adj = graph.adjacency

    # 1: the four degree-3 vertices are the h block
    degrees = graph.degrees()
    if sorted(int(d) for d in degrees) != [3] * 4 + [4] * 9:
        raise CanonicalizationError(1, f"degree multiset {sorted(int(d) for d in degrees)} does not match")
    h_block = [int(v) for v in np.flatnonzero(degrees == 3)]

    # 2: neighbours of the h block are the y block
    y_block = sorted({n for h in h_block for n in graph.neighbors(h)})
    if len(y_block) != 6 or set(y_block) & set(h_block):
        raise CanonicalizationError(2, f"h block neighbours {y_block} are not six y vertices")

    # 3: the rest is the z block, kept in the order found; each z owns two y's
    z_block = [v for v in range(N_RAYS) if v not in h_block and v not in y_block]
    pairs: List[List[int]] = []
    for z in z_block:
        ys = [y for y in y_block if adj[z, y]]
        if len(ys) != 2:
            raise CanonicalizationError(3, f"vertex {z} is adjacent to {len(ys)} y vertices, expected 2")
        pairs.append(ys)
    if len({y for p in pairs for y in p}) != 6:
        raise CanonicalizationError(3, "z vertices do not split the y block into disjoint pairs")

    # 4: h0 is an h vertex meeting every pair exactly once; its y neighbours are the y_k-.
    # All four h vertices qualify up to automorphism, so the lowest index is taken.
    candidates = [h for h in h_block if all(int(adj[h, p[0]]) + int(adj[h, p[1]]) == 1 for p in pairs)]
    if not candidates:
        raise CanonicalizationError(4, "no h vertex meets every y pair exactly once")
    h0 = candidates[0]
    perm = [-1] * N_RAYS
    perm[rid[_H0]] = h0
    remaining_h = [h for h in h_block if h != h0]
    for k, (z, ys) in enumerate(zip(z_block, pairs), start=1):
        minus = [y for y in ys if adj[h0, y]]
        if len(minus) != 1:
            raise CanonicalizationError(4, f"h vertex {h0} is adjacent to {len(minus)} y vertices of pair {ys}")
        y_minus = minus[0]
        y_plus = ys[0] if ys[1] == y_minus else ys[1]
        h_k = [h for h in remaining_h if adj[h, y_minus]]
        if len(h_k) != 1:
            raise CanonicalizationError(4, f"y vertex {y_minus} does not single out one h vertex")
        perm[rid[f"z{k}"]] = z
        perm[rid[f"y{k}-"]] = y_minus
        perm[rid[f"y{k}+"]] = y_plus
        perm[rid[_H[k - 1]]] = h_k[0]
    if sorted(perm) != list(range(N_RAYS)):
        raise CanonicalizationError(4, "h vertices could not be matched one-to-one")

    verified = graph.relabeled(perm) == reference_graph()
    return CanonicalLabeling(tuple(perm), bool(verified))


def relabel_stream(stream: RecordStream, mapping: np.ndarray) -> RecordStream:
    """Stream whose ray r is reported as mapping[r]."""
    mapping = np.asarray(mapping, dtype=np.int64)
    return RecordStream(Segment(mapping[s.rays], s.slots) for s in stream.segments)


@dataclass(frozen=True)
class BlindResult:
    hidden: Dict[str, str]
    graph: OrthGraph
    labeling: Optional[CanonicalLabeling]
    estimate: CompatibilityEstimate
    failure: Optional[str] = None

    @property
    def n_edges(self) -> int:
        return len(self.graph.edges)

    def assignment(self) -> Dict[str, Tuple[str, str]]:
        """Reference ray -> (blind letter, ray that letter actually hid)."""
        if self.labeling is None:
            return {}
        rays = build_rays()
        return {
            rays[i].label: (BLIND_LETTERS[v], self.hidden[BLIND_LETTERS[v]])
            for i, v in enumerate(self.labeling.permutation)
        }


def blind_relabel(
    records: RecordsLike,
    rng: Optional[np.random.Generator] = None,
    threshold: float = DEFAULT_EPSILON_THRESHOLD,
) -> BlindResult:
    """Hide the ray identities behind letters a..m, then recover the structure."""
    rng = rng if rng is not None else np.random.default_rng()
    stream = as_stream(records)
    shuffle = rng.permutation(N_RAYS)
    rays = build_rays()
    hidden = {BLIND_LETTERS[int(shuffle[r.id])]: r.label for r in rays}
    estimate = epsilon_matrix(relabel_stream(stream, shuffle), threshold)
    graph = adjacency_from_data(estimate)
    try:
        labeling = canonicalize(graph)
    except CanonicalizationError as e:
        return BlindResult(hidden, graph, None, estimate, failure=str(e))
    return BlindResult(hidden, graph, labeling, estimate)


@dataclass(frozen=True)
class Reconstruction:
    estimate: CompatibilityEstimate
    graph: OrthGraph
    labeling: Optional[CanonicalLabeling]
    failure: Optional[str] = None


def reconstruct(stream: RecordStream, threshold: float = DEFAULT_EPSILON_THRESHOLD) -> Reconstruction:
    estimate = epsilon_matrix(stream, threshold)
    graph = adjacency_from_data(estimate)
    try:
        return Reconstruction(estimate, graph, canonicalize(graph))
    except CanonicalizationError as e:
        return Reconstruction(estimate, graph, None, failure=str(e))
