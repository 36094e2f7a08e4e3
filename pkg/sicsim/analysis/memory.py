"""
Post-measurement states reachable in an ideal sequential experiment on the
13 Yu-Oh rays, and the entropy lower bound on the classical memory needed to
reproduce them.

All reachable states are real and, up to scale, integer vectors: a bright
result leaves the measured ray, a dark result leaves s|v|^2 - (s.v)v. States
are therefore kept as primitive integer triples and the counts are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from sicsim.core.yuoh import N_RAYS, build_rays

Triple = Tuple[int, int, int]

MAX_REFERENCED_DEPTH = 5
# Memory a classical simulation of the Peres-Mermin set needs (log2 24 bits).
PERES_MERMIN_BITS = math.log2(24)
# Lower bound quoted for four measurements on the Yu-Oh set.
REFERENCE_DEPTH4_BITS = 5.529


def canonical(v: Sequence[int]) -> Triple:
    """Primitive integer direction with its first nonzero component positive."""
    g = reduce(math.gcd, (abs(int(x)) for x in v))
    if g == 0:
        raise ValueError("The zero vector has no direction")
    a, b, c = (int(x) // g for x in v)
    first = next(x for x in (a, b, c) if x != 0)
    return (a, b, c) if first > 0 else (-a, -b, -c)


def _dot(u: Triple, v: Triple) -> int:
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def _ray_triples() -> Tuple[Triple, ...]:
    return tuple(canonical(r.direction) for r in build_rays())


def branches(state: Triple, rays: Sequence[Triple]) -> List[Tuple[int, Triple, float]]:
    """(ray index, post-measurement state, probability) for every branch with
    nonzero probability, measurement choice not included."""
    s_norm = _dot(state, state)
    out = []
    for k, v in enumerate(rays):
        sv = _dot(state, v)
        v_norm = _dot(v, v)
        p_bright = sv * sv / (s_norm * v_norm)
        if sv != 0:
            out.append((k, v, p_bright))
        dark = tuple(x * v_norm - sv * y for x, y in zip(state, v))
        if any(dark):
            out.append((k, canonical(dark), 1.0 - p_bright))
    return out


@dataclass
class StateAtlas:
    # states[k] are the distinct states after exactly k measurements
    states: List[List[Triple]]
    occupancy: List[Dict[Triple, float]] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return len(self.states) - 1

    @property
    def counts(self) -> List[int]:
        return [len(s) for s in self.states]

    def unit_vectors(self, depth: int) -> np.ndarray:
        vecs = np.array(self.states[depth], dtype=float)
        return vecs / np.linalg.norm(vecs, axis=1, keepdims=True)


def enumerate_states(depth: int) -> StateAtlas:
    """Distinct states after 0..depth measurements, starting from the 13 rays."""
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    rays = _ray_triples()
    frontier = sorted(set(rays))
    levels = [frontier]
    for _ in range(depth):
        nxt = {post for s in frontier for _, post, _ in branches(s, rays)}
        frontier = sorted(nxt)
        levels.append(frontier)
    return StateAtlas(states=levels)


def _initial_distribution(initial: Optional[Mapping]) -> Dict[Triple, float]:
    rays = _ray_triples()
    if initial is None:
        return {r: 1.0 / N_RAYS for r in rays}
    dist: Dict[Triple, float] = {}
    for key, p in initial.items():
        state = rays[key] if isinstance(key, (int, np.integer)) else canonical(key)
        dist[state] = dist.get(state, 0.0) + float(p)
    total = sum(dist.values())
    if abs(total - 1.0) > 1e-12:
        raise ValueError(f"Initial distribution sums to {total}, expected 1")
    return dist


def occupancy(depth: int, initial: Optional[Mapping] = None) -> List[Dict[Triple, float]]:
    """Occupancy probabilities per depth; each measurement picks one of the 13
    rays uniformly and branches by the Born rule."""
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    rays = _ray_triples()
    current = _initial_distribution(initial)
    tables = [current]
    for _ in range(depth):
        nxt: Dict[Triple, float] = {}
        for state, p in current.items():
            for _, post, q in branches(state, rays):
                nxt[post] = nxt.get(post, 0.0) + p * q / N_RAYS
        current = nxt
        tables.append(current)
    return tables


def entropy_bound(probabilities) -> float:
    """Shannon entropy in bits of an occupancy table (mapping or sequence)."""
    values = probabilities.values() if isinstance(probabilities, Mapping) else probabilities
    p = np.asarray(list(values), dtype=float)
    if (p < 0).any():
        raise ValueError("Probabilities must be nonnegative")
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def in_semicircle(state: Triple, rays: Sequence[Triple]) -> bool:
    """A ray itself, or orthogonal to at least one ray."""
    return state in rays or any(_dot(state, r) == 0 for r in rays)


@dataclass
class MemoryReport:
    depth: int
    counts: List[int]
    entropies: List[float]
    semicircle_ok: bool
    entropy_monotone: bool
    warnings: List[str] = field(default_factory=list)
    uniform_bits: float = math.log2(N_RAYS)
    peres_mermin_bits: float = PERES_MERMIN_BITS
    reference_depth4_bits: float = REFERENCE_DEPTH4_BITS

    def as_dict(self) -> Dict:
        return {
            "depth": self.depth,
            "counts": self.counts,
            "entropy_bits": self.entropies,
            "semicircle_ok": self.semicircle_ok,
            "entropy_monotone": self.entropy_monotone,
            "comparisons": {
                "log2_13": self.uniform_bits,
                "peres_mermin_log2_24": self.peres_mermin_bits,
                "reference_depth4": self.reference_depth4_bits,
            },
            "warnings": self.warnings,
        }


def memory_report(depth: int, initial: Optional[Mapping] = None) -> Tuple[MemoryReport, StateAtlas]:
    atlas = enumerate_states(depth)
    atlas.occupancy = occupancy(depth, initial)
    rays = _ray_triples()
    entropies = [entropy_bound(t) for t in atlas.occupancy]
    warnings = []
    if depth > MAX_REFERENCED_DEPTH:
        warnings.append(f"depth {depth} exceeds {MAX_REFERENCED_DEPTH}; no reference counts exist beyond it")
    monotone = all(b >= a - 1e-12 for a, b in zip(entropies, entropies[1:]))
    if not monotone:
        warnings.append("entropy is not monotone in depth")
    semicircle_ok = all(in_semicircle(s, rays) for level in atlas.states for s in level)
    report = MemoryReport(
        depth=depth,
        counts=atlas.counts,
        entropies=entropies,
        semicircle_ok=semicircle_ok,
        entropy_monotone=monotone,
        warnings=warnings,
    )
    return report, atlas


def state_rows(atlas: StateAtlas) -> List[Dict]:
    rows = []
    for depth, level in enumerate(atlas.states):
        occ = atlas.occupancy[depth] if depth < len(atlas.occupancy) else {}
        for a, b, c in level:
            rows.append({"depth": depth, "a": a, "b": b, "c": c, "probability": occ.get((a, b, c), 0.0)})
    return rows
