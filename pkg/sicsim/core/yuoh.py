"""The 13 Yu-Oh rays, their orthogonality graph and the index sets of both witnesses."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Dict, List, Tuple, Union

import numpy as np

from sicsim.utils.errors import UnknownRayError
from sicsim.utils.labels import RAY_LABELS, DEFAULT_RESOLVER

PI = np.pi
THETA_H = 2 * np.arctan(1 / np.sqrt(2))

N_RAYS = 13
N_EDGES = 24

CLASSICAL_BOUND_YO = 8
CLASSICAL_BOUND_OPT3 = 25

# Codes the ray table leaves unassigned; the selector discards them and reads again.
INVALID_QRNG_CODES = (0b0000, 0b1110, 0b1111)

# label: (direction, (theta1, phi1, theta2, phi2), qrng code)
# phi of a zero-angle pulse is irrelevant and set to 3pi/2.
_RAY_TABLE: Dict[str, Tuple[Tuple[int, int, int], Tuple[float, float, float, float], int]] = {
    "y1-": ((0, 1, -1), (PI, 3 * PI / 2, PI / 2, PI / 2), 0b0001),
    "y2-": ((-1, 0, 1), (0.0, 3 * PI / 2, 3 * PI / 2, 3 * PI / 2), 0b0010),
    "y3-": ((1, -1, 0), (PI / 2, PI / 2, 0.0, 3 * PI / 2), 0b0011),
    "y1+": ((0, 1, 1), (PI, 3 * PI / 2, PI / 2, 3 * PI / 2), 0b0100),
    "y2+": ((1, 0, 1), (0.0, 3 * PI / 2, PI / 2, 3 * PI / 2), 0b0101),
    "y3+": ((1, 1, 0), (PI / 2, 3 * PI / 2, 0.0, 3 * PI / 2), 0b0110),
    "h1": ((-1, 1, 1), (3 * PI / 2, 3 * PI / 2, THETA_H, 3 * PI / 2), 0b0111),
    "h2": ((1, -1, 1), (PI / 2, PI / 2, THETA_H, 3 * PI / 2), 0b1000),
    "h3": ((1, 1, -1), (PI / 2, 3 * PI / 2, THETA_H, PI / 2), 0b1001),
    "h0": ((1, 1, 1), (PI / 2, 3 * PI / 2, THETA_H, 3 * PI / 2), 0b1010),
    "z1": ((1, 0, 0), (0.0, 3 * PI / 2, 0.0, 3 * PI / 2), 0b1011),
    "z2": ((0, 1, 0), (PI, 3 * PI / 2, 0.0, 3 * PI / 2), 0b1100),
    "z3": ((0, 0, 1), (0.0, 3 * PI / 2, PI, 3 * PI / 2), 0b1101),
}


@dataclass(frozen=True)
class Ray:
    id: int
    label: str
    direction: Tuple[int, int, int]
    angles: Tuple[float, float, float, float]
    qrng_code: int

    @cached_property
    def unit(self) -> np.ndarray:
        v = np.asarray(self.direction, dtype=float)
        v = v / np.linalg.norm(v)
        v.flags.writeable = False
        return v

    @property
    def family(self) -> str:
        return self.label[0]

    @property
    def code_bits(self) -> str:
        return format(self.qrng_code, "04b")

    def dot(self, other: "Ray") -> int:
        return sum(a * b for a, b in zip(self.direction, other.direction))


@lru_cache(maxsize=1)
def build_rays() -> Tuple[Ray, ...]:
    rays = []
    for i, label in enumerate(RAY_LABELS):
        direction, angles, code = _RAY_TABLE[label]
        rays.append(Ray(id=i, label=label, direction=direction, angles=angles, qrng_code=code))
    return tuple(rays)


@lru_cache(maxsize=1)
def rays_by_code() -> Dict[int, Ray]:
    return {r.qrng_code: r for r in build_rays()}


def get_ray(ray: Union[int, str, Ray]) -> Ray:
    if isinstance(ray, Ray):
        return ray
    rays = build_rays()
    if isinstance(ray, str):
        return rays[DEFAULT_RESOLVER.ray_id(ray)]
    if isinstance(ray, (int, np.integer)) and 0 <= int(ray) < N_RAYS:
        return rays[int(ray)]
    raise UnknownRayError(ray)


@dataclass(frozen=True, eq=False)
class OrthGraph:
    adjacency: np.ndarray
    edges: Tuple[Tuple[int, int], ...] = field(default=())

    def __post_init__(self):
        adj = np.array(self.adjacency, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {adj.shape}")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        if adj.diagonal().any():
            raise ValueError("adjacency must not contain self-loops")
        adj.flags.writeable = False
        object.__setattr__(self, "adjacency", adj)
        n = adj.shape[0]
        edges = tuple((u, v) for u in range(n) for v in range(u + 1, n) if adj[u, v])
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_edges(cls, n: int, edges) -> "OrthGraph":
        adj = np.zeros((n, n), dtype=bool)
        for u, v in edges:
            adj[u, v] = adj[v, u] = True
        return cls(adj)

    @property
    def n_vertices(self) -> int:
        return int(self.adjacency.shape[0])

    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1)

    def neighbors(self, u: int) -> List[int]:
        return [int(v) for v in np.flatnonzero(self.adjacency[u])]

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adjacency[u, v])

    def relabeled(self, permutation) -> "OrthGraph":
        """Graph whose vertex i is vertex permutation[i] of this one."""
        p = np.asarray(permutation)
        return OrthGraph(self.adjacency[np.ix_(p, p)])

    def __eq__(self, other) -> bool:
        return isinstance(other, OrthGraph) and np.array_equal(self.adjacency, other.adjacency)

    def __hash__(self):
        return hash(self.adjacency.tobytes())


def build_graph(rays=None) -> OrthGraph:
    """Edge iff the exact integer dot product of the two directions vanishes."""
    rays = tuple(rays) if rays is not None else build_rays()
    edges = [(u.id, v.id) for u, v in combinations(rays, 2) if u.dot(v) == 0]
    return OrthGraph.from_edges(len(rays), edges)


@lru_cache(maxsize=1)
def reference_graph() -> OrthGraph:
    return build_graph(build_rays())


@dataclass(frozen=True)
class WitnessSets:
    V: Tuple[int, ...]
    V_h: Tuple[int, ...]
    E: Tuple[Tuple[int, int], ...]
    C2: Tuple[Tuple[int, int], ...]
    C3: Tuple[Tuple[int, int, int], ...]

    @property
    def V_not_h(self) -> Tuple[int, ...]:
        return tuple(v for v in self.V if v not in self.V_h)

    @property
    def E_not_C2(self) -> Tuple[Tuple[int, int], ...]:
        c2 = {frozenset(p) for p in self.C2}
        return tuple(e for e in self.E if frozenset(e) not in c2)


def witness_sets(graph: OrthGraph = None) -> WitnessSets:
    graph = graph if graph is not None else reference_graph()
    rid = DEFAULT_RESOLVER.ray_id
    c2: List[Tuple[int, int]] = []
    c3: List[Tuple[int, int, int]] = []
    for k in (1, 2, 3):
        z, yp, ym = rid(f"z{k}"), rid(f"y{k}+"), rid(f"y{k}-")
        c2.extend([(z, yp), (z, ym), (yp, ym)])
        c3.append((z, yp, ym))
    return WitnessSets(
        V=tuple(range(graph.n_vertices)),
        V_h=tuple(rid(h) for h in ("h1", "h2", "h3", "h0")),
        E=graph.edges,
        C2=tuple(c2),
        C3=tuple(c3),
    )


@dataclass(frozen=True)
class IdealPredictions:
    chi_yo: Fraction
    chi_opt3: Fraction
    single: Fraction
    pair: Fraction
    triple: Fraction


def ideal_predictions() -> IdealPredictions:
    """Quantum values for any qutrit state under ideal conditions."""
    return IdealPredictions(
        chi_yo=Fraction(25, 3),
        chi_opt3=Fraction(83, 3),
        single=Fraction(1, 3),
        pair=Fraction(-1, 3),
        triple=Fraction(-1),
    )


def ray_table_document() -> Dict:
    rays = build_rays()
    graph = reference_graph()
    return {
        "rays": [
            {
                "id": r.id,
                "label": r.label,
                "direction": list(r.direction),
                "angles": {
                    "theta1": r.angles[0],
                    "phi1": r.angles[1],
                    "theta2": r.angles[2],
                    "phi2": r.angles[3],
                },
                "qrng_code": r.code_bits,
            }
            for r in rays
        ],
        "invalid_qrng_codes": [format(c, "04b") for c in INVALID_QRNG_CODES],
        "edges": [[rays[u].label, rays[v].label] for u, v in graph.edges],
        "classical_bounds": {"chi_yo": CLASSICAL_BOUND_YO, "chi_opt3": CLASSICAL_BOUND_OPT3},
    }
