"""
Sharpness and compatibility diagnostics: repeatability, pulse infidelity,
forward/backward signaling and Gaussian fits to the signaling histograms.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from sicsim.analysis.tables import MINUS, PLUS, CountTables, RecordsLike, RecordStream, as_stream
from sicsim.analysis.witnesses import Estimate
from sicsim.core.yuoh import build_rays, get_ray, reference_graph
from sicsim.utils.errors import FitConvergenceError, InsufficientDataError

HISTOGRAM_EDGES = np.linspace(-6.0, 6.0, 25)
MIN_HISTOGRAM_ENTRIES = 50


class Direction(str, enum.Enum):
    BACKWARD = "backward"
    FORWARD = "forward"


def _binomial(hits: int, n: int, what: str) -> Estimate:
    if n == 0:
        raise InsufficientDataError(f"No samples for {what}", [what])
    p = hits / n
    return Estimate(p, math.sqrt(p * (1.0 - p) / n), n)


def repeatability(tables: CountTables, u) -> Estimate:
    """Fraction of consecutive (u, u) pairs with equal outcomes."""
    u = get_ray(u)
    cells = tables.n2[u.id, u.id]
    return _binomial(int(cells[PLUS, PLUS] + cells[MINUS, MINUS]), int(cells.sum()), f"N(A_{u.label}, A_{u.label})")


def repeatability_survey(tables: CountTables) -> Dict[str, Estimate]:
    out = {}
    for ray in build_rays():
        try:
            out[ray.label] = repeatability(tables, ray.id)
        except InsufficientDataError:
            continue
    return out


def pulse_infidelity(records: RecordsLike, v, i="z1") -> Estimate:
    """Probability of a bright outcome on v right after a bright outcome on an
    orthogonal ray i."""
    v, i = get_ray(v), get_ray(i)
    if not reference_graph().has_edge(v.id, i.id):
        raise ValueError(f"{v.label} is not orthogonal to {i.label}")
    counts = as_stream(records).conditioned(i.id).n1[v.id]
    return _binomial(int(counts[MINUS]), int(counts.sum()), f"N_{i.label}(A_{v.label})")


@dataclass(frozen=True)
class InfidelitySurvey:
    entries: Dict[Tuple[str, str], Estimate]
    mean: float
    spread: float
    largest: Tuple[str, str]


def pulse_infidelity_survey(records: RecordsLike) -> InfidelitySurvey:
    """P(v bright | u bright just before) for every ordered orthogonal pair (u, v)."""
    stream = as_stream(records)
    rays = build_rays()
    entries: Dict[Tuple[str, str], Estimate] = {}
    for u, v in reference_graph().edges:
        for first, second in ((u, v), (v, u)):
            try:
                entries[(rays[second].label, rays[first].label)] = pulse_infidelity(stream, second, first)
            except InsufficientDataError:
                continue
    if not entries:
        raise InsufficientDataError("No conditioned pairs for pulse infidelity", ["N_u(A_v)"])
    values = np.array([e.value for e in entries.values()])
    largest = max(entries, key=lambda k: entries[k].value)
    return InfidelitySurvey(entries, float(values.mean()), float(values.std()), largest)


@dataclass(frozen=True)
class DetectionRepeatability:
    dark_given_bright: Estimate
    bright_given_dark: Estimate


def detection_repeatability(records: RecordsLike, ray="z1") -> DetectionRepeatability:
    """Misread rates from repeated measurements of the same ray, no pulses in between."""
    stream = as_stream(records)
    ray = get_ray(ray)
    after_bright = stream.conditioned(ray.id).n1[ray.id]
    after_dark = stream.conditioned(ray.id, perpendicular=True).n1[ray.id]
    return DetectionRepeatability(
        dark_given_bright=_binomial(int(after_bright[PLUS]), int(after_bright.sum()), f"N_{ray.label}(A_{ray.label})"),
        bright_given_dark=_binomial(int(after_dark[MINUS]), int(after_dark.sum()), f"N_perp{ray.label}(A_{ray.label})"),
    )


@dataclass(frozen=True)
class SignalingEntry:
    u: int
    v: int
    w: int
    i: int
    direction: Direction
    S: float
    dS: float

    @property
    def normalized(self) -> float:
        if self.dS == 0.0:
            return math.nan
        return self.S / self.dS

    def as_dict(self) -> Dict:
        rays = build_rays()
        return {
            "u": rays[self.u].label,
            "v": rays[self.v].label,
            "w": rays[self.w].label,
            "i": rays[self.i].label,
            "direction": self.direction.value,
            "S": self.S,
            "dS": self.dS,
        }


def _bright_given_context(tables: CountTables, u: int, ctx: int, direction: Direction) -> Tuple[float, int]:
    if direction is Direction.BACKWARD:
        # u measured first, context afterwards
        cells = tables.n2[u, ctx]
        bright = int(cells[MINUS].sum())
    else:
        cells = tables.n2[ctx, u]
        bright = int(cells[:, MINUS].sum())
    n = int(cells.sum())
    return (bright / n if n else math.nan), n


def signaling(records: RecordsLike, u, v, w, i, direction) -> SignalingEntry:
    """S = P(A_u = -1 | context v) - P(A_u = -1 | context w), both following a bright i."""
    u, v, w, i = (get_ray(x).id for x in (u, v, w, i))
    direction = Direction(direction)
    graph = reference_graph()
    if v == w or not (graph.has_edge(u, v) and graph.has_edge(u, w)):
        raise ValueError("signaling needs two different rays both orthogonal to u")
    tables = as_stream(records).conditioned(i)
    p1, n1 = _bright_given_context(tables, u, v, direction)
    p2, n2 = _bright_given_context(tables, u, w, direction)
    rays = build_rays()
    missing = [f"N_{rays[i].label}({rays[u].label},{rays[c].label})" for c, n in ((v, n1), (w, n2)) if n == 0]
    if missing:
        raise InsufficientDataError("Missing conditioned pairs for signaling", missing)
    dS = math.sqrt(p1 * (1.0 - p1) / n1 + p2 * (1.0 - p2) / n2)
    return SignalingEntry(u, v, w, i, direction, p1 - p2, dS)


def signaling_ensemble(records: RecordsLike, direction, i=None) -> List[SignalingEntry]:
    """Every admissible (u, {v, w}, i) with v < w and a nonzero dS."""
    stream = as_stream(records)
    graph = reference_graph()
    inputs = [get_ray(i).id] if i is not None else range(graph.n_vertices)
    entries: List[SignalingEntry] = []
    for inp in inputs:
        for u in range(graph.n_vertices):
            for v, w in combinations(graph.neighbors(u), 2):
                try:
                    entry = signaling(stream, u, v, w, inp, direction)
                except InsufficientDataError:
                    continue
                if entry.dS > 0.0:
                    entries.append(entry)
    return entries


@dataclass(frozen=True)
class GaussianFit:
    mu: float
    sigma: float
    amplitude: float
    residual: float


@dataclass(frozen=True)
class SignalingHistogram:
    edges: np.ndarray
    counts: np.ndarray
    underflow: int
    overflow: int
    fit: GaussianFit
    entries: int = field(default=0)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])


def _gaussian(x, amplitude, mu, sigma):
    return amplitude * np.exp(-((x - mu) ** 2) / (2.0 * sigma ** 2))


def fit_gaussian(centers: np.ndarray, counts: np.ndarray, p0: Sequence[float]) -> GaussianFit:
    """Unweighted least-squares Gaussian fit to histogram bin counts."""
    counts = np.asarray(counts, dtype=float)
    try:
        popt, _ = optimize.curve_fit(_gaussian, centers, counts, p0=p0, maxfev=5000)
    except RuntimeError as e:
        residual = float(np.sum((counts - _gaussian(centers, *p0)) ** 2))
        raise FitConvergenceError(f"Gaussian fit did not converge: {e}", residual) from e
    amplitude, mu, sigma = (float(x) for x in popt)
    residual = float(np.sum((counts - _gaussian(centers, *popt)) ** 2))
    if not np.isfinite(popt).all() or sigma == 0.0:
        raise FitConvergenceError("Gaussian fit returned a degenerate width", residual)
    return GaussianFit(mu=mu, sigma=abs(sigma), amplitude=amplitude, residual=residual)


def histogram_normalized(values: Sequence[float]) -> SignalingHistogram:
    """Histogram of S/dS values in half-unit bins over [-6, 6] with a Gaussian fit."""
    z = np.asarray(values, dtype=float)
    z = z[np.isfinite(z)]
    if len(z) < MIN_HISTOGRAM_ENTRIES:
        raise InsufficientDataError(
            f"Need at least {MIN_HISTOGRAM_ENTRIES} signaling entries, got {len(z)}", ["signaling entries"]
        )
    lo, hi = HISTOGRAM_EDGES[0], HISTOGRAM_EDGES[-1]
    inside = z[(z >= lo) & (z < hi)]
    counts, edges = np.histogram(inside, bins=HISTOGRAM_EDGES)
    centers = 0.5 * (edges[:-1] + edges[1:])
    std = float(inside.std()) if len(inside) > 1 and inside.std() > 0 else 1.0
    p0 = (float(counts.max()), float(inside.mean()) if len(inside) else 0.0, std)
    fit = fit_gaussian(centers, counts, p0)
    return SignalingHistogram(
        edges=edges,
        counts=counts,
        underflow=int(np.sum(z < lo)),
        overflow=int(np.sum(z >= hi)),
        fit=fit,
        entries=len(z),
    )


def signaling_histogram(entries: Sequence[SignalingEntry]) -> SignalingHistogram:
    return histogram_normalized([e.normalized for e in entries])


@dataclass
class DiagnosticsReport:
    repeatability: Dict[str, Estimate]
    infidelity: Optional[InfidelitySurvey]
    detection: Optional[DetectionRepeatability]
    signaling: Dict[Direction, List[SignalingEntry]]
    histograms: Dict[Direction, Optional[SignalingHistogram]]
    notes: List[str] = field(default_factory=list)

    @property
    def lowest_repeatability(self) -> Optional[str]:
        if not self.repeatability:
            return None
        return min(self.repeatability, key=lambda k: self.repeatability[k].value)


def diagnose(stream: RecordStream) -> DiagnosticsReport:
    """Every diagnostic that the stream has data for; missing pieces are noted."""
    notes: List[str] = []
    tables = stream.tables()
    infidelity = detection = None
    try:
        infidelity = pulse_infidelity_survey(stream)
    except InsufficientDataError as e:
        notes.append(str(e))
    try:
        detection = detection_repeatability(stream)
    except InsufficientDataError as e:
        notes.append(str(e))
    signals: Dict[Direction, List[SignalingEntry]] = {}
    histograms: Dict[Direction, Optional[SignalingHistogram]] = {}
    for direction in Direction:
        signals[direction] = signaling_ensemble(stream, direction)
        try:
            histograms[direction] = signaling_histogram(signals[direction])
        except (InsufficientDataError, FitConvergenceError) as e:
            histograms[direction] = None
            notes.append(f"{direction.value}: {e}")
    return DiagnosticsReport(
        repeatability=repeatability_survey(tables),
        infidelity=infidelity,
        detection=detection,
        signaling=signals,
        histograms=histograms,
        notes=notes,
    )
