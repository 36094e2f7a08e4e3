"""
Outcome count tables over the concatenated measurement stream.

Outcome slots are indexed 0 for +1 (dark) and 1 for -1 (bright). Windows of
length 1, 2 and 3 are counted over consecutive records of a segment; a segment
is a maximal run of analysed subsequences, so windows cross ordinary
subsequence boundaries but never an excluded (purged or "o"-marked) line.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from sicsim.core.yuoh import N_RAYS, get_ray, reference_graph, witness_sets
from sicsim.simulation.engine import Campaign, MeasurementRecord, Subsequence

PLUS = 0
MINUS = 1

_N1_SHAPE = (N_RAYS, 2)
_N2_SHAPE = (N_RAYS, N_RAYS, 2, 2)
_N3_SHAPE = (N_RAYS, N_RAYS, N_RAYS, 2, 2, 2)


def outcome_slot(outcome):
    """+1 -> 0, -1 -> 1; works elementwise on arrays."""
    return (1 - np.asarray(outcome, dtype=np.int64)) // 2


@dataclass(eq=False)
class CountTables:
    n1: np.ndarray = field(default_factory=lambda: np.zeros(_N1_SHAPE, dtype=np.int64))
    n2: np.ndarray = field(default_factory=lambda: np.zeros(_N2_SHAPE, dtype=np.int64))
    n3: np.ndarray = field(default_factory=lambda: np.zeros(_N3_SHAPE, dtype=np.int64))
    total: int = 0
    segments: int = 0

    def __post_init__(self):
        for name, shape in (("n1", _N1_SHAPE), ("n2", _N2_SHAPE), ("n3", _N3_SHAPE)):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            if arr.shape != shape:
                raise ValueError(f"{name} must have shape {shape}, got {arr.shape}")
            setattr(self, name, arr)

    def merge(self, other: "CountTables") -> "CountTables":
        return CountTables(
            self.n1 + other.n1,
            self.n2 + other.n2,
            self.n3 + other.n3,
            self.total + other.total,
            self.segments + other.segments,
        )

    __add__ = merge

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CountTables)
            and self.total == other.total
            and self.segments == other.segments
            and np.array_equal(self.n1, other.n1)
            and np.array_equal(self.n2, other.n2)
            and np.array_equal(self.n3, other.n3)
        )

    @property
    def pair_total(self) -> int:
        return int(self.n2.sum())

    @property
    def triple_total(self) -> int:
        return int(self.n3.sum())


def _bincount(keys: np.ndarray, size: int) -> np.ndarray:
    return np.bincount(keys, minlength=size).astype(np.int64)


def _count_windows(
    rays: np.ndarray,
    slots: np.ndarray,
    starts: np.ndarray,
    tables: CountTables,
):
    """Add the 1-, 2- and 3-windows beginning at each index in `starts`."""
    n = len(rays)
    if len(starts) == 0:
        return
    r0, a0 = rays[starts], slots[starts]
    tables.n1 += _bincount(r0 * 2 + a0, N_RAYS * 2).reshape(_N1_SHAPE)
    tables.total += len(starts)

    s2 = starts[starts + 1 < n]
    if len(s2):
        key = ((rays[s2] * N_RAYS + rays[s2 + 1]) * 2 + slots[s2]) * 2 + slots[s2 + 1]
        tables.n2 += _bincount(key, N_RAYS ** 2 * 4).reshape(_N2_SHAPE)

    s3 = starts[starts + 2 < n]
    if len(s3):
        key = (rays[s3] * N_RAYS + rays[s3 + 1]) * N_RAYS + rays[s3 + 2]
        key = ((key * 2 + slots[s3]) * 2 + slots[s3 + 1]) * 2 + slots[s3 + 2]
        tables.n3 += _bincount(key, N_RAYS ** 3 * 8).reshape(_N3_SHAPE)


@dataclass(frozen=True, eq=False)
class Segment:
    rays: np.ndarray
    slots: np.ndarray

    def __len__(self) -> int:
        return len(self.rays)


class RecordStream:
    """The analysis stream: segments of analysed records, in order."""

    def __init__(self, segments: Iterable[Segment] = ()):
        self.segments: List[Segment] = [s for s in segments if len(s)]
        self._tables: Optional[CountTables] = None
        self._conditioned: Dict[Tuple[int, bool], CountTables] = {}

    @classmethod
    def from_arrays(cls, ray_ids, outcomes) -> "RecordStream":
        return cls([Segment(np.asarray(ray_ids, dtype=np.int64), outcome_slot(outcomes))])

    @classmethod
    def from_records(cls, records: Iterable[MeasurementRecord]) -> "RecordStream":
        records = sorted(records, key=lambda r: r.index)
        return cls.from_arrays([r.ray_id for r in records], [r.outcome for r in records])

    @classmethod
    def from_subsequences(cls, subsequences: Iterable[Subsequence]) -> "RecordStream":
        segments: List[Segment] = []
        rays: List[np.ndarray] = []
        outcomes: List[np.ndarray] = []

        def close():
            if rays:
                segments.append(Segment(np.concatenate(rays).astype(np.int64), outcome_slot(np.concatenate(outcomes))))
            rays.clear()
            outcomes.clear()

        for sub in subsequences:
            if sub.excluded:
                close()
                continue
            rays.append(sub.ray_ids)
            outcomes.append(sub.outcomes)
        close()
        return cls(segments)

    def __len__(self) -> int:
        return sum(len(s) for s in self.segments)

    def tables(self) -> CountTables:
        if self._tables is None:
            self._tables = accumulate(self)
        return self._tables

    def conditioned(self, i, perpendicular: bool = False) -> CountTables:
        ray_id = get_ray(i).id
        key = (ray_id, perpendicular)
        if key not in self._conditioned:
            self._conditioned[key] = conditioned_tables(self, ray_id, perpendicular)
        return self._conditioned[key]


RecordsLike = Union[RecordStream, Campaign, Sequence[Subsequence], Iterable[MeasurementRecord]]


def as_stream(records: RecordsLike) -> RecordStream:
    if isinstance(records, RecordStream):
        return records
    if isinstance(records, Campaign):
        return RecordStream.from_subsequences(records.subsequences)
    records = list(records)
    if records and isinstance(records[0], Subsequence):
        return RecordStream.from_subsequences(records)
    return RecordStream.from_records(records)


def accumulate(records: RecordsLike, tables: Optional[CountTables] = None) -> CountTables:
    """Add every window of the stream to `tables` (a fresh table when omitted)."""
    stream = as_stream(records)
    tables = CountTables() if tables is None else tables
    for seg in stream.segments:
        _count_windows(seg.rays, seg.slots, np.arange(len(seg)), tables)
        tables.segments += 1
    return tables


def _shard_tables(seg: Segment, start: int, stop: int) -> CountTables:
    # Windows starting in [start, stop) read at most two records past stop.
    hi = min(stop + 2, len(seg))
    rays, slots = seg.rays[start:hi], seg.slots[start:hi]
    part = CountTables()
    _count_windows(rays, slots, np.arange(stop - start), part)
    part.segments = 1 if start == 0 else 0
    return part


def accumulate_sharded(records: RecordsLike, shards: int = 4, workers: Optional[int] = None) -> CountTables:
    """Same result as `accumulate`, counted in `shards` chunks per segment and merged."""
    if shards < 1:
        raise ValueError(f"shards must be >= 1, got {shards}")
    stream = as_stream(records)
    jobs = []
    for seg in stream.segments:
        bounds = np.linspace(0, len(seg), shards + 1).astype(int)
        jobs.extend((seg, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a)
    result = CountTables()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(lambda job: _shard_tables(*job), jobs):
            result = result.merge(part)
    return result


def conditioned_tables(records: RecordsLike, i, perpendicular: bool = False) -> CountTables:
    """Windows whose immediately preceding record is ray i with outcome -1
    (outcome +1 when `perpendicular`)."""
    ray_id = get_ray(i).id
    wanted = PLUS if perpendicular else MINUS
    stream = as_stream(records)
    tables = CountTables()
    for seg in stream.segments:
        hit = np.flatnonzero((seg.rays[:-1] == ray_id) & (seg.slots[:-1] == wanted))
        _count_windows(seg.rays, seg.slots, hit + 1, tables)
        if len(hit):
            tables.segments += 1
    return tables


def ideal_count_tables(scale: int = 1) -> CountTables:
    """Integer tables carrying the exact ideal joint distributions of every
    measured single, compatible pair and C3 triple."""
    if scale < 1:
        raise ValueError(f"scale must be >= 1, got {scale}")
    s = scale
    tables = CountTables()
    tables.n1[:, PLUS] = 2 * s
    tables.n1[:, MINUS] = s
    for u, v in reference_graph().edges:
        tables.n2[u, v, PLUS, PLUS] = s
        tables.n2[u, v, PLUS, MINUS] = s
        tables.n2[u, v, MINUS, PLUS] = s
    for u, v, w in witness_sets().C3:
        tables.n3[u, v, w, MINUS, PLUS, PLUS] = s
        tables.n3[u, v, w, PLUS, MINUS, PLUS] = s
        tables.n3[u, v, w, PLUS, PLUS, MINUS] = s
    tables.total = int(tables.n1.sum())
    return tables
