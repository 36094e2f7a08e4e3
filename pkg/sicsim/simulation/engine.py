"""
Sequential, state-recycled measurement stream.

Every measurement of ray v is: the rotation U_v (carrying v onto |0>), a
fluorescence detection that projects onto |0> ("bright", outcome -1) or onto
the |1>,|2> plane ("dark", outcome +1), optical pumping back to |0> after a
bright result, and the back rotation U_v^dagger. The post-measurement state is
the input of the next measurement.

Subsequences run until a bright detection at or after `min_len` records, or
are purged once more than `purge_run_length` dark results occur in a row.
A campaign chains subsequences: each starts from the last ray of the previous
kept one; after a purge the same v0 is used again.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple, Union

import numpy as np
from scipy.stats import poisson

from shared_libs.config_models.noise import CampaignConfig, NoiseConfig
from sicsim.core.qutrit import BRIGHT, DARK, QutritState, compose_uv
from sicsim.core.yuoh import Ray, build_rays, get_ray
from sicsim.simulation.qrng import BitSource, FixedBitStream, SeededBitStream, qrng_next_ray
from sicsim.utils.errors import SicError

# Support of the tabulated photon-count distributions.
MAX_COUNT = 120

_E0 = np.array([1.0, 0.0, 0.0], dtype=complex)


class SimulationStalledError(SicError):
    pass


class EndReason(str, enum.Enum):
    BRIGHT_AFTER_MIN = "bright-after-min"
    PURGE = "purge"


@dataclass(frozen=True)
class MeasurementRecord:
    ray_id: int
    outcome: int
    photon_count: int
    index: int

    def is_consistent(self, threshold: float) -> bool:
        return self.outcome == outcome_from_count(self.photon_count, threshold)


def outcome_from_count(photon_count: int, threshold: float) -> int:
    return BRIGHT if photon_count > threshold else DARK


@dataclass(eq=False)
class Subsequence:
    """One line of a campaign. Records are held column-wise."""
    v0: int
    ray_ids: np.ndarray
    photon_counts: np.ndarray
    outcomes: np.ndarray
    purged: bool
    end_reason: Optional[EndReason]
    start_index: int = 0
    omitted: bool = False

    def __post_init__(self):
        self.ray_ids = np.asarray(self.ray_ids, dtype=np.int8)
        self.photon_counts = np.asarray(self.photon_counts, dtype=np.int32)
        self.outcomes = np.asarray(self.outcomes, dtype=np.int8)
        if not (len(self.ray_ids) == len(self.photon_counts) == len(self.outcomes)):
            raise ValueError("Subsequence columns must have equal length")

    def __len__(self) -> int:
        return len(self.ray_ids)

    @property
    def records(self) -> List[MeasurementRecord]:
        return [
            MeasurementRecord(int(r), int(a), int(c), self.start_index + k)
            for k, (r, a, c) in enumerate(zip(self.ray_ids, self.outcomes, self.photon_counts))
        ]

    @property
    def last_ray(self) -> int:
        return int(self.ray_ids[-1]) if len(self) else self.v0

    @property
    def excluded(self) -> bool:
        """Excluded from every analysis stream."""
        return self.purged or self.omitted

    def trailing_dark_run(self) -> int:
        bright = np.flatnonzero(self.outcomes == BRIGHT)
        return len(self) if len(bright) == 0 else len(self) - 1 - int(bright[-1])


@dataclass(eq=False)
class Campaign:
    subsequences: List[Subsequence] = field(default_factory=list)
    config: Optional[CampaignConfig] = None
    threshold: float = 5.5

    def __iter__(self) -> Iterator[Subsequence]:
        return iter(self.subsequences)

    def __len__(self) -> int:
        return len(self.subsequences)

    @property
    def total_records(self) -> int:
        return sum(len(s) for s in self.subsequences)

    @property
    def analysed_records(self) -> int:
        return sum(len(s) for s in self.subsequences if not s.excluded)

    @property
    def purge_count(self) -> int:
        return sum(1 for s in self.subsequences if s.purged)

    def bright_fraction(self) -> float:
        kept = [s.outcomes for s in self.subsequences if not s.excluded and len(s)]
        if not kept:
            return float("nan")
        outcomes = np.concatenate(kept)
        return float(np.mean(outcomes == BRIGHT))


@dataclass
class RandomStreams:
    """Independent random streams for ray selection and for the physics."""
    physics: np.random.Generator
    bits: BitSource

    @classmethod
    def from_seed(cls, seed: int) -> "RandomStreams":
        ray_seq, physics_seq = np.random.SeedSequence(seed).spawn(2)
        return cls(physics=np.random.default_rng(physics_seq), bits=SeededBitStream(np.random.default_rng(ray_seq)))

    @classmethod
    def forced(cls, rays: List[Union[int, str]], seed: int = 0) -> "RandomStreams":
        """Streams whose ray choices replay the given rays in order."""
        bits = "".join(get_ray(r).code_bits for r in rays)
        return cls(physics=np.random.default_rng(seed), bits=FixedBitStream(bits))


class NoiseModel:
    """Precomputed pieces of a NoiseConfig used on every measurement."""

    def __init__(self, config: NoiseConfig):
        self.config = config
        self.rays: Tuple[Ray, ...] = build_rays()
        p = config.rotation_infidelity
        # Gaussian angle jitter whose mean pi-pulse infidelity E[sin^2(d/2)] equals p.
        self.jitter_sigma = float(np.sqrt(-2.0 * np.log(1.0 - 2.0 * p))) if p > 0 else 0.0
        self.coherent_ideal = self.jitter_sigma == 0.0 and config.rotation_systematic == 0.0
        self._forward = [compose_uv(r).entries for r in self.rays]
        self._backward = [u.conj().T for u in self._forward]
        self.count_cut = int(np.floor(config.threshold))
        support = np.arange(MAX_COUNT + 1)
        self._cdf_dark = poisson.cdf(support, config.poisson_dark_mean)
        self._cdf_bright = poisson.cdf(support, config.poisson_bright_mean)

    def _offsets(self, rng: np.random.Generator) -> Tuple[float, float]:
        d = self.config.rotation_systematic
        if self.jitter_sigma == 0.0:
            return d, d
        j1, j2 = rng.normal(0.0, self.jitter_sigma, size=2)
        return d + float(j1), d + float(j2)

    def forward(self, ray_id: int, rng: np.random.Generator) -> np.ndarray:
        if self.coherent_ideal:
            return self._forward[ray_id]
        return compose_uv(self.rays[ray_id], self._offsets(rng)).entries

    def backward(self, ray_id: int, rng: np.random.Generator) -> np.ndarray:
        if self.coherent_ideal:
            return self._backward[ray_id]
        return compose_uv(self.rays[ray_id], self._offsets(rng)).entries.conj().T

    def detect(self, true_bright: bool, rng: np.random.Generator) -> Tuple[int, int]:
        """(outcome, photon count) for a detection whose physical branch is known.

        The count is drawn from the branch's Poisson distribution restricted to
        the side of the threshold the reported outcome lies on.
        """
        cfg = self.config
        flip = cfg.detection_error_bright if true_bright else cfg.detection_error_dark
        reported_bright = true_bright != (flip > 0.0 and rng.random() < flip)
        return (BRIGHT if reported_bright else DARK), self._count(true_bright, reported_bright, rng)

    def detect_leaked(self, rng: np.random.Generator) -> Tuple[int, int]:
        """A leaked ion scatters nothing: always dark, count from the dark distribution."""
        return DARK, self._count(False, False, rng)

    def _count(self, true_bright: bool, reported_bright: bool, rng: np.random.Generator) -> int:
        cdf = self._cdf_bright if true_bright else self._cdf_dark
        cut = self.count_cut
        if reported_bright:
            lo, hi = cdf[cut], cdf[-1]
        else:
            lo, hi = 0.0, cdf[cut]
        u = lo + (hi - lo) * rng.random()
        count = int(np.searchsorted(cdf, u, side="right"))
        if reported_bright:
            count = min(max(count, cut + 1), MAX_COUNT)
        else:
            count = min(count, cut)
        return count


def _as_model(noise: Union[NoiseConfig, NoiseModel, None]) -> NoiseModel:
    if isinstance(noise, NoiseModel):
        return noise
    return NoiseModel(noise if noise is not None else NoiseConfig())


def _step(
    psi: Optional[np.ndarray],
    ray_id: int,
    model: NoiseModel,
    rng: np.random.Generator,
) -> Tuple[int, int, Optional[np.ndarray]]:
    """One measurement on raw amplitudes; psi None means leaked."""
    leak = model.config.leak_rate
    if psi is not None and leak > 0.0 and rng.random() < leak:
        psi = None
    if psi is None:
        outcome, count = model.detect_leaked(rng)
        return outcome, count, None

    phi = model.forward(ray_id, rng) @ psi
    p_bright = min(1.0, float(abs(phi[0]) ** 2))
    true_bright = rng.random() < p_bright
    if true_bright:
        phi = _E0
    else:
        phi = np.array([0.0, phi[1], phi[2]], dtype=complex)
        phi /= np.linalg.norm(phi)
    post = model.backward(ray_id, rng) @ phi
    post /= np.linalg.norm(post)
    outcome, count = model.detect(true_bright, rng)
    return outcome, count, post


def measure_once(
    state: Optional[QutritState],
    ray: Union[Ray, int, str],
    noise: Union[NoiseConfig, NoiseModel, None],
    rng: np.random.Generator,
    index: int = 0,
) -> Tuple[MeasurementRecord, Optional[QutritState]]:
    """Measure one ray. A state of None is the leaked, always-dark state."""
    ray = get_ray(ray)
    model = _as_model(noise)
    psi = None if state is None else state.amplitudes
    outcome, count, post = _step(psi, ray.id, model, rng)
    record = MeasurementRecord(ray_id=ray.id, outcome=outcome, photon_count=count, index=index)
    return record, (None if post is None else QutritState(post))


def prepared_state(v0: Union[Ray, int, str], noise: Union[NoiseConfig, NoiseModel, None], rng: np.random.Generator) -> np.ndarray:
    """Initialization to |0> followed by the back rotation of v0."""
    model = _as_model(noise)
    psi = model.backward(get_ray(v0).id, rng) @ _E0
    return psi / np.linalg.norm(psi)


def run_subsequence(
    v0: Union[Ray, int, str],
    min_len: int,
    purge_run_length: int = 55,
    noise: Union[NoiseConfig, NoiseModel, None] = None,
    rng: Optional[RandomStreams] = None,
    start_index: int = 0,
) -> Subsequence:
    if min_len < 1:
        raise ValueError(f"min_len must be >= 1, got {min_len}")
    v0 = get_ray(v0)
    model = _as_model(noise)
    streams = rng if rng is not None else RandomStreams.from_seed(0)
    physics = streams.physics

    psi: Optional[np.ndarray] = prepared_state(v0, model, physics)
    ray_ids: List[int] = []
    counts: List[int] = []
    outcomes: List[int] = []
    dark_run = 0
    while True:
        ray = qrng_next_ray(streams.bits)
        outcome, count, psi = _step(psi, ray.id, model, physics)
        ray_ids.append(ray.id)
        counts.append(count)
        outcomes.append(outcome)
        if outcome == DARK:
            dark_run += 1
            if dark_run > purge_run_length:
                return Subsequence(v0.id, ray_ids, counts, outcomes, True, EndReason.PURGE, start_index)
        else:
            dark_run = 0
            if len(ray_ids) >= min_len:
                return Subsequence(v0.id, ray_ids, counts, outcomes, False, EndReason.BRIGHT_AFTER_MIN, start_index)


def run_campaign(
    total: int,
    min_len: int = 1000,
    noise: Union[NoiseConfig, None] = None,
    seed: int = 0,
    purge_run_length: int = 55,
    initial_ray: Union[Ray, int, str] = "z1",
    max_consecutive_purges: int = 10_000,
) -> Campaign:
    """Chain subsequences until at least `total` kept records exist. Deterministic in `seed`."""
    noise = noise if noise is not None else NoiseConfig()
    config = CampaignConfig(
        total=total,
        seed=seed,
        min_len=min_len,
        purge_run_length=purge_run_length,
        initial_ray=get_ray(initial_ray).label,
        noise=noise,
    )
    return run_configured_campaign(config, max_consecutive_purges)


def run_configured_campaign(config: CampaignConfig, max_consecutive_purges: int = 10_000) -> Campaign:
    model = NoiseModel(config.noise)
    streams = RandomStreams.from_seed(config.seed)
    campaign = Campaign(config=config, threshold=config.noise.threshold)
    v0 = get_ray(config.initial_ray).id
    kept = 0
    index = 0
    purges_in_row = 0
    while kept < config.total:
        sub = run_subsequence(v0, config.min_len, config.purge_run_length, model, streams, start_index=index)
        campaign.subsequences.append(sub)
        index += len(sub)
        if sub.purged:
            purges_in_row += 1
            if purges_in_row > max_consecutive_purges:
                raise SimulationStalledError(
                    f"{purges_in_row} consecutive purged subsequences; check leak_rate/noise settings"
                )
            continue
        purges_in_row = 0
        kept += len(sub)
        v0 = sub.last_ray
    return campaign

