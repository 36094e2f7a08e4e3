# shared_libs/config_models/noise.py

import hashlib
import json
from typing import Optional

try:
    from typing import Self
except ImportError:  # Python < 3.11
    from typing_extensions import Self

from pydantic import BaseModel, Field, model_validator

from sicsim.utils.errors import UnknownRayError
from sicsim.utils.labels import RAY_LABELS, LabelResolver


class NoiseConfig(BaseModel):
    """Imperfections applied by the simulator. Defaults are the reported lab values."""
    rotation_infidelity: float = Field(5e-3, ge=0.0, lt=0.5, description="Infidelity of a single pi-pulse from stochastic angle jitter (probability).")
    rotation_systematic: float = Field(0.0, description="Systematic over-rotation added to every nonzero theta angle (radians).")
    detection_error_dark: float = Field(1.9e-4, ge=0.0, le=1.0, description="Probability that a dark (D-manifold) state is read as bright.")
    detection_error_bright: float = Field(1.9e-4, ge=0.0, le=1.0, description="Probability that a bright (|0>) state is read as dark.")
    leak_rate: float = Field(3.5e-6, ge=0.0, le=1.0, description="Per-measurement probability of leaking into an always-dark state outside the qutrit.")
    poisson_dark_mean: float = Field(0.709, gt=0.0, description="Mean PMT counts of a dark detection window.")
    poisson_bright_mean: float = Field(18.75, gt=0.0, description="Mean PMT counts of a bright detection window.")
    threshold: float = Field(5.5, gt=0.0, description="Photon-count threshold; counts above it are bright.")
    model_config = {"extra": "forbid", "frozen": True}

    @model_validator(mode="after")
    def check_means_straddle_threshold(self) -> Self:
        if not self.poisson_dark_mean < self.threshold < self.poisson_bright_mean:
            raise ValueError(
                f"threshold {self.threshold} must lie between poisson_dark_mean {self.poisson_dark_mean} "
                f"and poisson_bright_mean {self.poisson_bright_mean}"
            )
        return self

    @classmethod
    def ideal(cls) -> "NoiseConfig":
        return cls(
            rotation_infidelity=0.0,
            rotation_systematic=0.0,
            detection_error_dark=0.0,
            detection_error_bright=0.0,
            leak_rate=0.0,
        )

    @property
    def is_ideal(self) -> bool:
        return (
            self.rotation_infidelity == 0.0
            and self.rotation_systematic == 0.0
            and self.detection_error_dark == 0.0
            and self.detection_error_bright == 0.0
            and self.leak_rate == 0.0
        )

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()


class CampaignConfig(BaseModel):
    """Everything needed to reproduce a simulated campaign bit for bit."""
    total: int = Field(1_000_000, ge=1, description="Minimum number of analysed (non-purged) records.")
    seed: int = Field(0, ge=0, description="Seed of the campaign's random streams.")
    min_len: int = Field(1000, ge=1, description="Minimum subsequence length before a bright detection may end it.")
    purge_run_length: int = Field(55, ge=1, description="A subsequence is purged once its dark run exceeds this length.")
    initial_ray: str = Field("z1", description="Label of the ray the first subsequence is initialized to.")
    noise: NoiseConfig = Field(default_factory=NoiseConfig, description="Noise model.")
    model_config = {"extra": "forbid", "frozen": True}

    @model_validator(mode="after")
    def check_campaign(self) -> Self:
        if self.total < self.min_len:
            raise ValueError(f"total ({self.total}) must be at least min_len ({self.min_len})")
        try:
            LabelResolver(RAY_LABELS).ray_id(self.initial_ray)
        except UnknownRayError as e:
            raise ValueError(str(e)) from e
        return self

    def with_noise(self, noise: Optional[NoiseConfig]) -> "CampaignConfig":
        if noise is None:
            return self
        return self.model_copy(update={"noise": noise})
