# shared_libs/config_models/reports.py

from typing import Dict, List, Optional

from pydantic import BaseModel, Field

REPORT_SCHEMA_VERSION = 1


class Provenance(BaseModel):
    """Where a report's numbers come from."""
    schema_version: int = Field(REPORT_SCHEMA_VERSION, description="Version of the report layout.")
    source: Optional[str] = Field(None, description="Dataset file the report was computed from.")
    seed: Optional[int] = Field(None, description="Campaign seed, when known.")
    config_hash: Optional[str] = Field(None, description="sha256 of the canonical noise configuration.")
    threshold: Optional[float] = Field(None, description="Photon-count threshold the outcomes were derived with.")
    records: int = Field(0, description="Records in the dataset, excluded lines included.")
    analysed_records: int = Field(0, description="Records that entered the count tables.")
    subsequences: int = Field(0, description="Lines in the dataset.")
    excluded_subsequences: int = Field(0, description="Purged or 'o'-marked lines.")
    model_config = {"extra": "forbid"}


class Measured(BaseModel):
    value: Optional[float] = Field(..., description="Estimate; null when no samples exist.")
    std_error: Optional[float] = Field(..., description="Shot-noise standard error.")
    samples: int = Field(..., description="Number of samples behind the estimate.")
    model_config = {"extra": "forbid"}


class WitnessEntry(BaseModel):
    name: str
    value: float
    std_error: float
    bound: float
    sigma_violation: float
    samples: int
    model_config = {"extra": "forbid"}


class CorrelatorEntry(BaseModel):
    kind: str = Field(..., description="single, pair or triple.")
    observables: str = Field(..., description="Space-separated ray labels.")
    value: Optional[float]
    std_error: Optional[float]
    samples: int
    ideal: float
    model_config = {"extra": "forbid"}


class ConditionedEntry(BaseModel):
    ray: str = Field(..., description="Input ray i the windows are conditioned on.")
    chi_yo: Optional[WitnessEntry] = None
    chi_opt3: Optional[WitnessEntry] = None
    missing: List[str] = Field(default_factory=list)
    model_config = {"extra": "forbid"}


class GaussianFitEntry(BaseModel):
    mu: float
    sigma: float
    amplitude: float
    residual: float
    model_config = {"extra": "forbid"}


class SignalingSummary(BaseModel):
    direction: str
    entries: int
    underflow: int = 0
    overflow: int = 0
    fit: Optional[GaussianFitEntry] = None
    mean_S: Optional[float] = Field(None, description="Mean of S over the ensemble.")
    mean_S_std_error: Optional[float] = Field(None, description="Combined standard error of the mean of S.")
    model_config = {"extra": "forbid"}


class InfidelityEntry(BaseModel):
    mean: float
    spread: float
    largest: str = Field(..., description="'v;u' of the largest P(v bright | u bright).")
    largest_value: float
    pairs: Dict[str, Measured] = Field(default_factory=dict)
    model_config = {"extra": "forbid"}


class DiagnosticsSection(BaseModel):
    repeatability: Dict[str, Measured] = Field(default_factory=dict)
    lowest_repeatability: Optional[str] = None
    pulse_infidelity: Optional[InfidelityEntry] = None
    detection_dark_given_bright: Optional[Measured] = None
    detection_bright_given_dark: Optional[Measured] = None
    signaling: List[SignalingSummary] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)
    model_config = {"extra": "forbid"}


class ReconstructionSection(BaseModel):
    threshold: float
    n_edges: int
    edges: List[List[str]] = Field(default_factory=list)
    degree_multiset: List[int] = Field(default_factory=list)
    permutation: Optional[Dict[str, str]] = Field(None, description="Reference ray -> observed identifier.")
    verified: bool = False
    failure: Optional[str] = None
    blind_assignment: Optional[Dict[str, List[str]]] = Field(
        None, description="Reference ray -> [blind letter, ray the letter hid]."
    )
    model_config = {"extra": "forbid"}


class MemorySection(BaseModel):
    depth: int
    counts: List[int]
    entropy_bits: List[float]
    semicircle_ok: bool
    entropy_monotone: bool
    comparisons: Dict[str, float]
    warnings: List[str] = Field(default_factory=list)
    model_config = {"extra": "forbid"}


class DetectionSection(BaseModel):
    lambda_dark: float
    lambda_bright: float
    weight_dark: float
    weight_bright: float
    threshold: Optional[float]
    p_dark_read_bright: Optional[float]
    p_bright_read_dark: Optional[float]
    residual: float
    samples: int
    degenerate: bool = False
    reason: Optional[str] = None
    model_config = {"extra": "forbid"}


class AnalysisReport(BaseModel):
    """Everything derived from one dataset."""
    provenance: Provenance
    bright_fraction: Optional[Measured] = None
    witnesses: List[WitnessEntry] = Field(default_factory=list)
    correlators: List[CorrelatorEntry] = Field(default_factory=list)
    conditioned: List[ConditionedEntry] = Field(default_factory=list)
    diagnostics: Optional[DiagnosticsSection] = None
    reconstruction: Optional[ReconstructionSection] = None
    memory: Optional[MemorySection] = None
    detection: Optional[DetectionSection] = None
    model_config = {"extra": "forbid"}
