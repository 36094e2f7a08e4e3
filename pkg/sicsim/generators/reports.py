"""
Assemble report models from analysis results and write them out.

JSON reports are rendered from the pydantic models in
shared_libs/config_models/reports.py; tabular pieces (correlators, signaling
entries, histograms, epsilon matrix, memory states) go to CSV through polars.
Each write reports whether the file content changed since the previous run.
"""

from __future__ import annotations

import hashlib
import math
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

import polars as pl

from shared_libs.config_models.reports import (
    AnalysisReport,
    ConditionedEntry,
    CorrelatorEntry,
    DetectionSection,
    DiagnosticsSection,
    GaussianFitEntry,
    InfidelityEntry,
    Measured,
    MemorySection,
    Provenance,
    ReconstructionSection,
    SignalingSummary,
    WitnessEntry,
)
from sicsim.analysis.detection import PoissonMixtureFit
from sicsim.analysis.diagnostics import DiagnosticsReport, Direction, SignalingHistogram
from sicsim.analysis.memory import MemoryReport
from sicsim.analysis.reconstruct import BLIND_LETTERS, BlindResult, Reconstruction
from sicsim.analysis.witnesses import ConditionedWitness, Estimate, WitnessResult
from sicsim.core.yuoh import build_rays
from sicsim.simulation.engine import Campaign


def _finite(x: Optional[float]) -> Optional[float]:
    if x is None or not math.isfinite(x):
        return None
    return float(x)


def measured(est: Estimate) -> Measured:
    return Measured(value=_finite(est.value), std_error=_finite(est.std_error), samples=est.samples)


def provenance_for(campaign: Campaign, source: Optional[Union[str, Path]] = None) -> Provenance:
    cfg = campaign.config
    return Provenance(
        source=str(source) if source is not None else None,
        seed=cfg.seed if cfg is not None else None,
        config_hash=cfg.noise.config_hash() if cfg is not None else None,
        threshold=campaign.threshold,
        records=campaign.total_records,
        analysed_records=campaign.analysed_records,
        subsequences=len(campaign),
        excluded_subsequences=sum(1 for s in campaign if s.excluded),
    )


def witness_entry(result: WitnessResult) -> WitnessEntry:
    return WitnessEntry(**result.as_dict())


def correlator_entries(rows: Iterable[Dict]) -> List[CorrelatorEntry]:
    return [
        CorrelatorEntry(**{**row, "value": _finite(row["value"]), "std_error": _finite(row["std_error"])})
        for row in rows
    ]


def conditioned_entries(results: Iterable[ConditionedWitness]) -> List[ConditionedEntry]:
    return [
        ConditionedEntry(
            ray=c.ray,
            chi_yo=witness_entry(c.chi_yo) if c.chi_yo is not None else None,
            chi_opt3=witness_entry(c.chi_opt3) if c.chi_opt3 is not None else None,
            missing=list(c.missing),
        )
        for c in results
    ]


def _signaling_summary(direction: Direction, entries, histogram: Optional[SignalingHistogram]) -> SignalingSummary:
    summary = SignalingSummary(direction=direction.value, entries=len(entries))
    if entries:
        summary.mean_S = sum(e.S for e in entries) / len(entries)
        summary.mean_S_std_error = math.sqrt(sum(e.dS ** 2 for e in entries)) / len(entries)
    if histogram is not None:
        summary.underflow = histogram.underflow
        summary.overflow = histogram.overflow
        fit = histogram.fit
        summary.fit = GaussianFitEntry(mu=fit.mu, sigma=fit.sigma, amplitude=fit.amplitude, residual=fit.residual)
    return summary


def diagnostics_section(report: DiagnosticsReport) -> DiagnosticsSection:
    section = DiagnosticsSection(
        repeatability={k: measured(v) for k, v in report.repeatability.items()},
        lowest_repeatability=report.lowest_repeatability,
        notes=list(report.notes),
    )
    if report.infidelity is not None:
        inf = report.infidelity
        v, u = inf.largest
        section.pulse_infidelity = InfidelityEntry(
            mean=inf.mean,
            spread=inf.spread,
            largest=f"{v};{u}",
            largest_value=inf.entries[inf.largest].value,
            pairs={f"{a};{b}": measured(e) for (a, b), e in inf.entries.items()},
        )
    if report.detection is not None:
        section.detection_dark_given_bright = measured(report.detection.dark_given_bright)
        section.detection_bright_given_dark = measured(report.detection.bright_given_dark)
    section.signaling = [
        _signaling_summary(d, report.signaling.get(d, []), report.histograms.get(d)) for d in Direction
    ]
    return section


def reconstruction_section(result: Union[Reconstruction, BlindResult]) -> ReconstructionSection:
    rays = build_rays()
    blind = isinstance(result, BlindResult)
    names = BLIND_LETTERS if blind else tuple(r.label for r in rays)
    graph = result.graph
    section = ReconstructionSection(
        threshold=result.estimate.threshold,
        n_edges=len(graph.edges),
        edges=[[names[u], names[v]] for u, v in graph.edges],
        degree_multiset=sorted(int(d) for d in graph.degrees()),
        failure=result.failure,
    )
    if result.labeling is not None:
        section.permutation = {rays[i].label: names[v] for i, v in enumerate(result.labeling.permutation)}
        section.verified = result.labeling.verified
    if blind and result.labeling is not None:
        section.blind_assignment = {k: list(v) for k, v in result.assignment().items()}
    return section


def memory_section(report: MemoryReport) -> MemorySection:
    data = report.as_dict()
    return MemorySection(
        depth=data["depth"],
        counts=data["counts"],
        entropy_bits=data["entropy_bits"],
        semicircle_ok=data["semicircle_ok"],
        entropy_monotone=data["entropy_monotone"],
        comparisons=data["comparisons"],
        warnings=data["warnings"],
    )


def detection_section(fit: PoissonMixtureFit) -> DetectionSection:
    data = fit.as_dict()
    for key in ("threshold", "p_dark_read_bright", "p_bright_read_dark"):
        data[key] = _finite(data[key])
    return DetectionSection(**data)


def histogram_rows(histograms: Dict[Direction, Optional[SignalingHistogram]]) -> List[Dict]:
    rows = []
    for direction, hist in histograms.items():
        if hist is None:
            continue
        for lo, hi, count in zip(hist.edges[:-1], hist.edges[1:], hist.counts):
            rows.append({"direction": direction.value, "lo": float(lo), "hi": float(hi), "count": int(count)})
    return rows


def _content_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def write_text(path: Path, content: str) -> bool:
    old_hash = None
    if path.exists():
        try:
            old_hash = _content_hash(path.read_text(encoding="utf-8"))
        except OSError:
            old_hash = None
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content, encoding="utf-8")
    except OSError as e:
        print(f"❌ Error writing to {path}: {e}")
        return False
    if old_hash is not None and old_hash != _content_hash(content):
        print(f"✅ Wrote {path} (content changed since the last run)")
    else:
        print(f"✅ Wrote {path}")
    return True


def write_report(report: AnalysisReport, path: Union[str, Path]) -> bool:
    return write_text(Path(path), report.model_dump_json(indent=2) + "\n")


def write_csv(rows: List[Dict], path: Union[str, Path], columns: Optional[List[str]] = None) -> bool:
    """CSV via polars; an empty table still gets its header when columns are given."""
    if rows:
        frame = pl.DataFrame(rows)
    else:
        frame = pl.DataFrame({c: [] for c in (columns or [])})
    return write_text(Path(path), frame.write_csv())


def build_analysis_report(campaign: Campaign, source=None, **sections) -> AnalysisReport:
    return AnalysisReport(provenance=provenance_for(campaign, source), **sections)
