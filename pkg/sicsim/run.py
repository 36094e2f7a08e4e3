"""
Command-line entry point.

    python -m sicsim simulate --noise ideal --total 1000000 --seed 7 out.ds
    python -m sicsim analyze out.ds --out reports/out
    python -m sicsim diagnose out.ds
    python -m sicsim reconstruct out.ds --blind
    python -m sicsim memory --depth 5
    python -m sicsim detect-model out.ds
    python -m sicsim rays --out artifacts/rays.json
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
from pydantic import ValidationError

from shared_libs.config_models.noise import CampaignConfig
from sicsim.analysis.detection import fit_poisson_mixture, photon_histogram
from sicsim.analysis.diagnostics import diagnose
from sicsim.analysis.memory import memory_report, state_rows
from sicsim.analysis.reconstruct import BLIND_LETTERS, DEFAULT_EPSILON_THRESHOLD, blind_relabel, reconstruct
from sicsim.analysis.tables import RecordStream, accumulate_sharded
from sicsim.analysis.witnesses import (
    bright_fraction,
    conditioned_witnesses,
    correlator_table,
    witness_opt3,
    witness_yo,
)
from sicsim.core.yuoh import ray_table_document
from sicsim.generators import reports
from sicsim.generators.registry import RayTableGenerator
from sicsim.io.dataset import read_dataset, write_dataset
from sicsim.simulation.engine import Campaign, SimulationStalledError, run_configured_campaign
from sicsim.utils.errors import (
    CanonicalizationError,
    ConfigError,
    DatasetParseError,
    FitConvergenceError,
    InsufficientDataError,
    SicError,
    UnknownRayError,
)
from sicsim.validation.cross import DatasetCrossValidator
from sicsim.validation.noise import NoiseConfigValidator, resolve_noise_path

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_BAD_CONFIG = 3
EXIT_MISSING_FILE = 4
EXIT_PARSE_ERROR = 5
EXIT_INSUFFICIENT_DATA = 6

CORRELATOR_COLUMNS = ["kind", "observables", "value", "std_error", "samples", "ideal"]
SIGNALING_COLUMNS = ["u", "v", "w", "i", "direction", "S", "dS"]
HISTOGRAM_COLUMNS = ["direction", "lo", "hi", "count"]
EPSILON_COLUMNS = ["u", "w", "epsilon", "std_error", "samples", "compatible"]


def _out_prefix(args, suffix: str) -> Path:
    if args.out:
        return Path(args.out)
    return Path(args.dataset).with_name(Path(args.dataset).stem + suffix)


def _with_suffix(prefix: Path, tail: str) -> Path:
    return prefix.with_name(prefix.name + tail)


def _load(args) -> tuple[Campaign, RecordStream]:
    print(f"\n--- Loading Dataset: {args.dataset} ---")
    campaign = read_dataset(args.dataset, threshold_override=args.threshold)
    print(f"✅ {len(campaign)} subsequences, {campaign.total_records} records "
          f"({campaign.analysed_records} analysed, {campaign.purge_count} purged)")
    DatasetCrossValidator(campaign).validate()
    return campaign, RecordStream.from_subsequences(campaign.subsequences)


def cmd_simulate(args) -> int:
    noise = NoiseConfigValidator(resolve_noise_path(args.noise)).validate()
    if noise is None:
        raise ConfigError(f"invalid noise config {args.noise!r}")
    try:
        config = CampaignConfig(
            total=args.total,
            seed=args.seed,
            min_len=args.min_len,
            purge_run_length=args.purge_run_length,
            initial_ray=args.initial_ray,
            noise=noise,
        )
    except ValidationError as e:
        raise ConfigError(f"invalid campaign settings: {e}") from e

    print(f"\n--- Simulating {config.total} records (seed {config.seed}) ---")
    campaign = run_configured_campaign(config)
    print(f"✅ {len(campaign)} subsequences, {campaign.analysed_records} analysed records, "
          f"{campaign.purge_count} purged; bright fraction {campaign.bright_fraction():.4f}")
    write_dataset(campaign, args.output)
    print(f"✅ Wrote dataset {args.output}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    campaign, stream = _load(args)
    tables = accumulate_sharded(stream, shards=args.shards) if args.shards > 1 else stream.tables()

    print("\n--- Witnesses ---")
    witnesses = [witness_yo(tables), witness_opt3(tables)]
    for w in witnesses:
        print(f"   {w.name}: {w.value:.4f} +- {w.std_error:.4f} "
              f"({w.sigma_violation:.1f} sigma above the classical bound {w.bound:g})")

    rows = correlator_table(tables)
    sections = {
        "bright_fraction": reports.measured(bright_fraction(tables)),
        "witnesses": [reports.witness_entry(w) for w in witnesses],
        "correlators": reports.correlator_entries(rows),
    }
    if args.conditioned:
        sections["conditioned"] = reports.conditioned_entries(conditioned_witnesses(stream))
    report = reports.build_analysis_report(campaign, args.dataset, **sections)

    prefix = _out_prefix(args, "_report")
    ok = reports.write_report(report, _with_suffix(prefix, ".json"))
    ok &= reports.write_csv(rows, _with_suffix(prefix, "_correlators.csv"), CORRELATOR_COLUMNS)
    return EXIT_OK if ok else EXIT_UNEXPECTED


def cmd_diagnose(args) -> int:
    campaign, stream = _load(args)
    print("\n--- Diagnostics ---")
    result = diagnose(stream)
    section = reports.diagnostics_section(result)
    if result.lowest_repeatability is not None:
        low = result.repeatability[result.lowest_repeatability]
        print(f"   Lowest repeatability: {result.lowest_repeatability} = {low.value:.5f} +- {low.std_error:.5f}")
    for summary in section.signaling:
        if summary.fit is not None:
            print(f"   {summary.direction} signaling: {summary.entries} entries, "
                  f"mu={summary.fit.mu:.3f} sigma={summary.fit.sigma:.3f}")
    for note in result.notes:
        print(f"⚠️ Warning: {note}")

    report = reports.build_analysis_report(campaign, args.dataset, diagnostics=section)
    prefix = _out_prefix(args, "_diagnostics")
    signaling_rows = [e.as_dict() for entries in result.signaling.values() for e in entries]
    ok = reports.write_report(report, _with_suffix(prefix, ".json"))
    ok &= reports.write_csv(signaling_rows, _with_suffix(prefix, "_signaling.csv"), SIGNALING_COLUMNS)
    ok &= reports.write_csv(reports.histogram_rows(result.histograms), _with_suffix(prefix, "_histograms.csv"), HISTOGRAM_COLUMNS)
    return EXIT_OK if ok else EXIT_UNEXPECTED


def cmd_reconstruct(args) -> int:
    campaign, stream = _load(args)
    print("\n--- Reconstructing Compatibility Graph ---")
    if args.blind:
        result = blind_relabel(stream, np.random.default_rng(args.seed), args.epsilon_threshold)
        labels = BLIND_LETTERS
    else:
        result = reconstruct(stream, args.epsilon_threshold)
        labels = None
    section = reports.reconstruction_section(result)
    print(f"   Edges: {section.n_edges}")
    if result.failure:
        print(f"❌ {result.failure}")
    elif section.verified:
        print("✅ Recovered graph is the Yu-Oh graph up to relabeling.")
    else:
        print("❌ Relabeled graph differs from the Yu-Oh graph.")

    report = reports.build_analysis_report(campaign, args.dataset, reconstruction=section)
    prefix = _out_prefix(args, "_graph")
    ok = reports.write_report(report, _with_suffix(prefix, ".json"))
    ok &= reports.write_csv(result.estimate.rows(labels), _with_suffix(prefix, "_epsilon.csv"), EPSILON_COLUMNS)
    return EXIT_OK if ok else EXIT_UNEXPECTED


def cmd_memory(args) -> int:
    print(f"\n--- Enumerating States to Depth {args.depth} ---")
    result, atlas = memory_report(args.depth)
    print("counts: " + " ".join(str(c) for c in result.counts[1:]))
    print("entropy_bits: " + " ".join(f"{e:.4f}" for e in result.entropies[1:]))
    for warning in result.warnings:
        print(f"⚠️ Warning: {warning}")
    ok = True
    if args.out:
        section = reports.memory_section(result)
        ok &= reports.write_text(Path(args.out), section.model_dump_json(indent=2) + "\n")
    if args.csv:
        ok &= reports.write_csv(state_rows(atlas), Path(args.csv), ["depth", "a", "b", "c", "probability"])
    return EXIT_OK if ok else EXIT_UNEXPECTED


def _load_histogram(path: Path) -> np.ndarray:
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = text.split()
    try:
        return np.asarray([int(x) for x in data], dtype=np.int64)
    except (TypeError, ValueError) as e:
        raise DatasetParseError(1, f"histogram must be a list of integer bin counts: {e}") from None


def cmd_detect_model(args) -> int:
    if args.histogram:
        print(f"\n--- Loading Histogram: {args.histogram} ---")
        hist = _load_histogram(Path(args.histogram))
        campaign = None
    elif args.dataset:
        campaign = read_dataset(args.dataset)
        hist = photon_histogram(campaign)
    else:
        raise ConfigError("detect-model needs a dataset or --histogram")
    print("\n--- Fitting Two-Poisson Detection Model ---")
    fit = fit_poisson_mixture(hist, threshold=args.threshold)
    if fit.degenerate:
        print(f"⚠️ Warning: degenerate histogram: {fit.reason}")
    else:
        print(f"   dark mean {fit.lambda_dark:.4f}, bright mean {fit.lambda_bright:.4f}, "
              f"dark weight {fit.weight_dark:.4f}")
        print(f"   threshold {fit.threshold}: P(dark->bright)={fit.p_dark_read_bright:.3e}, "
              f"P(bright->dark)={fit.p_bright_read_dark:.3e}")
    section = reports.detection_section(fit)
    if args.out:
        if campaign is not None:
            report = reports.build_analysis_report(campaign, args.dataset, detection=section)
            text = report.model_dump_json(indent=2)
        else:
            text = section.model_dump_json(indent=2)
        if not reports.write_text(Path(args.out), text + "\n"):
            return EXIT_UNEXPECTED
    return EXIT_OK


def cmd_rays(args) -> int:
    if args.out:
        return EXIT_OK if RayTableGenerator(Path(args.out)).generate() else EXIT_UNEXPECTED
    print(json.dumps(ray_table_document(), indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sicsim", description="Yu-Oh qutrit contextuality simulator and statistics")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a campaign and write a dataset")
    p.add_argument("output", help="dataset file to write")
    p.add_argument("--noise", default="lab", help="noise preset name or YAML/JSON file (default: lab)")
    p.add_argument("--total", type=int, default=1_000_000, help="minimum number of analysed records")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-len", type=int, default=1000)
    p.add_argument("--purge-run-length", type=int, default=55)
    p.add_argument("--initial-ray", default="z1")
    p.set_defaults(func=cmd_simulate)

    def dataset_command(name: str, func, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("dataset", help="dataset file")
        p.add_argument("--out", help="output prefix")
        p.add_argument("--threshold", type=float, default=None, help="photon-count threshold override")
        p.set_defaults(func=func)
        return p

    p = dataset_command("analyze", cmd_analyze, "witnesses and correlators")
    p.add_argument("--shards", type=int, default=1, help="count windows in this many chunks per segment")
    p.add_argument("--conditioned", action="store_true", help="also report witnesses conditioned on each input ray")

    dataset_command("diagnose", cmd_diagnose, "repeatability, pulse infidelity and signaling")

    p = dataset_command("reconstruct", cmd_reconstruct, "infer the compatibility graph")
    p.add_argument("--epsilon-threshold", type=float, default=DEFAULT_EPSILON_THRESHOLD)
    p.add_argument("--blind", action="store_true", help="hide ray identities behind letters first")
    p.add_argument("--seed", type=int, default=0, help="seed of the blind relabeling")

    p = sub.add_parser("memory", help="reachable states and the classical memory bound")
    p.add_argument("--depth", type=int, default=5)
    p.add_argument("--out", help="JSON report path")
    p.add_argument("--csv", help="dump every canonical state to this CSV")
    p.set_defaults(func=cmd_memory)

    p = sub.add_parser("detect-model", help="fit the two-Poisson photon-count model")
    p.add_argument("dataset", nargs="?", help="dataset file")
    p.add_argument("--histogram", help="JSON list or whitespace-separated bin counts instead of a dataset")
    p.add_argument("--threshold", type=float, default=None, help="threshold to evaluate misclassification at")
    p.add_argument("--out", help="JSON report path")
    p.set_defaults(func=cmd_detect_model)

    p = sub.add_parser("rays", help="ray table and orthogonality edges as JSON")
    p.add_argument("--out", help="write to this file instead of stdout")
    p.set_defaults(func=cmd_rays)
    return parser


def _fail(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message, "exit_code": code}), file=sys.stderr)
    return code


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK
    try:
        return args.func(args)
    except FileNotFoundError as e:
        return _fail("missing_file", str(e), EXIT_MISSING_FILE)
    except DatasetParseError as e:
        return _fail("parse_error", str(e), EXIT_PARSE_ERROR)
    except InsufficientDataError as e:
        return _fail("insufficient_data", str(e), EXIT_INSUFFICIENT_DATA)
    except (ConfigError, UnknownRayError, ValidationError) as e:
        return _fail("bad_config", str(e), EXIT_BAD_CONFIG)
    except (CanonicalizationError, FitConvergenceError, SimulationStalledError, SicError) as e:
        return _fail(type(e).__name__, str(e), EXIT_UNEXPECTED)
    except Exception as e:  # noqa: BLE001
        return _fail("unexpected", f"{type(e).__name__}: {e}", EXIT_UNEXPECTED)


if __name__ == "__main__":
    raise SystemExit(main())
