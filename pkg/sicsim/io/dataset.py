"""
Line-based campaign files.

    # sicsim-dataset 1
    # seed: 7
    # threshold: 5.5
    # noise: {...}
    # config_hash: 3f2a...
    # campaign: {...}
    z1 y2+:0 h1:17 z3:1 ...
    o z3 y1-:0 y1-:1 ...

One subsequence per line: an optional "o" (excluded from analysis), the label
of the ray the line was initialized to, then ray:photon_count tokens. Outcomes
are never stored; they are re-derived from the counts and a threshold.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import ValidationError

from shared_libs.config_models.noise import CampaignConfig, NoiseConfig
from sicsim.core.qutrit import BRIGHT, DARK
from sicsim.simulation.engine import Campaign, EndReason, Subsequence
from sicsim.utils.errors import DatasetParseError, UnknownRayError
from sicsim.utils.labels import DEFAULT_RESOLVER, RAY_LABELS

FORMAT_NAME = "sicsim-dataset"
FORMAT_VERSION = 1
OMIT_MARKER = "o"

_LABEL_ARRAY = np.array(RAY_LABELS, dtype=object)


@dataclass
class DatasetHeader:
    version: int = FORMAT_VERSION
    seed: Optional[int] = None
    threshold: Optional[float] = None
    noise: Optional[NoiseConfig] = None
    config_hash: Optional[str] = None
    campaign: Optional[CampaignConfig] = None
    extra: Dict[str, str] = field(default_factory=dict)


def outcomes_for(photon_counts: np.ndarray, threshold: float) -> np.ndarray:
    return np.where(np.asarray(photon_counts) > threshold, BRIGHT, DARK).astype(np.int8)


def _is_inconsistent(sub: Subsequence, threshold: float) -> bool:
    return bool(len(sub)) and not np.array_equal(sub.outcomes, outcomes_for(sub.photon_counts, threshold))


def _header_lines(campaign: Campaign) -> List[str]:
    lines = [f"# {FORMAT_NAME} {FORMAT_VERSION}"]
    cfg = campaign.config
    if cfg is not None:
        lines.append(f"# seed: {cfg.seed}")
    lines.append(f"# threshold: {campaign.threshold!r}")
    if cfg is not None:
        lines.append(f"# noise: {cfg.noise.canonical_json()}")
        lines.append(f"# config_hash: {cfg.noise.config_hash()}")
        rest = cfg.model_dump(exclude={"noise"})
        lines.append(f"# campaign: {json.dumps(rest, sort_keys=True, separators=(',', ':'))}")
    return lines


def format_subsequence(sub: Subsequence, omitted: bool) -> str:
    tokens = [OMIT_MARKER] if omitted else []
    tokens.append(RAY_LABELS[sub.v0])
    if len(sub):
        labels = _LABEL_ARRAY[sub.ray_ids.astype(np.int64)]
        tokens.extend(f"{lab}:{int(c)}" for lab, c in zip(labels, sub.photon_counts))
    return " ".join(tokens)


def write_dataset(campaign: Campaign, path: Union[str, Path]) -> Path:
    """Write the campaign; purged, omitted and threshold-inconsistent lines get "o"."""
    path = Path(path)
    lines = _header_lines(campaign)
    for sub in campaign.subsequences:
        omitted = sub.excluded or _is_inconsistent(sub, campaign.threshold)
        lines.append(format_subsequence(sub, omitted))
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")
    return path


def _resolve_label(token: str, line_number: int) -> int:
    try:
        return DEFAULT_RESOLVER.ray_id(token)
    except UnknownRayError:
        raise DatasetParseError(line_number, f"unknown ray label {token!r}") from None


def _parse_header(lines: List[Tuple[int, str]]) -> DatasetHeader:
    header = DatasetHeader()
    if not lines:
        raise DatasetParseError(1, f"missing '# {FORMAT_NAME}' header")
    first_no, first = lines[0]
    parts = first.lstrip("#").split()
    if len(parts) != 2 or parts[0] != FORMAT_NAME:
        raise DatasetParseError(first_no, f"expected '# {FORMAT_NAME} <version>', got {first!r}")
    try:
        header.version = int(parts[1])
    except ValueError:
        raise DatasetParseError(first_no, f"bad format version {parts[1]!r}") from None
    if header.version != FORMAT_VERSION:
        raise DatasetParseError(first_no, f"unsupported format version {header.version}")

    for number, line in lines[1:]:
        key, sep, value = line.lstrip("#").partition(":")
        key, value = key.strip(), value.strip()
        if not sep:
            continue
        try:
            if key == "seed":
                header.seed = int(value)
            elif key == "threshold":
                header.threshold = float(value)
            elif key == "noise":
                header.noise = NoiseConfig(**json.loads(value))
            elif key == "config_hash":
                header.config_hash = value
            elif key == "campaign":
                header.extra["campaign"] = value
            else:
                header.extra[key] = value
        except (ValueError, ValidationError) as e:
            raise DatasetParseError(number, f"bad header field {key!r}: {e}") from None
    if header.noise is not None and "campaign" in header.extra:
        try:
            header.campaign = CampaignConfig(**json.loads(header.extra.pop("campaign")), noise=header.noise)
        except (ValueError, ValidationError) as e:
            raise DatasetParseError(first_no, f"bad campaign header: {e}") from None
    return header


def _parse_line(line: str, number: int, threshold: float, purge_run_length: Optional[int], start: int) -> Subsequence:
    tokens = line.split()
    omitted = tokens[0] == OMIT_MARKER
    if omitted:
        tokens = tokens[1:]
    if not tokens:
        raise DatasetParseError(number, "line has no initial ray")
    v0 = _resolve_label(tokens[0], number)
    ray_ids = np.empty(len(tokens) - 1, dtype=np.int8)
    counts = np.empty(len(tokens) - 1, dtype=np.int32)
    for k, token in enumerate(tokens[1:]):
        label, sep, count = token.rpartition(":")
        if not sep or not label:
            raise DatasetParseError(number, f"token {token!r} is not ray:count")
        ray_ids[k] = _resolve_label(label, number)
        try:
            counts[k] = int(count)
        except ValueError:
            raise DatasetParseError(number, f"token {token!r} has a non-integer photon count") from None
        if counts[k] < 0:
            raise DatasetParseError(number, f"token {token!r} has a negative photon count")
    outcomes = outcomes_for(counts, threshold)
    sub = Subsequence(v0, ray_ids, counts, outcomes, purged=False, end_reason=None, start_index=start)
    if omitted:
        if purge_run_length is not None and len(sub) and sub.trailing_dark_run() > purge_run_length:
            sub.purged = True
            sub.end_reason = EndReason.PURGE
        else:
            sub.omitted = True
    if not sub.purged and len(sub) and outcomes[-1] == BRIGHT:
        sub.end_reason = EndReason.BRIGHT_AFTER_MIN
    return sub


def mark_invalid_terminations(subsequences: List[Subsequence]) -> int:
    """Omit kept lines that no longer end on a bright result, and the lines
    chained after each of them up to the next one restarted from its v0."""
    marked = 0
    restart_v0: Optional[int] = None
    for sub in subsequences:
        if sub.excluded:
            continue
        if restart_v0 is not None:
            if sub.v0 == restart_v0:
                restart_v0 = None
            else:
                sub.omitted = True
                marked += 1
                continue
        if len(sub) and sub.outcomes[-1] != BRIGHT:
            sub.omitted = True
            sub.end_reason = None
            marked += 1
            restart_v0 = sub.v0
    return marked


def read_dataset(path: Union[str, Path], threshold_override: Optional[float] = None) -> Campaign:
    """Parse a dataset and re-derive every outcome against the effective threshold."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        raw = f.read().splitlines()

    header_lines = [(n, line) for n, line in enumerate(raw, start=1) if line.startswith("#")]
    header = _parse_header(header_lines)
    threshold = threshold_override if threshold_override is not None else header.threshold
    if threshold is None:
        raise DatasetParseError(1, "no threshold in header and no override given")
    if threshold_override is not None and header.threshold is not None and not math.isclose(threshold_override, header.threshold):
        print(f"⚠️ Warning: threshold override {threshold_override} differs from header threshold {header.threshold}")

    purge_run_length = header.campaign.purge_run_length if header.campaign is not None else None
    subsequences: List[Subsequence] = []
    index = 0
    for number, line in enumerate(raw, start=1):
        if line.startswith("#") or not line.strip():
            continue
        sub = _parse_line(line, number, threshold, purge_run_length, index)
        subsequences.append(sub)
        index += len(sub)

    marked = mark_invalid_terminations(subsequences)
    if marked and threshold_override is not None:
        print(f"⚠️ Warning: {marked} subsequence(s) marked 'o' after re-deriving outcomes at threshold {threshold}")
    config = header.campaign
    if config is not None and threshold != config.noise.threshold:
        config = config.with_noise(config.noise.model_copy(update={"threshold": threshold}))
    return Campaign(subsequences=subsequences, config=config, threshold=float(threshold))


def read_header(path: Union[str, Path]) -> DatasetHeader:
    path = Path(path)
    header_lines = []
    with open(path, "r", encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            if not line.startswith("#"):
                break
            header_lines.append((number, line.rstrip("\n")))
    return _parse_header(header_lines)
