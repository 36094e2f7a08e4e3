from typing import Dict, List, Optional

import numpy as np

from sicsim.core.qutrit import BRIGHT, DARK
from sicsim.simulation.engine import Campaign, outcome_from_count
from sicsim.utils.labels import ray_label


class DatasetCrossValidator:
    """Consistency checks across the lines of a campaign."""

    def __init__(self, campaign: Campaign, purge_run_length: Optional[int] = None):
        self.campaign = campaign
        if purge_run_length is None and campaign.config is not None:
            purge_run_length = campaign.config.purge_run_length
        self.purge_run_length = purge_run_length
        self.errors: Dict[str, List[str]] = {}

    def validate(self) -> bool:
        print("\n--- Performing Dataset Cross-Validation ---")
        all_checks_passed = True
        errors: Dict[str, List[str]] = {
            "concatenation": [],
            "threshold": [],
            "purge_run": [],
            "termination": [],
        }
        subs = self.campaign.subsequences
        threshold = self.campaign.threshold

        # Each kept line starts where the previous kept line ended; after a
        # purge the purged line's v0 is used again.
        print("\nChecking line concatenation...")
        expected_v0: Optional[int] = None
        for n, sub in enumerate(subs, start=1):
            if sub.omitted:
                expected_v0 = None
                continue
            if expected_v0 is not None and sub.v0 != expected_v0:
                errors["concatenation"].append(
                    f"Line {n}: starts at {ray_label(sub.v0)}, expected {ray_label(expected_v0)}."
                )
                all_checks_passed = False
            expected_v0 = sub.v0 if sub.purged else sub.last_ray
        if not errors["concatenation"]:
            print("   ✅ Lines concatenate.")

        print(f"\nChecking outcomes against threshold {threshold}...")
        for n, sub in enumerate(subs, start=1):
            if not len(sub):
                continue
            derived = np.where(sub.photon_counts > threshold, BRIGHT, DARK)
            bad = np.flatnonzero(derived != sub.outcomes)
            if len(bad):
                k = int(bad[0])
                errors["threshold"].append(
                    f"Line {n}: {len(bad)} record(s) disagree, first at position {k} "
                    f"(count {int(sub.photon_counts[k])}, outcome {int(sub.outcomes[k]):+d}, "
                    f"expected {outcome_from_count(int(sub.photon_counts[k]), threshold):+d})."
                )
                all_checks_passed = False
        if not errors["threshold"]:
            print("   ✅ Every outcome matches its photon count.")

        if self.purge_run_length is not None:
            print(f"\nChecking dark runs against the purge length {self.purge_run_length}...")
            for n, sub in enumerate(subs, start=1):
                if sub.purged:
                    if sub.trailing_dark_run() != self.purge_run_length + 1:
                        errors["purge_run"].append(
                            f"Line {n}: purged with a final dark run of {sub.trailing_dark_run()}, "
                            f"expected {self.purge_run_length + 1}."
                        )
                        all_checks_passed = False
                    continue
                if sub.excluded or not len(sub):
                    continue
                runs = _longest_dark_run(sub.outcomes)
                if runs > self.purge_run_length:
                    errors["purge_run"].append(
                        f"Line {n}: kept line holds a dark run of {runs} (> {self.purge_run_length})."
                    )
                    all_checks_passed = False
            if not errors["purge_run"]:
                print("   ✅ Purged lines and dark runs are consistent.")
        else:
            print("⚠️ Warning: purge length unknown; dark-run check skipped.")

        print("\nChecking line terminations...")
        for n, sub in enumerate(subs, start=1):
            if sub.excluded or not len(sub):
                continue
            if sub.outcomes[-1] != BRIGHT:
                errors["termination"].append(f"Line {n}: kept line does not end on a bright result.")
                all_checks_passed = False
        if not errors["termination"]:
            print("   ✅ Every kept line ends on a bright result.")

        if not all_checks_passed:
            print("\n❌ Dataset Cross-Validation Failed!")
            for category, msgs in errors.items():
                if msgs:
                    print(f"   --- {category} ---")
                    for msg in msgs[:20]:
                        print(f"      - {msg}")
                    if len(msgs) > 20:
                        print(f"      ... {len(msgs) - 20} more")
        else:
            print("\n✅ All Dataset Cross-Validation Checks Passed.")

        self.errors = errors
        return all_checks_passed


def _longest_dark_run(outcomes: np.ndarray) -> int:
    dark = np.concatenate(([0], (outcomes == DARK).astype(np.int8), [0]))
    edges = np.flatnonzero(np.diff(dark))
    if not len(edges):
        return 0
    return int((edges[1::2] - edges[::2]).max())
