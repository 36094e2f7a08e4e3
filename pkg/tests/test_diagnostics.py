# tests/test_diagnostics.py
import math

import numpy as np
import pytest

from sicsim.analysis.diagnostics import (
    HISTOGRAM_EDGES,
    Direction,
    SignalingEntry,
    detection_repeatability,
    diagnose,
    histogram_normalized,
    pulse_infidelity,
    pulse_infidelity_survey,
    repeatability,
    repeatability_survey,
    signaling,
    signaling_ensemble,
    signaling_histogram,
)
from sicsim.analysis.tables import MINUS, PLUS, CountTables, RecordStream
from sicsim.core.qutrit import BRIGHT, DARK
from sicsim.utils.errors import InsufficientDataError
from sicsim.utils.labels import ray_id


def test_repeatability_by_hand():
    t = CountTables()
    z = ray_id("z1")
    t.n2[z, z, PLUS, PLUS] = 7
    t.n2[z, z, MINUS, MINUS] = 2
    t.n2[z, z, PLUS, MINUS] = 1
    est = repeatability(t, "z1")
    assert est.value == pytest.approx(0.9)
    assert est.samples == 10


def test_repeatability_without_pairs_raises():
    with pytest.raises(InsufficientDataError):
        repeatability(CountTables(), "z1")
    assert repeatability_survey(CountTables()) == {}


def test_ideal_measurements_are_perfectly_repeatable(ideal_stream):
    survey = repeatability_survey(ideal_stream.tables())
    assert len(survey) == 13
    assert all(e.value == 1.0 for e in survey.values())


def test_ideal_pulses_have_zero_infidelity(ideal_stream):
    survey = pulse_infidelity_survey(ideal_stream)
    assert survey.mean == 0.0
    assert len(survey.entries) == 48


def test_pulse_infidelity_needs_orthogonal_rays():
    stream = RecordStream.from_arrays([ray_id("z1"), ray_id("z1")], [BRIGHT, BRIGHT])
    with pytest.raises(ValueError):
        pulse_infidelity(stream, "z1", "h0")


def test_pulse_infidelity_by_hand():
    rays = [ray_id(r) for r in ["z1", "z2", "z1", "z2", "z1", "z3"]]
    stream = RecordStream.from_arrays(rays, [BRIGHT, BRIGHT, BRIGHT, DARK, BRIGHT, DARK])
    est = pulse_infidelity(stream, "z2", "z1")
    assert est.value == pytest.approx(0.5)
    assert est.samples == 2


def test_ideal_detection_never_misreads(ideal_stream):
    det = detection_repeatability(ideal_stream, "z1")
    assert det.dark_given_bright.value == 0.0
    assert det.bright_given_dark.value == 0.0


def test_signaling_needs_two_contexts_of_u():
    with pytest.raises(ValueError):
        signaling(RecordStream(), "z1", "z2", "z2", "h0", "backward")
    with pytest.raises(ValueError):
        signaling(RecordStream(), "z1", "z2", "h0", "h0", "backward")


def test_signaling_by_hand():
    # after a bright h0: z1 then z2 twice (z1 bright once), z1 then z3 once (dark)
    seq = [
        ("h0", BRIGHT), ("z1", BRIGHT), ("z2", DARK),
        ("h0", BRIGHT), ("z1", DARK), ("z2", DARK),
        ("h0", BRIGHT), ("z1", DARK), ("z3", DARK),
    ]
    stream = RecordStream.from_arrays([ray_id(r) for r, _ in seq], [a for _, a in seq])
    entry = signaling(stream, "z1", "z2", "z3", "h0", Direction.BACKWARD)
    assert entry.S == pytest.approx(0.5)
    assert entry.dS == pytest.approx(math.sqrt(0.25 / 2))
    assert entry.as_dict()["direction"] == "backward"


def test_signaling_without_samples_raises():
    with pytest.raises(InsufficientDataError):
        signaling(RecordStream(), "z1", "z2", "z3", "h0", "forward")


def test_normalized_signaling():
    assert SignalingEntry(0, 1, 2, 3, Direction.FORWARD, 0.2, 0.1).normalized == pytest.approx(2.0)
    assert math.isnan(SignalingEntry(0, 1, 2, 3, Direction.FORWARD, 0.0, 0.0).normalized)


def test_histogram_fit_on_gaussian_values():
    values = np.random.default_rng(0).normal(0.3, 1.2, size=5000)
    values = np.append(values, [9.0, -8.0])
    hist = histogram_normalized(values)
    assert len(hist.edges) == len(HISTOGRAM_EDGES)
    assert hist.overflow >= 1 and hist.underflow >= 1
    assert hist.entries == 5002
    assert hist.fit.mu == pytest.approx(0.3, abs=0.1)
    assert hist.fit.sigma == pytest.approx(1.2, abs=0.1)


def test_histogram_needs_fifty_entries():
    with pytest.raises(InsufficientDataError):
        histogram_normalized(np.zeros(49))


def test_ideal_signaling_ensemble_is_centered(ideal_stream):
    entries = signaling_ensemble(ideal_stream, "backward")
    assert len(entries) >= 50
    assert all(e.dS > 0 for e in entries)
    assert all(e.v < e.w for e in entries)
    hist = signaling_histogram(entries)
    assert abs(hist.fit.mu) < 0.5
    assert 0.5 < hist.fit.sigma < 1.6


def test_diagnose_collects_everything(ideal_stream):
    report = diagnose(ideal_stream)
    assert set(report.signaling) == set(Direction)
    assert report.lowest_repeatability in {r for r in report.repeatability}
    assert report.infidelity is not None
    assert report.detection is not None


def test_diagnose_on_a_tiny_stream_notes_missing_pieces():
    stream = RecordStream.from_arrays([ray_id("z1")] * 3, [BRIGHT] * 3)
    report = diagnose(stream)
    assert report.histograms[Direction.FORWARD] is None
    assert report.notes
