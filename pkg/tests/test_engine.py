# tests/test_engine.py
import numpy as np
import pytest

from shared_libs.config_models.noise import NoiseConfig
from sicsim.core.qutrit import BRIGHT, DARK, QutritState
from sicsim.core.yuoh import build_rays
from sicsim.simulation.engine import (
    EndReason,
    NoiseModel,
    RandomStreams,
    SimulationStalledError,
    measure_once,
    outcome_from_count,
    run_campaign,
    run_subsequence,
)

IDEAL = NoiseConfig.ideal()
RAYS = build_rays()


def test_outcome_from_count():
    assert outcome_from_count(6, 5.5) == BRIGHT
    assert outcome_from_count(5, 5.5) == DARK


def test_repeated_measurement_of_prepared_ray_is_bright():
    rng = np.random.default_rng(0)
    state = QutritState.from_vector(RAYS[9].unit)
    for _ in range(20):
        record, state = measure_once(state, "h0", IDEAL, rng)
        assert record.outcome == BRIGHT
        assert record.photon_count > 5


def test_orthogonal_measurement_is_dark_and_leaves_state():
    rng = np.random.default_rng(0)
    state = QutritState.basis(0)
    record, post = measure_once(state, "z2", IDEAL, rng)
    assert record.outcome == DARK
    assert record.photon_count <= 5
    assert post.same_ray(state)


def test_leaked_state_is_always_dark():
    rng = np.random.default_rng(0)
    record, post = measure_once(None, "z1", IDEAL, rng)
    assert record.outcome == DARK
    assert post is None


def test_leaked_state_ignores_dark_detection_error():
    noise = IDEAL.model_copy(update={"detection_error_dark": 1.0})
    rng = np.random.default_rng(4)
    for _ in range(50):
        record, post = measure_once(None, "h0", noise, rng)
        assert record.outcome == DARK
        assert record.photon_count <= 5
        assert post is None


@pytest.mark.parametrize("true_bright", [True, False])
def test_ideal_detection_counts_straddle_threshold(true_bright):
    model = NoiseModel(IDEAL)
    rng = np.random.default_rng(1)
    for _ in range(200):
        outcome, count = model.detect(true_bright, rng)
        assert outcome == (BRIGHT if true_bright else DARK)
        assert (count > 5) == true_bright


def test_detection_error_flips_reported_outcome():
    model = NoiseModel(IDEAL.model_copy(update={"detection_error_bright": 1.0}))
    outcome, count = model.detect(True, np.random.default_rng(0))
    assert outcome == DARK
    assert count <= 5


def test_jitter_width_matches_infidelity():
    model = NoiseModel(NoiseConfig(rotation_infidelity=5e-3))
    # E[sin^2(d/2)] for d ~ N(0, s^2) is (1 - exp(-s^2/2)) / 2
    assert (1 - np.exp(-model.jitter_sigma ** 2 / 2)) / 2 == pytest.approx(5e-3)
    assert NoiseModel(IDEAL).coherent_ideal


def test_forced_rays_are_replayed():
    forced = ["z2", "z2", "z1", "z1"]
    sub = run_subsequence("z1", min_len=1, noise=IDEAL, rng=RandomStreams.forced(forced))
    # z1 prepared: z2 is dark twice, then z1 is bright and ends the line
    assert [RAYS[r].label for r in sub.ray_ids] == ["z2", "z2", "z1"]
    assert list(sub.outcomes) == [DARK, DARK, BRIGHT]
    assert sub.end_reason is EndReason.BRIGHT_AFTER_MIN
    assert not sub.purged


def test_subsequence_ends_on_bright_after_min_len():
    sub = run_subsequence("z1", min_len=50, noise=IDEAL, rng=RandomStreams.from_seed(3))
    assert len(sub) >= 50
    assert sub.outcomes[-1] == BRIGHT
    assert sub.trailing_dark_run() == 0


def test_purge_after_long_dark_run():
    streams = RandomStreams.forced(["z2"] * 10)
    sub = run_subsequence("z1", min_len=100, purge_run_length=5, noise=IDEAL, rng=streams)
    assert sub.purged
    assert sub.end_reason is EndReason.PURGE
    assert len(sub) == 6
    assert sub.trailing_dark_run() == 6


def test_min_len_must_be_positive():
    with pytest.raises(ValueError):
        run_subsequence("z1", min_len=0, noise=IDEAL)


def test_campaign_is_deterministic_in_seed():
    a = run_campaign(3000, min_len=300, noise=IDEAL, seed=9)
    b = run_campaign(3000, min_len=300, noise=IDEAL, seed=9)
    c = run_campaign(3000, min_len=300, noise=IDEAL, seed=10)
    assert len(a) == len(b)
    for x, y in zip(a, b):
        assert np.array_equal(x.ray_ids, y.ray_ids)
        assert np.array_equal(x.photon_counts, y.photon_counts)
    assert not all(
        len(x) == len(y) and np.array_equal(x.ray_ids, y.ray_ids) for x, y in zip(a, c)
    )


def test_campaign_chains_subsequences():
    campaign = run_campaign(5000, min_len=500, noise=IDEAL, seed=2, initial_ray="h1")
    assert campaign.analysed_records >= 5000
    assert campaign.subsequences[0].v0 == 6
    kept = [s for s in campaign if not s.purged]
    for prev, nxt in zip(kept, kept[1:]):
        assert nxt.v0 == prev.last_ray
    starts = [s.start_index for s in campaign]
    assert starts == sorted(starts)


def test_ideal_bright_fraction_is_one_third(ideal_campaign):
    assert ideal_campaign.bright_fraction() == pytest.approx(1 / 3, abs=0.01)


def test_full_leak_stalls_campaign():
    noise = IDEAL.model_copy(update={"leak_rate": 1.0})
    with pytest.raises(SimulationStalledError):
        run_campaign(1000, min_len=100, noise=noise, seed=0, max_consecutive_purges=3)
