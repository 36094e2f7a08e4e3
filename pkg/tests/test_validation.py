# tests/test_validation.py
import numpy as np
import pytest

from shared_libs.config_models.noise import NoiseConfig
from sicsim.core.qutrit import BRIGHT, DARK
from sicsim.simulation.engine import Campaign, Subsequence, run_campaign
from sicsim.validation.cross import DatasetCrossValidator
from sicsim.validation.noise import NOISE_PRESET_DIR, NoiseConfigValidator, resolve_noise_path
from sicsim.utils.labels import ray_id


@pytest.mark.parametrize("preset", ["ideal", "lab", "overrotation"])
def test_presets_validate(preset):
    path = resolve_noise_path(preset)
    assert path.parent == NOISE_PRESET_DIR
    noise = NoiseConfigValidator(path).validate()
    assert isinstance(noise, NoiseConfig)
    assert noise.is_ideal == (preset == "ideal")


def test_lab_preset_matches_defaults():
    assert NoiseConfigValidator(resolve_noise_path("lab")).validate() == NoiseConfig()


def test_overrotation_preset():
    noise = NoiseConfigValidator(resolve_noise_path("overrotation")).validate()
    assert noise.rotation_systematic == pytest.approx(0.03)


def test_explicit_path_wins(tmp_path):
    path = tmp_path / "custom.yaml"
    path.write_text("leak_rate: 0.0\n", encoding="utf-8")
    assert resolve_noise_path(str(path)) == path
    assert NoiseConfigValidator(path).validate().leak_rate == 0.0


@pytest.mark.parametrize(
    "content",
    ["", "- 1\n- 2\n", "threshold: 40\n", "bogus_field: 1\n", "noise: [unclosed\n"],
)
def test_bad_noise_files(tmp_path, content, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text(content, encoding="utf-8")
    assert NoiseConfigValidator(path).validate() is None
    assert "❌" in capsys.readouterr().out


def test_missing_noise_file(tmp_path):
    assert NoiseConfigValidator(tmp_path / "none.yaml").validate() is None


def test_simulated_campaign_passes_cross_validation():
    campaign = run_campaign(2000, min_len=200, noise=NoiseConfig(), seed=3)
    validator = DatasetCrossValidator(campaign)
    assert validator.validate()
    assert not any(validator.errors.values())


def _kept(v0, rays, outcomes):
    rays = [ray_id(r) for r in rays]
    counts = [20 if a == BRIGHT else 0 for a in outcomes]
    return Subsequence(ray_id(v0), rays, counts, outcomes, False, None)


def test_cross_validation_catches_each_problem():
    bad_chain = _kept("h0", ["z2"], [BRIGHT])
    bad_count = _kept("z2", ["z1"], [BRIGHT])
    bad_count.photon_counts = np.array([1], dtype=np.int32)
    dark_end = _kept("z1", ["z1", "z2"], [BRIGHT, DARK])
    campaign = Campaign([_kept("z1", ["z1"], [BRIGHT]), bad_chain, bad_count, dark_end], threshold=5.5)
    validator = DatasetCrossValidator(campaign, purge_run_length=55)
    assert not validator.validate()
    assert validator.errors["concatenation"]
    assert validator.errors["threshold"]
    assert validator.errors["termination"]


def test_cross_validation_checks_dark_runs():
    long_dark = _kept("z1", ["z2"] * 4 + ["z1"], [DARK] * 4 + [BRIGHT])
    validator = DatasetCrossValidator(Campaign([long_dark], threshold=5.5), purge_run_length=3)
    assert not validator.validate()
    assert validator.errors["purge_run"]
