# tests/test_dataset.py
import numpy as np
import pytest

from shared_libs.config_models.noise import CampaignConfig, NoiseConfig
from sicsim.core.qutrit import BRIGHT, DARK
from sicsim.io.dataset import (
    FORMAT_NAME,
    format_subsequence,
    mark_invalid_terminations,
    read_dataset,
    read_header,
    write_dataset,
)
from sicsim.simulation.engine import Campaign, EndReason, Subsequence, run_campaign
from sicsim.utils.errors import DatasetParseError
from sicsim.utils.labels import ray_id

HEADER = "# sicsim-dataset 1\n# threshold: 5.5\n"


def _sub(v0, rays, counts, purged=False):
    rays = [ray_id(r) for r in rays]
    outcomes = [BRIGHT if c > 5.5 else DARK for c in counts]
    return Subsequence(ray_id(v0), rays, counts, outcomes, purged, EndReason.PURGE if purged else None)


def test_format_subsequence():
    sub = _sub("z1", ["y2+", "h1"], [0, 17])
    assert format_subsequence(sub, omitted=False) == "z1 y2+:0 h1:17"
    assert format_subsequence(sub, omitted=True) == "o z1 y2+:0 h1:17"


def test_write_then_read_keeps_records(tmp_path):
    campaign = run_campaign(3000, min_len=300, noise=NoiseConfig(), seed=4)
    path = write_dataset(campaign, tmp_path / "run.ds")
    back = read_dataset(path)
    assert len(back) == len(campaign)
    assert back.threshold == campaign.threshold
    assert back.config == campaign.config
    for a, b in zip(campaign, back):
        assert a.v0 == b.v0
        assert np.array_equal(a.ray_ids, b.ray_ids)
        assert np.array_equal(a.photon_counts, b.photon_counts)
        assert a.purged == b.purged


def test_header_fields(tmp_path):
    campaign = run_campaign(500, min_len=100, noise=NoiseConfig.ideal(), seed=8)
    path = write_dataset(campaign, tmp_path / "run.ds")
    first = path.read_text(encoding="utf-8").splitlines()[0]
    assert first == f"# {FORMAT_NAME} 1"
    header = read_header(path)
    assert header.seed == 8
    assert header.threshold == 5.5
    assert header.noise.is_ideal
    assert header.config_hash == NoiseConfig.ideal().config_hash()
    assert header.campaign.min_len == 100


def test_purged_lines_are_written_with_marker(tmp_path):
    campaign = Campaign([_sub("z1", ["z2"] * 4, [0] * 4, purged=True), _sub("z1", ["z1"], [20])], threshold=5.5)
    path = write_dataset(campaign, tmp_path / "run.ds")
    lines = [l for l in path.read_text(encoding="utf-8").splitlines() if not l.startswith("#")]
    assert lines == ["o z1 z2:0 z2:0 z2:0 z2:0", "z1 z1:20"]


def test_marked_line_with_long_dark_tail_reads_as_purged(tmp_path):
    path = tmp_path / "run.ds"
    config = CampaignConfig(total=1, min_len=1, purge_run_length=3, noise=NoiseConfig.ideal())
    write_dataset(Campaign([_sub("z1", ["z1"], [20])], config=config, threshold=5.5), path)
    text = path.read_text(encoding="utf-8") + "o z1 z2:0 z2:0 z2:0 z2:0\no z1 z2:0 z1:19\n"
    path.write_text(text, encoding="utf-8")
    back = read_dataset(path)
    assert back.subsequences[-2].purged
    assert back.subsequences[-1].omitted and not back.subsequences[-1].purged


def test_threshold_override_re_derives_outcomes(tmp_path, capsys):
    path = tmp_path / "run.ds"
    path.write_text(HEADER + "z1 z1:7 z2:3 z1:9\nz1 z2:2 z1:12\n", encoding="utf-8")
    campaign = read_dataset(path, threshold_override=8.5)
    out = capsys.readouterr().out
    assert "⚠️ Warning" in out
    assert campaign.threshold == 8.5
    first, second = campaign.subsequences
    assert list(first.outcomes) == [DARK, DARK, BRIGHT]
    assert not first.excluded and not second.excluded


def test_override_that_breaks_termination_marks_lines(tmp_path, capsys):
    path = tmp_path / "run.ds"
    path.write_text(HEADER + "z1 h0:7\nh0 z2:30\nz2 z1:40\nz1 z3:30\n", encoding="utf-8")
    campaign = read_dataset(path, threshold_override=10.5)
    omitted = [s.omitted for s in campaign]
    # line 1 now ends dark; lines 2 and 3 chain on from it; line 4 restarts from z1
    assert omitted == [True, True, True, False]
    assert "marked 'o'" in capsys.readouterr().out


def test_mark_invalid_terminations_counts():
    subs = [_sub("z1", ["z2"], [0]), _sub("z2", ["z1"], [20]), _sub("z1", ["z1"], [20])]
    assert mark_invalid_terminations(subs) == 2
    assert [s.omitted for s in subs] == [True, True, False]


@pytest.mark.parametrize(
    "body,line",
    [
        ("z1 q9:3\n", 3),
        ("z1 z1\n", 3),
        ("z1 z1:x\n", 3),
        ("z1 z1:-1\n", 3),
        ("o\n", 3),
    ],
)
def test_parse_errors_name_the_line(tmp_path, body, line):
    path = tmp_path / "bad.ds"
    path.write_text(HEADER + body, encoding="utf-8")
    with pytest.raises(DatasetParseError) as err:
        read_dataset(path)
    assert err.value.line_number == line


def test_missing_header_is_a_parse_error(tmp_path):
    path = tmp_path / "bad.ds"
    path.write_text("z1 z1:20\n", encoding="utf-8")
    with pytest.raises(DatasetParseError):
        read_dataset(path)


def test_unsupported_version(tmp_path):
    path = tmp_path / "bad.ds"
    path.write_text("# sicsim-dataset 2\n# threshold: 5.5\n", encoding="utf-8")
    with pytest.raises(DatasetParseError):
        read_dataset(path)


def test_missing_threshold_needs_override(tmp_path):
    path = tmp_path / "run.ds"
    path.write_text("# sicsim-dataset 1\nz1 z1:20\n", encoding="utf-8")
    with pytest.raises(DatasetParseError):
        read_dataset(path)
    assert read_dataset(path, threshold_override=5.5).threshold == 5.5


def test_missing_file_raises(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_dataset(tmp_path / "nope.ds")
