# tests/conftest.py
import sys
from pathlib import Path

import pytest

PROJECT_ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(PROJECT_ROOT))

from shared_libs.config_models.noise import NoiseConfig  # noqa: E402
from sicsim.analysis.tables import RecordStream  # noqa: E402
from sicsim.simulation.engine import run_campaign  # noqa: E402

IDEAL_RECORDS = 100_000
NOISY_RECORDS = 20_000


@pytest.fixture(scope="session")
def ideal_campaign():
    return run_campaign(IDEAL_RECORDS, min_len=1000, noise=NoiseConfig.ideal(), seed=11)


@pytest.fixture(scope="session")
def ideal_stream(ideal_campaign):
    return RecordStream.from_subsequences(ideal_campaign.subsequences)


@pytest.fixture(scope="session")
def noisy_campaign():
    return run_campaign(NOISY_RECORDS, min_len=500, noise=NoiseConfig(), seed=5)
