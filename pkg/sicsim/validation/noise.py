from pathlib import Path
from typing import Optional

import yaml
from pydantic import ValidationError

from shared_libs.config_models.noise import NoiseConfig

NOISE_PRESET_DIR = Path(__file__).resolve().parents[2] / "config_sources" / "noise"


def resolve_noise_path(name_or_path: str) -> Path:
    """A file path as given, or the name of a preset under config_sources/noise/."""
    path = Path(name_or_path)
    if path.is_file():
        return path
    for suffix in (".yaml", ".yml", ".json"):
        preset = NOISE_PRESET_DIR / f"{name_or_path}{suffix}"
        if preset.is_file():
            return preset
    return path


class NoiseConfigValidator:
    """Validates a noise YAML/JSON file and returns a NoiseConfig model."""

    def __init__(self, file_path: Path):
        self.file_path = Path(file_path)

    def validate(self) -> Optional[NoiseConfig]:
        print(f"\n--- Validating Noise Config: {self.file_path} ---")
        if not self.file_path.is_file():
            print(f"❌ Error: noise config not found at '{self.file_path}'")
            return None

        try:
            with open(self.file_path, "r") as f:
                loaded_data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            print(f"❌ Error loading noise config: {e}")
            return None

        if loaded_data is None:
            print("❌ Error: noise config is empty.")
            return None
        if not isinstance(loaded_data, dict):
            print(f"❌ Error: noise config must be a mapping, got {type(loaded_data).__name__}.")
            return None
        # Presets may nest the fields under a top-level `noise:` key.
        if set(loaded_data) == {"noise"}:
            loaded_data = loaded_data["noise"]

        try:
            noise = NoiseConfig(**loaded_data)
        except ValidationError as e:
            print("❌ Pydantic Validation Failed for noise config!")
            print("   Error details:")
            print(e)
            return None

        print("✅ Noise Config Validation Successful!")
        print(f"   Ideal: {noise.is_ideal}")
        print(f"   Config hash: {noise.config_hash()[:12]}")
        return noise
