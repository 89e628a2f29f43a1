import os

from dotenv import load_dotenv
from pydantic import BaseModel, Field


class Settings(BaseModel):
    grounding_cap: int = Field(5_000_000, gt=0, description="Maximum number of grounded actions before grounding aborts.")
    verify_workers: int = Field(1, ge=1, description="Threads used to verify landmark candidates.")
    verbosity: int = Field(1, ge=0, description="Logger verbosity (0=errors, 1=normal, 2=warnings, 3=debug).")
    alpha: float = Field(1.0, gt=0, description="Laplace pseudo-count for NBM training.")
    seed: int = Field(0, description="Default seed for cross-validation shuffles and synthetic suites.")
    dataset_dir: str = Field("datasets", description="Directory create_dataset.py writes the synthetic suites to.")
    per_goal: int = Field(4, ge=1, description="Sequences per goal in the synthetic suites.")


_ENV_KEYS = {
    "grounding_cap": "GR_GROUNDING_CAP",
    "verify_workers": "GR_VERIFY_WORKERS",
    "verbosity": "GR_VERBOSITY",
    "alpha": "GR_ALPHA",
    "seed": "GR_SEED",
    "dataset_dir": "GR_DATASET_DIR",
    "per_goal": "GR_PER_GOAL",
}

_settings = None


def load_settings(reload=False):
    """
    Reads GR_* variables (a .env file is honoured) into a Settings object.
    The result is cached; pass reload=True after changing the environment.
    """
    global _settings
    if _settings is None or reload:
        load_dotenv()
        values = {field: os.environ[key] for field, key in _ENV_KEYS.items() if os.environ.get(key)}
        _settings = Settings(**values)
    return _settings
