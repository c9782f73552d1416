"""Configuration settings for graphvq"""

import os
from pathlib import Path
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Runtime settings, read from GVQ_* environment variables or a .env file"""

    model_config = SettingsConfigDict(env_prefix="GVQ_", env_file=".env", case_sensitive=False)

    # Parallelism
    threads: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)

    # Logging
    log_level: str = "info"

    # Benchmarks
    default_seed: int = Field(default=42, ge=0)
    progress: bool = False  # tqdm bars on long runs

    # Config search
    user_config_dir: Path = Path.home() / ".graphvq" / "configs"

    # Retrieval service
    vocab_path: Optional[Path] = None
    api_host: str = "127.0.0.1"
    api_port: int = 8000


# Global settings instance
settings = Settings()
