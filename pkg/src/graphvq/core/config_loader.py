"""Experiment configuration loading utilities"""

import logging
from pathlib import Path
from typing import List, Optional, Union

import yaml

from graphvq.core.config import settings
from graphvq.models.experiment import ExperimentConfig

logger = logging.getLogger(__name__)

# Configuration directories
PRESET_DIR = Path(__file__).parent.parent.parent.parent / "configs" / "presets"


class ConfigNotFoundError(Exception):
    """Raised when an experiment configuration cannot be found"""

    pass


def _user_dirs(user_config_dir: Optional[Path]) -> List[Path]:
    """Custom dir first, then the user dir"""
    user_dir = Path(user_config_dir) if user_config_dir is not None else settings.user_config_dir
    return [user_dir / "custom", user_dir]


def load_config_from_file(file_path: Union[str, Path]) -> ExperimentConfig:
    """
    Load an experiment configuration from a YAML file.

    Relative vocab_path / dataset_path / output_path entries are resolved
    against the file's directory.

    Raises:
        FileNotFoundError: If file doesn't exist
        yaml.YAMLError: If YAML is invalid
        ValueError: If config schema is invalid
    """
    file_path = Path(file_path)

    if not file_path.exists():
        raise FileNotFoundError(f"Config file not found: {file_path}")

    logger.info(f"Loading config from {file_path}")

    try:
        with open(file_path, "r") as f:
            config_data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        logger.error(f"Invalid YAML in {file_path}: {e}")
        raise

    try:
        if not isinstance(config_data, dict):
            raise ValueError("top level must be a mapping")
        for key in ("vocab_path", "dataset_path", "output_path"):
            value = config_data.get(key)
            if value and not Path(value).expanduser().is_absolute():
                config_data[key] = str(file_path.parent / Path(value))
        config = ExperimentConfig(**config_data)
    except Exception as e:
        logger.error(f"Invalid config schema in {file_path}: {e}")
        raise ValueError(f"Invalid configuration: {e}")

    logger.info(f"Successfully loaded config: {config.id}")
    return config


def load_config_from_id(
    config_id: str, user_config_dir: Optional[Path] = None
) -> ExperimentConfig:
    """
    Load an experiment configuration by ID.

    Searches for config in:
    1. Custom user configs (<user dir>/custom/)
    2. User configs (~/.graphvq/configs/ or GVQ_USER_CONFIG_DIR)
    3. Preset configs (configs/presets/)

    Raises:
        ConfigNotFoundError: If config ID not found
    """
    logger.info(f"Loading config by ID: {config_id}")

    for directory in get_config_search_paths(user_config_dir):
        config_file = directory / f"{config_id}.yaml"
        if config_file.exists():
            logger.info(f"Found config: {config_file}")
            return load_config_from_file(config_file)

    searched = ", ".join(str(p) for p in get_config_search_paths(user_config_dir))
    raise ConfigNotFoundError(f"Configuration '{config_id}' not found (searched: {searched})")


def load_config(ref: Union[str, Path], user_config_dir: Optional[Path] = None) -> ExperimentConfig:
    """Load from a path when `ref` names an existing file or ends in .yaml/.yml, else by id"""
    path = Path(ref)
    if path.exists() or path.suffix in (".yaml", ".yml"):
        return load_config_from_file(path)
    return load_config_from_id(str(ref), user_config_dir=user_config_dir)


def list_available_configs(user_config_dir: Optional[Path] = None) -> List[ExperimentConfig]:
    """
    List all available experiment configurations, presets first.

    Invalid files are skipped with a warning.
    """
    configs = []

    for directory in reversed(get_config_search_paths(user_config_dir)):
        if not directory.exists():
            continue
        logger.info(f"Scanning configs in {directory}")
        for config_file in sorted(directory.glob("*.yaml")):
            try:
                config = load_config_from_file(config_file)
                configs.append(config)
                logger.debug(f"Loaded config: {config.id}")
            except Exception as e:
                logger.warning(f"Skipping invalid config {config_file}: {e}")

    logger.info(f"Loaded {len(configs)} configurations")
    return configs


def get_config_search_paths(user_config_dir: Optional[Path] = None) -> List[Path]:
    """Directories searched for configurations, highest priority first"""
    return _user_dirs(user_config_dir) + [PRESET_DIR]
