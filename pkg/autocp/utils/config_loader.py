"""
Configuration loader module for loading and validating run configuration files.
"""

import json
import os
from typing import Any, Dict, Optional

from loguru import logger
from pydantic import ValidationError

from autocp.exceptions import ConfigError
from autocp.models.schemas import RunConfig


class ConfigLoader:
    """
    Configuration loader class for loading and validating run configurations.
    """

    @staticmethod
    def load_config(config_path: str) -> Dict[str, Any]:
        """
        Load configuration from a JSON file.

        Args:
            config_path: Path to the configuration file

        Returns:
            Dictionary containing the raw configuration

        Raises:
            ConfigError: If the file is missing or not valid JSON
        """
        if not os.path.exists(config_path):
            logger.error(f"Configuration file not found: {config_path}")
            raise ConfigError(f"Configuration file not found: {config_path}")

        try:
            logger.info(f"Loading configuration from: {config_path}")
            with open(config_path, "r", encoding="utf-8") as f:
                config = json.load(f)
        except json.JSONDecodeError as e:
            logger.error(f"Error parsing configuration file: {e}")
            raise ConfigError(f"Invalid JSON in configuration file {config_path} at line {e.lineno}: {e.msg}") from e

        if not isinstance(config, dict):
            raise ConfigError(f"Configuration file {config_path} must hold a JSON object")
        return config

    @staticmethod
    def validate(config: Dict[str, Any], source: str = "<config>") -> RunConfig:
        """
        Validate a raw configuration dictionary into a RunConfig.

        Raises:
            ConfigError: Listing every invalid field with its location
        """
        try:
            return RunConfig.model_validate(config)
        except ValidationError as e:
            problems = "; ".join(
                f"{'.'.join(str(part) for part in err['loc']) or '<root>'}: {err['msg']}" for err in e.errors()
            )
            logger.error(f"Invalid configuration in {source}: {problems}")
            raise ConfigError(f"Invalid configuration in {source}: {problems}") from e

    @classmethod
    def load_run_config(
        cls, config_path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None
    ) -> RunConfig:
        """
        Build a RunConfig from an optional file plus overrides.

        Override keys may be dotted (``"budget.n_iter"``) to reach nested
        sections; ``None`` values are ignored so unset CLI flags keep the file
        or default values.
        """
        config = cls.load_config(config_path) if config_path else {}
        for key, value in (overrides or {}).items():
            if value is None:
                continue
            section = config
            *parents, leaf = key.split(".")
            for part in parents:
                section = section.setdefault(part, {})
                if not isinstance(section, dict):
                    raise ConfigError(f"Cannot override '{key}': '{part}' is not a section")
            section[leaf] = value
        return cls.validate(config, config_path or "<flags>")
